#!/usr/bin/env python3
"""Regenerate the bundled halo-orbit catalog.

For each resonance family an L2 southern halo orbit is produced by
differential correction, then resampled at states uniformly spaced in time
over one period. The 9:2 member is anchored to the bundled reconfiguration
chief state (corrected to periodicity at fixed z); the remaining families are
reached by continuation in period toward the labeled N:M synodic resonances.

Writes CSV with header family,x_km,y_km,z_km,vx_kmps,vy_kmps,vz_kmps.

Usage: python scripts/generate_halo_catalog.py [--out PATH] [--per-family N]
"""

import argparse
import sys

import numpy as np

import haloplan as hp
from haloplan import halo

SYNODIC_MONTH_DAYS = 29.530589

# apolune seed of the 9:2 member, km and km/s, moon-centered synodic frame
SEED_92_R = np.array([-13395.0, 0.0, -70841.0])
SEED_92_V = np.array([0.0, 0.1055, 0.0])

FAMILIES = ("9:2", "4:1", "7:2", "3:1", "5:2", "2:1")


def resonant_period_tu(family, sys):
    n_orbits, n_months = (int(s) for s in family.split(":"))
    t_syn_tu = SYNODIC_MONTH_DAYS * 86400.0 / sys.tu_s
    return n_months * t_syn_tu / n_orbits


def orbit_sanity(states, sys):
    z_amp = np.max(np.abs(states[:, 2]))
    y_amp = np.max(np.abs(states[:, 1]))
    if z_amp < 1e-4 or y_amp < 1e-4:
        raise RuntimeError("correction collapsed toward a planar or point solution")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="src/haloplan/data/halo_catalog.csv")
    ap.add_argument("--per-family", type=int, default=1000)
    args = ap.parse_args(argv)

    sys_em = hp.earth_moon()
    seed = hp.nondimensionalize(hp.SynodicState(SEED_92_R, SEED_92_V), sys_em)
    anchor, p_anchor = halo.correct_halo(seed, sys_em, half_period_hint=0.75)
    print(f"9:2 anchor: P = {p_anchor:.6f} TU = {sys_em.tu_to_hours(p_anchor) / 24:.4f} d")

    members = {"9:2": (anchor, p_anchor)}
    targets = sorted(
        ((fam, resonant_period_tu(fam, sys_em)) for fam in FAMILIES if fam != "9:2"),
        key=lambda kv: kv[1],
    )

    # bootstrap a second member, then walk the family by pseudo-arclength
    # toward longer periods, refining the step onto each target period
    y1 = anchor.y.copy()
    y1[2] -= sys_em.km_to_du(300.0)
    st1, p1 = halo.correct_halo(
        hp.SynodicState.from_vector(y1), sys_em, 0.5 * p_anchor
    )
    prev, cur = (anchor, p_anchor), (st1, p1)
    if p1 < p_anchor:  # ensure the walk direction increases the period
        prev, cur = cur, prev
    step = 0.02
    for fam, p_target in targets:
        while cur[1] < p_target:
            nxt = halo.continue_family(prev, cur, sys_em, step)
            if nxt[1] >= p_target:
                # secant refinement of the step onto the target period
                s = step
                for _ in range(60):
                    if abs(nxt[1] - p_target) < 1e-11:
                        break
                    s *= (p_target - cur[1]) / (nxt[1] - cur[1])
                    nxt = halo.continue_family(prev, cur, sys_em, s)
                prev, cur = cur, nxt
                break
            prev, cur = cur, nxt
        members[fam] = cur
        r_km = sys_em.du_to_km(cur[0].r)
        print(f"{fam}: P = {cur[1]:.6f} TU = {sys_em.tu_to_hours(cur[1]) / 24:.4f} d, "
              f"apolune x = {r_km[0]:.1f} km, z = {r_km[2]:.1f} km")

    rows = []
    for fam in FAMILIES:
        st, period = members[fam]
        states = halo.resample_orbit(st, period, sys_em, args.per_family)
        orbit_sanity(states, sys_em)
        cs = [hp.jacobi_constant(hp.SynodicState.from_vector(y), sys_em) for y in states]
        print(f"{fam}: jacobi spread {np.max(cs) - np.min(cs):.3e}")
        for y in states:
            r = sys_em.du_to_km(y[:3])
            v = sys_em.duptu_to_kmps(y[3:])
            rows.append((fam, *r, *v))

    with open(args.out, "w") as f:
        f.write("family,x_km,y_km,z_km,vx_kmps,vy_kmps,vz_kmps\n")
        for fam, *vals in rows:
            f.write(fam + "," + ",".join(f"{v:.17g}" for v in vals) + "\n")
    print(f"wrote {len(rows)} states to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
