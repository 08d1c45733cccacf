"""Scenario definition and schema-validated file loading.

Scenario files are TOML with fixed units at the boundary: km, km/s, hours and
seconds. Everything is converted to nondimensional units on load; unknown
keys anywhere in the document are rejected so typos fail loudly.
"""

import sys
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .constants import Cr3bpSystem, earth_moon
from .cr3bp import SynodicState, nondimensionalize
from .errors import ScenarioError
from .reldyn import RelativeState
from .stm import Hcw, MatrixExponential, NumericalIntegration, StmStrategy, YamanakaAnkersen

BUNDLED_SCENARIOS = ("reconfig1", "reconfig2", "reconfig1-extended", "mpc-nrho")


@dataclass(frozen=True)
class Scenario:
    """One reconfiguration problem, fully nondimensional.

    chief0 is the absolute chief state at t = 0; deputy0/deputy_f the relative
    boundary conditions; window the horizon length in TU.
    """

    system: Cr3bpSystem
    chief0: SynodicState
    deputy0: RelativeState
    deputy_f: RelativeState
    window: float
    n_grid_steps: int
    strategy: StmStrategy
    solver_cfg: Any = None
    mpc_cfg: Any = None
    mc_cfg: Any = None
    name: str = "scenario"

    def __post_init__(self):
        if self.window <= 0.0:
            raise ScenarioError("window must be positive", key="window")
        if self.n_grid_steps < 1:
            raise ScenarioError("n_grid_steps must be at least 1", key="n_grid_steps")

    @property
    def t0(self):
        return self.chief0.t

    @property
    def t_f(self):
        return self.chief0.t + self.window

    def replace(self, **kwargs):
        from dataclasses import replace as _replace

        return _replace(self, **kwargs)


def _require(table, key, where):
    if key not in table:
        raise ScenarioError(f"missing key '{key}' in [{where}]", key=key)
    return table[key]


def _check_unknown(table, allowed, where):
    unknown = set(table) - set(allowed)
    if unknown:
        k = sorted(unknown)[0]
        raise ScenarioError(f"unknown key '{k}' in [{where}]", key=k)


def _vec3(value, key):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ScenarioError(f"'{key}' must be a 3-vector", key=key)
    return arr


def _parse_strategy(table, sys: Cr3bpSystem) -> StmStrategy:
    _check_unknown(table, {"kind", "matexp", "numint", "hcw", "ya"}, "strategy")
    kind = _require(table, "kind", "strategy")
    matexp = table.get("matexp", {})
    _check_unknown(matexp, {"step_s"}, "strategy.matexp")
    numint = table.get("numint", {})
    _check_unknown(numint, {"tol"}, "strategy.numint")
    hcw = table.get("hcw", {})
    _check_unknown(hcw, {"mean_motion_radps"}, "strategy.hcw")
    _check_unknown(table.get("ya", {}), set(), "strategy.ya")
    return strategy_from_kind(
        kind,
        sys,
        step_s=matexp.get("step_s"),
        tol=numint.get("tol"),
        mean_motion_radps=hcw.get("mean_motion_radps"),
    )


def strategy_from_kind(kind, sys: Cr3bpSystem, step_s=None, tol=None, mean_motion_radps=None):
    """Build a strategy from its tag plus optional file/CLI parameters."""
    if kind == "matexp":
        if step_s is None:
            raise ScenarioError("matexp strategy needs step_s", key="step_s")
        return MatrixExponential(step=sys.seconds_to_tu(float(step_s)))
    if kind == "numint":
        return NumericalIntegration(tol=float(tol) if tol is not None else 1e-12)
    if kind == "hcw":
        n = None
        if mean_motion_radps is not None:
            n = float(mean_motion_radps) * sys.tu_s  # rad/s -> rad/TU
        return Hcw(mean_motion=n)
    if kind == "ya":
        return YamanakaAnkersen()
    raise ScenarioError(f"unknown strategy kind '{kind}'", key="kind")


def _parse_solver(table):
    from .solver import SolverConfig

    allowed = {
        "eps_cost",
        "eps_remove",
        "init_stride",
        "init_keep",
        "max_refine_iters",
        "socp_tol",
    }
    _check_unknown(table, allowed, "solver")
    kwargs = {k: table[k] for k in allowed if k in table}
    for k in ("init_stride", "init_keep", "max_refine_iters"):
        if k in kwargs:
            kwargs[k] = int(kwargs[k])
    return SolverConfig(**kwargs)


def _parse_mpc(table, sys: Cr3bpSystem):
    from .mpc import MpcConfig, NoiseModel

    _check_unknown(table, {"n_segments", "seed", "noise"}, "mpc")
    noise_tab = table.get("noise", {})
    allowed = {
        "chief_pos_km",
        "chief_vel_kmps",
        "deputy_pos_km",
        "deputy_vel_kmps",
        "maneuver_time_s",
        "maneuver_mag_kmps",
        "maneuver_dir_deg",
    }
    _check_unknown(noise_tab, allowed, "mpc.noise")
    noise = NoiseModel(**{k: float(noise_tab.get(k, 0.0)) for k in allowed})
    return MpcConfig(
        n_segments=int(_require(table, "n_segments", "mpc")),
        noise=noise,
        seed=int(table.get("seed", 0)),
    )


def _parse_montecarlo(table):
    from .montecarlo import McConfig

    _check_unknown(table, {"trials", "seed", "matexp_step_s"}, "montecarlo")
    return McConfig(
        n_trials=int(_require(table, "trials", "montecarlo")),
        seed=int(_require(table, "seed", "montecarlo")),
        matexp_step_s=float(table.get("matexp_step_s", 60.0)),
    )


_TOP_KEYS = {"name", "chief", "deputy", "window", "strategy", "solver", "constants", "mpc", "montecarlo"}


def scenario_from_dict(doc, system: Optional[Cr3bpSystem] = None, name="scenario") -> Scenario:
    _check_unknown(doc, _TOP_KEYS, "scenario")
    const_tab = doc.get("constants", {})
    _check_unknown(const_tab, {"mu", "du_km", "tu_s"}, "constants")
    if system is None:
        system = earth_moon()
    if const_tab:
        system = Cr3bpSystem(
            mu=float(const_tab.get("mu", system.mu)),
            du_km=float(const_tab.get("du_km", system.du_km)),
            tu_s=float(const_tab.get("tu_s", system.tu_s)),
        )

    chief_tab = _require(doc, "chief", "scenario")
    _check_unknown(chief_tab, {"r_km", "v_kmps"}, "chief")
    chief_km = SynodicState(
        _vec3(_require(chief_tab, "r_km", "chief"), "r_km"),
        _vec3(_require(chief_tab, "v_kmps", "chief"), "v_kmps"),
        0.0,
    )
    chief0 = nondimensionalize(chief_km, system)

    dep_tab = _require(doc, "deputy", "scenario")
    allowed = {
        "initial_rho_km",
        "initial_rhodot_kmps",
        "final_rho_km",
        "final_rhodot_kmps",
    }
    _check_unknown(dep_tab, allowed, "deputy")
    d0 = RelativeState(
        system.km_to_du(_vec3(_require(dep_tab, "initial_rho_km", "deputy"), "initial_rho_km")),
        system.kmps_to_duptu(
            _vec3(_require(dep_tab, "initial_rhodot_kmps", "deputy"), "initial_rhodot_kmps")
        ),
        0.0,
    )
    win_tab = _require(doc, "window", "scenario")
    _check_unknown(win_tab, {"hours", "n_grid_steps"}, "window")
    window = system.hours_to_tu(float(_require(win_tab, "hours", "window")))
    df = RelativeState(
        system.km_to_du(_vec3(_require(dep_tab, "final_rho_km", "deputy"), "final_rho_km")),
        system.kmps_to_duptu(
            _vec3(_require(dep_tab, "final_rhodot_kmps", "deputy"), "final_rhodot_kmps")
        ),
        window,
    )

    strategy = _parse_strategy(_require(doc, "strategy", "scenario"), system)
    solver_cfg = _parse_solver(doc.get("solver", {}))
    mpc_cfg = _parse_mpc(doc["mpc"], system) if "mpc" in doc else None
    mc_cfg = _parse_montecarlo(doc["montecarlo"]) if "montecarlo" in doc else None

    return Scenario(
        system=system,
        chief0=chief0,
        deputy0=d0,
        deputy_f=df,
        window=window,
        n_grid_steps=int(win_tab.get("n_grid_steps", 1000)),
        strategy=strategy,
        solver_cfg=solver_cfg,
        mpc_cfg=mpc_cfg,
        mc_cfg=mc_cfg,
        name=str(doc.get("name", name)),
    )


def load_scenario(path, system: Optional[Cr3bpSystem] = None) -> Scenario:
    """Parse and validate a scenario file."""
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path} is not valid TOML: {exc}") from exc
    return scenario_from_dict(doc, system=system, name=str(path))


def bundled_scenario_path(name):
    if name not in BUNDLED_SCENARIOS:
        raise ScenarioError(f"no bundled scenario named '{name}'", key=name)
    return str(resources.files("haloplan").joinpath(f"scenarios/{name}.toml"))


def load_bundled(name, system: Optional[Cr3bpSystem] = None) -> Scenario:
    return load_scenario(bundled_scenario_path(name), system=system)
