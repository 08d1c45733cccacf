"""System constants and unit conversions.

All internal computation is nondimensional (DU, TU, with the synodic rate
equal to one). Kilometers, km/s and hours appear only at I/O boundaries.
The Earth-Moon values ship in a versioned constants file so that every
reported number can be traced to a specific (mu, du, tu) triple.
"""

import os
import sys
from dataclasses import dataclass
from importlib import resources

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ScenarioError

ENV_CONSTANTS = "HALOPLAN_CONSTANTS"

_REQUIRED_KEYS = {"version", "mu", "du_km", "tu_s"}


@dataclass(frozen=True)
class Cr3bpSystem:
    """Mass parameter and characteristic units of a circular three-body system.

    Attributes
    ----------
    mu : float
        Dimensionless mass parameter, smaller primary over total (0 < mu < 0.5).
    du_km : float
        Distance unit in km (separation of the primaries).
    tu_s : float
        Time unit in seconds (inverse synodic rate).
    """

    mu: float
    du_km: float
    tu_s: float

    def __post_init__(self):
        if not (0.0 < self.mu < 0.5):
            raise ScenarioError(f"mu must be in (0, 0.5), got {self.mu}", key="mu")
        if self.du_km <= 0.0:
            raise ScenarioError(f"du_km must be positive, got {self.du_km}", key="du_km")
        if self.tu_s <= 0.0:
            raise ScenarioError(f"tu_s must be positive, got {self.tu_s}", key="tu_s")

    # -- unit conversions ---------------------------------------------------

    @property
    def vu_kmps(self):
        """Velocity unit in km/s."""
        return self.du_km / self.tu_s

    def km_to_du(self, x):
        return x / self.du_km

    def du_to_km(self, x):
        return x * self.du_km

    def kmps_to_duptu(self, v):
        return v * self.tu_s / self.du_km

    def duptu_to_kmps(self, v):
        return v * self.du_km / self.tu_s

    def hours_to_tu(self, h):
        return h * 3600.0 / self.tu_s

    def tu_to_hours(self, t):
        return t * self.tu_s / 3600.0

    def seconds_to_tu(self, s):
        return s / self.tu_s


def load_constants(path):
    """Read a {mu, du_km, tu_s} constants file (TOML key-value text)."""
    try:
        with open(path, "rb") as f:
            doc = tomllib.load(f)
    except OSError as exc:
        raise ScenarioError(f"cannot read constants file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"constants file {path} is not valid TOML: {exc}") from exc
    unknown = set(doc) - _REQUIRED_KEYS
    if unknown:
        raise ScenarioError(
            f"unknown key(s) in constants file: {sorted(unknown)}", key=sorted(unknown)[0]
        )
    missing = _REQUIRED_KEYS - set(doc)
    if missing:
        raise ScenarioError(
            f"missing key(s) in constants file: {sorted(missing)}", key=sorted(missing)[0]
        )
    return Cr3bpSystem(mu=float(doc["mu"]), du_km=float(doc["du_km"]), tu_s=float(doc["tu_s"]))


def default_constants_path():
    """Constants file from $HALOPLAN_CONSTANTS, else the bundled Earth-Moon file."""
    env = os.environ.get(ENV_CONSTANTS)
    if env:
        return env
    return str(resources.files("haloplan").joinpath("data/earth_moon.toml"))


def earth_moon():
    """The bundled Earth-Moon system (or the override from the environment)."""
    return load_constants(default_constants_path())
