"""Physical constants, GaAs/InGaAs parameters and the TOML run configuration.

Internal units are nm, ps, meV and K. The crystal density is kept in kg/m^3
(the unit people quote) and converted on access.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import asdict, dataclass, field, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

HBAR = 0.6582119569  # meV ps
KB = 0.0861733326  # meV / K

MEV_PER_J = 6.241509074e21
PS_PER_S = 1e12
NM_PER_M = 1e9
# 1 kg/m^3 = 1 J s^2 m^-5 expressed in meV ps^2 nm^-5
KG_PER_M3 = MEV_PER_J * PS_PER_S**2 / NM_PER_M**5

SCHEMA_VERSION = 1
CONFIG_ENV_VAR = "EFFENT_CONFIG"


class ConfigError(ValueError):
    """Malformed or invalid configuration. ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR
    kB: float = KB
    mass_density_factor: float = KG_PER_M3


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class MaterialParams:
    sigma_e: float = 8000.0  # meV
    sigma_h: float = -1000.0  # meV
    c_sound: float = 5.1  # nm/ps
    density_kg_m3: float = 5360.0

    @property
    def rho_density(self) -> float:
        """Crystal density in meV ps^2 nm^-5."""
        return self.density_kg_m3 * KG_PER_M3

    def validate(self) -> None:
        _positive(self, "c_sound", "material")
        _positive(self, "density_kg_m3", "material")
        for name in ("sigma_e", "sigma_h"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"material.{name} must be finite", f"material.{name}")
        if self.sigma_e == self.sigma_h:
            warnings.warn(
                "sigma_e == sigma_h: the long-wavelength coupling vanishes identically",
                stacklevel=2,
            )


@dataclass(frozen=True)
class DotGeometry:
    d_sep: float = 6.0  # nm
    l_e: float = 4.4
    l_h: float = 3.6
    l_z: float = 1.0

    def validate(self) -> None:
        for f in fields(self):
            _positive(self, f.name, "geometry")


@dataclass(frozen=True)
class TimeGrid:
    start: float = 0.0  # ps
    stop: float = 5.0
    step: float = 0.01

    def validate(self) -> None:
        _positive(self, "step", "time")
        if not (self.start >= 0):
            raise ConfigError("time.start must be >= 0", "time.start")
        if not (self.stop >= self.start):
            raise ConfigError("time.stop must be >= time.start", "time.stop")

    def points(self):
        import numpy as np

        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n)


@dataclass(frozen=True)
class QuadratureParams:
    n_perp: int = 128  # node floor per axis
    n_z: int = 128
    cutoff_multiplier: float = 8.0  # K_max = multiplier / min(l_e, l_h, l_z)
    points_per_oscillation: float = 4.0
    rel_tol: float = 1e-6  # grid-doubling convergence threshold

    def validate(self) -> None:
        for name in ("n_perp", "n_z"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 16:
                raise ConfigError(f"quadrature.{name} must be an integer >= 16", f"quadrature.{name}")
        if not self.cutoff_multiplier >= 5:
            raise ConfigError("quadrature.cutoff_multiplier must be >= 5", "quadrature.cutoff_multiplier")
        _positive(self, "points_per_oscillation", "quadrature")
        _positive(self, "rel_tol", "quadrature")


@dataclass(frozen=True)
class SimulationConfig:
    material: MaterialParams = field(default_factory=MaterialParams)
    geometry: DotGeometry = field(default_factory=DotGeometry)
    time: TimeGrid = field(default_factory=TimeGrid)
    quadrature: QuadratureParams = field(default_factory=QuadratureParams)
    # not given in the source; an exploration choice
    temperatures: tuple[float, ...] = (1.0, 10.0, 40.0, 100.0)
    detuning: float = 0.0  # eps_1 - eps_2, meV
    include_phonon_phase: bool = False
    seed: int = 0

    def validate(self) -> "SimulationConfig":
        self.material.validate()
        self.geometry.validate()
        self.time.validate()
        self.quadrature.validate()
        for T in self.temperatures:
            if not (isinstance(T, (int, float)) and T >= 0 and math.isfinite(T)):
                raise ConfigError(f"temperatures must be finite and >= 0, got {T!r}", "run.temperatures")
        if not math.isfinite(self.detuning):
            raise ConfigError("run.detuning must be finite", "run.detuning")
        if not isinstance(self.include_phonon_phase, bool):
            raise ConfigError("run.include_phonon_phase must be a boolean", "run.include_phonon_phase")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("run.seed must be a non-negative integer", "run.seed")
        return self


def _positive(obj, name: str, section: str) -> None:
    v = getattr(obj, name)
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise ConfigError(f"{section}.{name} must be > 0, got {v!r}", f"{section}.{name}")


def default_gaas() -> SimulationConfig:
    """GaAs/InGaAs stacked-dot parameters with the default run settings."""
    return SimulationConfig().validate()


# TOML section -> (config attribute, dataclass)
_SECTIONS = {
    "material": ("material", MaterialParams),
    "geometry": ("geometry", DotGeometry),
    "time": ("time", TimeGrid),
    "quadrature": ("quadrature", QuadratureParams),
}
_RUN_KEYS = ("temperatures", "detuning", "include_phonon_phase", "seed")
_FLOAT_FIELDS = {"sigma_e", "sigma_h", "c_sound", "density_kg_m3", "d_sep", "l_e", "l_h", "l_z",
                 "start", "stop", "step", "cutoff_multiplier", "points_per_oscillation", "rel_tol"}


def load_config(text: str) -> SimulationConfig:
    """Parse a TOML document; omitted keys take their ``default_gaas`` values."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc

    version = doc.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}", "schema_version")

    base = SimulationConfig()
    updates = {}
    for section, (attr, cls) in _SECTIONS.items():
        table = doc.pop(section, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table", section)
        known = {f.name for f in fields(cls)}
        for key, value in table.items():
            if key not in known:
                raise ConfigError(f"unknown key {section}.{key}", f"{section}.{key}")
            if key in _FLOAT_FIELDS and isinstance(value, int) and not isinstance(value, bool):
                table[key] = float(value)
        updates[attr] = replace(getattr(base, attr), **table)

    run = doc.pop("run", {})
    if not isinstance(run, dict):
        raise ConfigError("[run] must be a table", "run")
    for key, value in run.items():
        if key not in _RUN_KEYS:
            raise ConfigError(f"unknown key run.{key}", f"run.{key}")
        if key == "temperatures":
            if not isinstance(value, list):
                raise ConfigError("run.temperatures must be a list", "run.temperatures")
            value = tuple(float(t) if isinstance(t, int) and not isinstance(t, bool) else t for t in value)
        elif key == "detuning" and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        updates[key] = value

    if doc:
        key = next(iter(doc))
        raise ConfigError(f"unknown top-level key {key!r}", key)
    return replace(base, **updates).validate()


def load_config_file(path=None) -> SimulationConfig:
    """Load from ``path``, else from ``$EFFENT_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return default_gaas()
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def dump_config(config: SimulationConfig) -> str:
    """Serialize to the TOML schema accepted by :func:`load_config`."""
    out = [f"schema_version = {SCHEMA_VERSION}", ""]
    for section, (attr, _) in _SECTIONS.items():
        out.append(f"[{section}]")
        for key, value in asdict(getattr(config, attr)).items():
            out.append(f"{key} = {_fmt(value)}")
        out.append("")
    out.append("[run]")
    for key in _RUN_KEYS:
        out.append(f"{key} = {_fmt(getattr(config, key))}")
    return "\n".join(out) + "\n"


# --- dimensional audit -------------------------------------------------------
# exponents over (meV, ps, nm)
DIMENSIONS = {
    "sigma": (1, 0, 0),
    "hbar": (1, 1, 0),
    "k": (0, 0, -1),
    "rho_density": (1, 2, -5),
    "c_sound": (0, -1, 1),
    "d3k": (0, 0, -3),
}


def dim_product(*terms: tuple[str, int]) -> tuple[int, int, int]:
    total = [0, 0, 0]
    for name, power in terms:
        for i, e in enumerate(DIMENSIONS[name]):
            total[i] += power * e
    return tuple(total)


def audit_dephasing_units() -> bool:
    """Check that ``[hbar sigma^2 k / (2 rho c)] / (hbar c k)^2 d^3k`` is dimensionless."""
    dims = dim_product(
        ("hbar", 1), ("sigma", 2), ("k", 1), ("rho_density", -1), ("c_sound", -1),
        ("hbar", -2), ("c_sound", -2), ("k", -2), ("d3k", 1),
    )
    return dims == (0, 0, 0)


if not audit_dephasing_units():  # pragma: no cover
    raise RuntimeError("unit system is inconsistent")
