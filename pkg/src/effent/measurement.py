"""Idealized SET read-out of the double dot.

Each SET configuration is a pair of projectors (P_n, P_e). The observables
are expectation values of fixed Hermitian operators built from them:

    x = Tr(P_n rho)   configuration A, SET by the lower dot
    y = Tr(P_n rho)   configuration A, SET by the upper dot
    z = 2 Tr(P_e rho) configuration B, P_e = |+><+|
    d = Tr(P_e rho)   configuration C, P_e = |11><11|
    a = Tr(P_e rho)   configuration C (vacuum mode), P_e = |00><00|
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .states import TwoQubitState

FEASIBILITY_TOL = 1e-12
PSD_BLOCK_TOL = 1e-10

OBSERVABLES = ("x", "y", "z", "d", "a")
RANGES = {"x": (0.0, 1.0), "y": (0.0, 1.0), "z": (0.0, 2.0), "d": (0.0, 1.0), "a": (0.0, 1.0)}
SETUPS = {
    "full": ("x", "y", "z", "d"),
    "xz": ("x", "z"),
    "z_only": ("z",),
}


class InfeasibleRecordError(ValueError):
    """No physical state reproduces the measured values."""


def _ket(label: str) -> np.ndarray:
    v = np.zeros(4)
    v[int(label, 2)] = 1.0
    return v


def _proj(*vectors) -> np.ndarray:
    return sum(np.outer(v, v) for v in vectors)


_ZERO = np.diag([1.0, 0.0])
_ONE = np.diag([0.0, 1.0])
_PLUS = (_ket("01") + _ket("10")) / math.sqrt(2)
_MINUS = (_ket("01") - _ket("10")) / math.sqrt(2)


class SetConfiguration(enum.Enum):
    A_LOWER = "A_lower"
    A_UPPER = "A_upper"
    B_MIDPOINT = "B_midpoint"
    C_EXCITON_COUNT = "C_exciton_count"
    C_VACUUM = "C_vacuum"

    @property
    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        """``(P_n, P_e)`` as real 4x4 matrices."""
        if self is SetConfiguration.A_LOWER:
            return np.kron(_ZERO, np.eye(2)), np.kron(_ONE, np.eye(2))
        if self is SetConfiguration.A_UPPER:
            return np.kron(np.eye(2), _ZERO), np.kron(np.eye(2), _ONE)
        if self is SetConfiguration.B_MIDPOINT:
            return _proj(_MINUS), _proj(_PLUS)
        if self is SetConfiguration.C_EXCITON_COUNT:
            return _proj(_PLUS, _MINUS, _ket("00")), _proj(_ket("11"))
        return _proj(_PLUS, _MINUS, _ket("11")), _proj(_ket("00"))

    @property
    def observable(self) -> str:
        return _CONFIG_OBSERVABLE[self]


_CONFIG_OBSERVABLE = {
    SetConfiguration.A_LOWER: "x",
    SetConfiguration.A_UPPER: "y",
    SetConfiguration.B_MIDPOINT: "z",
    SetConfiguration.C_EXCITON_COUNT: "d",
    SetConfiguration.C_VACUUM: "a",
}
_OBSERVABLE_CONFIG = {v: k for k, v in _CONFIG_OBSERVABLE.items()}


def observable_operator(name: str) -> np.ndarray:
    """Hermitian ``M`` with ``Tr(M rho)`` equal to the named observable."""
    config = _OBSERVABLE_CONFIG[name]
    p_n, p_e = config.projectors
    if name in ("x", "y"):
        return p_n
    if name == "z":
        return 2.0 * p_e
    return p_e


def observe_elements(rho: TwoQubitState, name: str) -> float:
    """Observable from named matrix elements (independent of the projector route)."""
    a, b, c, d = rho.diagonals
    if name == "x":
        return a + b
    if name == "y":
        return a + c
    if name == "z":
        return b + c + 2.0 * rho.h.real
    if name == "d":
        return d
    if name == "a":
        return a
    raise KeyError(name)


def observe(rho: TwoQubitState, config) -> float:
    """Expectation value read by ``config`` (a SetConfiguration or observable name)."""
    name = config.observable if isinstance(config, SetConfiguration) else config
    return float(np.real(np.trace(observable_operator(name) @ rho.matrix)))


@dataclass(frozen=True)
class MeasurementRecord:
    values: dict = field(default_factory=dict)
    setup: str = "custom"

    def __post_init__(self):
        vals = {k: float(v) for k, v in self.values.items()}
        for k, v in vals.items():
            if k not in RANGES:
                raise ValueError(f"unknown observable {k!r}")
            lo, hi = RANGES[k]
            if not (lo - FEASIBILITY_TOL <= v <= hi + FEASIBILITY_TOL):
                raise InfeasibleRecordError(f"{k}={v!r} outside [{lo}, {hi}]")
        if self.setup in SETUPS:
            if set(vals) != set(SETUPS[self.setup]):
                raise ValueError(f"setup {self.setup!r} needs exactly {SETUPS[self.setup]}, got {sorted(vals)}")
        elif self.setup != "custom":
            raise ValueError(f"unknown setup {self.setup!r}")
        object.__setattr__(self, "values", {k: vals[k] for k in OBSERVABLES if k in vals})

    def __getitem__(self, key):
        return self.values[key]

    def to_csv_line(self) -> str:
        cells = [self.setup] + [repr(self.values[k]) if k in self.values else "" for k in OBSERVABLES]
        return ",".join(cells)

    @classmethod
    def from_csv_line(cls, line: str) -> "MeasurementRecord":
        """Parse ``setup,x,y,z,d,a`` with empty cells for unmeasured observables."""
        setup, values = parse_record_line(line)
        return cls(values, setup)


def parse_record_line(line: str) -> tuple[str, dict]:
    """Split a record line into its setup label and raw (unvalidated) values."""
    cells = [c.strip() for c in line.strip().split(",")]
    if len(cells) != 6:
        raise ValueError(f"expected 6 comma-separated fields, got {len(cells)}")
    return cells[0], {k: float(v) for k, v in zip(OBSERVABLES, cells[1:]) if v != ""}


def record(rho: TwoQubitState, setup: str) -> MeasurementRecord:
    if setup not in SETUPS:
        raise ValueError(f"unknown setup {setup!r}")
    return MeasurementRecord({k: observe(rho, k) for k in SETUPS[setup]}, setup)


def _check_unit_interval(name, value, tol=FEASIBILITY_TOL):
    if not (-tol <= value <= 1 + tol):
        raise InfeasibleRecordError(f"reconstructed {name}={value!r} is not a probability")


def reconstruct_diagonals(x: float, y: float, d: float) -> tuple[float, float, float, float]:
    """Occupations ``(a, b, c, d)`` from the two A-type reads and the C-type read."""
    a = x + y + d - 1.0
    b = 1.0 - y - d
    c = 1.0 - x - d
    for name, v in zip("abcd", (a, b, c, d)):
        _check_unit_interval(name, v)
    return a, b, c, d


def reconstruct_reh(x: float, y: float, z: float, d: float) -> float:
    """``Re <01|rho|10>`` from the full record."""
    _, b, c, _ = reconstruct_diagonals(x, y, d)
    reh = 0.5 * (x + y + z) + d - 1.0
    if reh * reh > max(b, 0.0) * max(c, 0.0) + PSD_BLOCK_TOL:
        raise InfeasibleRecordError(f"Re h={reh!r} violates |h|^2 <= b c = {b * c!r}")
    return reh
