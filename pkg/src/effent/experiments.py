"""Grid scans behind the three figure families, plus per-stage CSV dumps.

Every scan returns ``(header, rows)``; :func:`write_csv` renders them with
17 significant digits so equal inputs give byte-identical files. Scan cells
run in a process pool when ``threads > 1`` and are gathered in grid order;
per-cell minimizer seeds derive from ``(seed, i, j)`` so the worker count
never changes a result.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import SimulationConfig
from .dephasing import evolve, evolve_series
from .effective import eff_full, eff_record, eff_xz, eff_z
from .measurement import RANGES, InfeasibleRecordError, MeasurementRecord, observe
from .phonons import CoherencePair, build_profile
from .states import TwoQubitState, bell_state, concurrence

FIG3_HEADER = ("T_K", "t_ps", "z", "effent", "physical_concurrence")


@dataclass(frozen=True)
class ScanSpec:
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.n < 1 or not self.hi >= self.lo:
            raise ValueError(f"bad grid {self}")

    def points(self) -> np.ndarray:
        if self.n == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.n)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(header, rows, fh=None) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def _run_cells(func, cells, threads: int):
    if threads <= 1 or len(cells) < 2:
        return [func(c) for c in cells]
    chunk = max(1, len(cells) // (8 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, cells, chunksize=chunk))


def _clean(v: float) -> float:
    # values at the 1e-16 level are rounding noise of the zero branch
    return 0.0 if abs(v) < 1e-15 else v


# --- fig1 ----------------------------------------------------------------------

def _fig1_cell(args):
    a, b, c, seed, ij, opts = args
    d = 1.0 - a - b - c
    reh = math.sqrt(b * c)
    if d < -1e-12:
        return a, b, c, d, reh, None
    d = max(d, 0.0)
    res = eff_full(a, b, c, d, reh, seed=[seed, *ij], **opts)
    return a, b, c, d, reh, _clean(res.value)


def run_fig1(a: float, b_grid: ScanSpec = ScanSpec(0, 1, 101), c_grid: ScanSpec | None = None, *,
             seed: int = 0, threads: int = 1, **opts):
    """Coherent states ``Re h = sqrt(bc)`` with all occupations known, over ``(b, c)`` at fixed ``a``."""
    if not 0 <= a < 1:
        raise ValueError("a must lie in [0, 1)")
    c_grid = c_grid or b_grid
    cells = [(a, float(b), float(c), seed, (i, j), opts)
             for i, b in enumerate(b_grid.points()) for j, c in enumerate(c_grid.points())]
    return ("a", "b", "c", "d", "reh", "effent"), _run_cells(_fig1_cell, cells, threads)


# --- fig2 ----------------------------------------------------------------------

def _fig2_cell(args):
    x, z, seed, ij, opts = args
    try:
        res = eff_xz(x, z, seed=[seed, *ij], **opts)
    except InfeasibleRecordError:
        return x, z, None
    return x, z, _clean(res.value)


def run_fig2(x_grid: ScanSpec = ScanSpec(0, 1, 101), z_grid: ScanSpec = ScanSpec(0, 2, 101), *,
             seed: int = 0, threads: int = 1, **opts):
    """Effective entanglement from ``x`` and ``z`` alone; infeasible cells have an empty value."""
    cells = [(float(x), float(z), seed, (i, j), opts)
             for i, x in enumerate(x_grid.points()) for j, z in enumerate(z_grid.points())]
    return ("x", "z", "effent"), _run_cells(_fig2_cell, cells, threads)


# --- fig3 ----------------------------------------------------------------------

def _fig3_temperature(args):
    config, T = args
    profile = build_profile(config, T)
    rho0 = bell_state("+")
    rows = []
    for t in profile.times:
        rho = evolve(rho0, profile, t, config.detuning)
        z = observe(rho, "z")
        rows.append((T, float(t), z, _clean(eff_z(z).value), concurrence(rho)))
    return rows


def run_fig3(config: SimulationConfig, temperatures=None, *, threads: int = 1):
    """Dephasing of ``|+>`` read by the midpoint SET only, one block per temperature."""
    temps = config.temperatures if temperatures is None else tuple(temperatures)
    blocks = _run_cells(_fig3_temperature, [(config, float(T)) for T in temps], threads)
    return FIG3_HEADER, [row for block in blocks for row in block]


def run_fig3_inset(z_grid: ScanSpec = ScanSpec(0, 2, 201)):
    return ("z", "effent"), [(float(z), _clean(eff_z(float(z)).value)) for z in z_grid.points()]


# --- stage dumps ---------------------------------------------------------------

def run_gamma(config: SimulationConfig, temperatures=None):
    temps = config.temperatures if temperatures is None else tuple(temperatures)
    rows = []
    for T in temps:
        profile = build_profile(config, float(T))
        for k, t in enumerate(profile.times):
            for pair in CoherencePair:
                phase = profile.phase[pair][k] if profile.phase is not None else 0.0
                rows.append((float(t), pair.label, profile.gamma[pair][k], phase, float(T)))
    return ("t_ps", "pair", "gamma", "phase", "T_K"), rows


EVOLVE_HEADER = ("t_ps", "T_K", "a", "b", "c", "d", "re_h", "im_h", "re_g", "im_g", "concurrence")


def run_evolve(config: SimulationConfig, rho0: TwoQubitState, temperatures=None):
    temps = config.temperatures if temperatures is None else tuple(temperatures)
    rows = []
    last = None
    for T in temps:
        series = evolve_series(rho0, build_profile(config, float(T)), config.detuning)
        for t, rho in zip(series.times, series.states):
            rows.append((float(t), float(T), *rho.diagonals, rho.h.real, rho.h.imag,
                         rho.g.real, rho.g.imag, concurrence(rho)))
            last = rho
    return EVOLVE_HEADER, rows, last


def project_feasible(setup: str, values: dict) -> MeasurementRecord:
    """Clip raw record values into the set some physical state can produce."""
    vals = {k: min(max(v, RANGES[k][0]), RANGES[k][1]) for k, v in values.items()}
    if setup == "xz":
        x = vals["x"]
        vals["z"] = min(vals["z"], 1.0 + 2.0 * math.sqrt(x * (1.0 - x)))
    elif setup == "full":
        x, y, d = vals["x"], vals["y"], vals["d"]
        # occupations (x+y+d-1, 1-y-d, 1-x-d, d) must be non-negative
        d = min(d, 1.0 - x, 1.0 - y)
        d = max(d, 1.0 - x - y, 0.0)
        vals["d"] = d
        b, c = 1.0 - y - d, 1.0 - x - d
        reh_max = math.sqrt(max(b * c, 0.0))
        base = 0.5 * (x + y) + d - 1.0
        # Re h = base + z/2 must lie within +-sqrt(bc)
        vals["z"] = min(max(vals["z"], 2.0 * (-reh_max - base)), 2.0 * (reh_max - base))
        vals["z"] = min(max(vals["z"], 0.0), 2.0)
    return MeasurementRecord(vals, setup)


def run_effent(records, *, seed: int = 0, **opts):
    """Evaluate each record; returns the result rows ``value, method, converged, residual``."""
    rows = []
    for k, rec in enumerate(records):
        res = eff_record(rec, seed=[seed, k], **opts)
        rows.append((res.value, res.method, res.converged, res.max_violation, res))
    return rows
