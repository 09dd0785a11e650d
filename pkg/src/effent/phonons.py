"""Exciton-phonon coupling and the exact pure-dephasing exponents.

Deformation-potential coupling of Gaussian exciton wave functions to
longitudinal acoustic phonons, ``omega_k = c |k|``. For a coherence between
basis states ``mu`` and ``nu`` the independent boson model gives

    rho_mu_nu(t) = rho_mu_nu(0) * exp(-Gamma(t) + i phi(t))

    Gamma(t) = sum_k |g_mu - g_nu|^2 / (hbar w)^2 (1 - cos wt) coth(hbar w / 2 kT)
    phi(t)   = sum_k [(|g_nu|^2 - |g_mu|^2) sin wt + 2 Im(g_nu^* g_mu)(1 - cos wt)] / (hbar w)^2

where ``g_mu`` is the total coupling of state ``mu`` (sum over occupied dots)
and the linear-in-time polaron shift has been absorbed into the transition
energies. Sums over modes become ``V/(2 pi)^3 int d^3k``; the volume cancels
against the ``1/V`` in ``|f_k|^2``. Integrals run in cylindrical coordinates
on a tensor Gauss-Legendre grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config import CONSTANTS, DotGeometry, MaterialParams, QuadratureParams, SimulationConfig


class QuadratureError(RuntimeError):
    """Doubling the quadrature grid moved the result by more than the tolerance."""


class CoherencePair(enum.Enum):
    P00_01 = ("00", "01")
    P00_10 = ("00", "10")
    P00_11 = ("00", "11")
    P01_10 = ("01", "10")
    P01_11 = ("01", "11")
    P10_11 = ("10", "11")

    @property
    def label(self) -> str:
        return f"{self.value[0]}-{self.value[1]}"

    @property
    def indices(self) -> tuple[int, int]:
        return int(self.value[0], 2), int(self.value[1], 2)

    @classmethod
    def from_label(cls, label: str) -> "CoherencePair":
        for pair in cls:
            if pair.label == label:
                return pair
        raise ValueError(f"unknown coherence pair {label!r}")


SINGLE_PAIRS = (CoherencePair.P00_01, CoherencePair.P00_10, CoherencePair.P01_11, CoherencePair.P10_11)


@dataclass(frozen=True)
class SpectralGrid:
    """Tensor Gauss-Legendre nodes for ``k_perp in [0, K]`` and ``k_z``.

    With ``symmetric=False`` the ``k_z`` nodes cover ``[0, K]`` and even
    integrands are doubled; with ``symmetric=True`` they cover ``[-K, K]``.
    """

    k_perp: np.ndarray
    w_perp: np.ndarray
    k_z: np.ndarray
    w_z: np.ndarray
    cutoff: float
    symmetric: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.k_perp), len(self.k_z)

    def doubled(self) -> "SpectralGrid":
        n_perp, n_z = self.shape
        if self.symmetric:
            n_z //= 2
        return make_grid(self.cutoff, 2 * n_perp, 2 * n_z, symmetric=self.symmetric)


def _gauss_legendre(n: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def make_grid(cutoff: float, n_perp: int, n_z: int, *, symmetric: bool = False) -> SpectralGrid:
    kp, wp = _gauss_legendre(n_perp, 0.0, cutoff)
    if symmetric:
        kz, wz = _gauss_legendre(2 * n_z, -cutoff, cutoff)
    else:
        kz, wz = _gauss_legendre(n_z, 0.0, cutoff)
    return SpectralGrid(kp, wp, kz, wz, cutoff, symmetric)


def grid_for(config: SimulationConfig, t_max: float | None = None, *, symmetric: bool = False) -> SpectralGrid:
    """Grid sized to resolve ``cos(c k t)`` up to ``t_max`` (defaults to the time grid end)."""
    q = config.quadrature
    g = config.geometry
    cutoff = q.cutoff_multiplier / min(g.l_e, g.l_h, g.l_z)
    if t_max is None:
        t_max = config.time.stop
    n_osc = q.points_per_oscillation * t_max * config.material.c_sound * cutoff / (2 * math.pi)
    need = int(math.ceil(n_osc))
    return make_grid(cutoff, max(q.n_perp, need), max(q.n_z, need), symmetric=symmetric)


def _occupations(state: str) -> tuple[int, int]:
    return int(state[0]), int(state[1])


class PhononCoupling:
    """Exciton-phonon coupling of two stacked dots separated by ``d_sep`` along z."""

    def __init__(self, material: MaterialParams | None = None, geometry: DotGeometry | None = None,
                 constants=CONSTANTS):
        self.material = material or MaterialParams()
        self.geometry = geometry or DotGeometry()
        self.constants = constants

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "PhononCoupling":
        return cls(config.material, config.geometry)

    def form_factor_sq(self, k_perp, k_z):
        """``|f_k|^2 V`` in meV^2 nm^3."""
        m, g = self.material, self.geometry
        k_perp = np.asarray(k_perp, dtype=float)
        k_z = np.asarray(k_z, dtype=float)
        k = np.hypot(k_perp, k_z)
        kp2 = k_perp**2
        bracket = m.sigma_e * np.exp(-g.l_e**2 * kp2 / 4) - m.sigma_h * np.exp(-g.l_h**2 * kp2 / 4)
        pref = self.constants.hbar * k / (2 * m.rho_density * m.c_sound)
        return pref * np.exp(-g.l_z**2 * k_z**2 / 2) * bracket**2

    def state_phase_factor(self, state: str, k_z):
        """Coupling of basis state ``state`` in units of ``f_k``: ``n1 e^{i kz d/2} + n2 e^{-i kz d/2}``."""
        n1, n2 = _occupations(state)
        half = 0.5 * self.geometry.d_sep * np.asarray(k_z, dtype=float)
        return n1 * np.exp(1j * half) + n2 * np.exp(-1j * half)

    def pair_weight(self, pair: CoherencePair, k_perp, k_z):
        """``|g_mu - g_nu|^2 V`` for the pair."""
        mu, nu = pair.value
        diff = self.state_phase_factor(mu, k_z) - self.state_phase_factor(nu, k_z)
        return self.form_factor_sq(k_perp, k_z) * np.abs(diff) ** 2

    def _mesh(self, grid: SpectralGrid):
        kp, kz = np.meshgrid(grid.k_perp, grid.k_z, indexing="ij")
        # d^3k/(2 pi)^3 = 2 pi k_perp dk_perp dk_z / (2 pi)^3
        w = np.outer(grid.w_perp * grid.k_perp, grid.w_z) / (2 * math.pi) ** 2
        if not grid.symmetric:
            w = 2.0 * w
        omega = self.material.c_sound * np.hypot(kp, kz)
        return kp, kz, w, omega

    def _time_sum(self, amplitude, omega, times, kernel) -> np.ndarray:
        amp = amplitude.ravel()
        om = omega.ravel()
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty(times.shape)
        for i, t in enumerate(times):
            out[i] = np.dot(amp, kernel(om * t))
        return out

    def dephasing_exponent(self, pair: CoherencePair, t, T: float, grid: SpectralGrid):
        """Decoherence exponent Gamma(t) at temperature ``T`` (K); scalar or array in ``t``."""
        if np.any(np.asarray(t) < 0) or T < 0:
            raise ValueError("t and T must be non-negative")
        amp = self._gamma_amplitude(pair, T, grid)
        _, _, _, omega = self._mesh(grid)
        out = self._time_sum(amp, omega, t, lambda x: 1.0 - np.cos(x))
        return out if np.ndim(t) else float(out[0])

    def _gamma_amplitude(self, pair, T, grid):
        kp, kz, w, omega = self._mesh(grid)
        energy = self.constants.hbar * omega
        amp = self.pair_weight(pair, kp, kz) / energy**2 * w
        if T > 0:
            amp = amp / np.tanh(energy / (2 * self.constants.kB * T))
        return amp

    def phase_exponent(self, pair: CoherencePair, t, grid: SpectralGrid):
        """Phonon-induced phase phi(t) (radians), polaron shift removed."""
        if np.any(np.asarray(t) < 0):
            raise ValueError("t must be non-negative")
        if not grid.symmetric:
            # the cross term is odd in k_z, so the half-range trick does not apply
            n_perp, n_z = grid.shape
            grid = make_grid(grid.cutoff, n_perp, n_z, symmetric=True)
        kp, kz, w, omega = self._mesh(grid)
        mu, nu = pair.value
        f2 = self.form_factor_sq(kp, kz) * w / (self.constants.hbar * omega) ** 2
        phi_mu = self.state_phase_factor(mu, kz)
        phi_nu = self.state_phase_factor(nu, kz)
        sin_amp = f2 * (np.abs(phi_nu) ** 2 - np.abs(phi_mu) ** 2)
        cos_amp = 2.0 * f2 * np.imag(np.conj(phi_nu) * phi_mu)
        out = self._time_sum(sin_amp, omega, t, np.sin) + self._time_sum(cos_amp, omega, t, lambda x: 1.0 - np.cos(x))
        return out if np.ndim(t) else float(out[0])


@dataclass
class DephasingProfile:
    """Gamma(t) (and optionally phi(t)) for all six coherences at one temperature."""

    temperature: float
    times: np.ndarray
    gamma: dict = field(default_factory=dict)
    phase: dict | None = None
    max_rel_change: float = 0.0

    def _interp(self, values, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        eps = 1e-12 * max(1.0, abs(hi))
        if np.any(t < lo - eps) or np.any(t > hi + eps):
            raise ValueError(f"time outside profile grid [{lo}, {hi}] ps")
        return np.interp(t, self.times, values)

    def gamma_at(self, pair: CoherencePair, t):
        out = self._interp(self.gamma[pair], t)
        return float(out) if np.ndim(out) == 0 else out

    def phase_at(self, pair: CoherencePair, t):
        if self.phase is None:
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        out = self._interp(self.phase[pair], t)
        return float(out) if np.ndim(out) == 0 else out


def _relative_change(coarse, fine, floor=1e-12) -> float:
    scale = np.maximum(np.abs(fine), floor)
    return float(np.max(np.abs(coarse - fine) / scale)) if np.size(fine) else 0.0


def build_profile(config: SimulationConfig, T: float, *, times=None, check: bool = True) -> DephasingProfile:
    """Sample all six Gamma curves (and phases if enabled) on the time grid.

    With ``check`` the whole profile is recomputed on a doubled grid and a
    :class:`QuadratureError` is raised if any sample moves by more than
    ``quadrature.rel_tol`` (relative, with a 1e-12 absolute floor).
    """
    coupling = PhononCoupling.from_config(config)
    times = config.time.points() if times is None else np.asarray(times, dtype=float)
    grid = grid_for(config, float(times.max()) if times.size else 0.0)

    # the four single-exciton coherences share one curve
    distinct = {CoherencePair.P00_01: SINGLE_PAIRS, CoherencePair.P00_11: (CoherencePair.P00_11,),
                CoherencePair.P01_10: (CoherencePair.P01_10,)}
    gamma = {}
    worst = 0.0
    for rep, members in distinct.items():
        g = coupling.dephasing_exponent(rep, times, T, grid)
        if check:
            g2 = coupling.dephasing_exponent(rep, times, T, grid.doubled())
            worst = max(worst, _relative_change(g, g2))
        for pair in members:
            gamma[pair] = g.copy()

    phase = None
    if config.include_phonon_phase:
        phase = {pair: coupling.phase_exponent(pair, times, grid) for pair in CoherencePair}

    if check and worst > config.quadrature.rel_tol:
        raise QuadratureError(
            f"Gamma changed by {worst:.3e} (relative) under grid doubling at T={T} K"
        )
    return DephasingProfile(float(T), times, gamma, phase, worst)
