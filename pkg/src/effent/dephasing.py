"""Exact pure-dephasing map: populations frozen, coherences damped."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import CONSTANTS
from .phonons import CoherencePair, DephasingProfile
from .states import TwoQubitState, concurrence


def _level_energies(detuning: float) -> np.ndarray:
    # rotating frame at the mean transition energy: eps_1 = +D/2, eps_2 = -D/2
    occ = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    return occ @ np.array([0.5 * detuning, -0.5 * detuning])


def coherence_factors(profile: DephasingProfile, t: float, detuning: float = 0.0) -> np.ndarray:
    """4x4 matrix of multiplicative factors, ones on the diagonal."""
    energies = _level_energies(detuning)
    factors = np.ones((4, 4), dtype=complex)
    for pair in CoherencePair:
        i, j = pair.indices
        phase = profile.phase_at(pair, t) - (energies[i] - energies[j]) * t / CONSTANTS.hbar
        f = np.exp(-profile.gamma_at(pair, t) + 1j * phase)
        factors[i, j] = f
        factors[j, i] = np.conj(f)
    return factors


def evolve(rho0: TwoQubitState, profile: DephasingProfile, t: float, detuning: float = 0.0) -> TwoQubitState:
    """State at time ``t``; Gamma is linearly interpolated between profile samples."""
    m = rho0.matrix * coherence_factors(profile, t, detuning)
    return TwoQubitState(m)


@dataclass(frozen=True)
class EvolutionSeries:
    times: np.ndarray
    states: tuple
    profile: DephasingProfile
    temperature: float

    def __len__(self):
        return len(self.states)

    def concurrences(self) -> np.ndarray:
        return np.array([concurrence(s) for s in self.states])


def evolve_series(rho0: TwoQubitState, profile: DephasingProfile, detuning: float = 0.0) -> EvolutionSeries:
    states = tuple(evolve(rho0, profile, t, detuning) for t in profile.times)
    return EvolutionSeries(profile.times.copy(), states, profile, profile.temperature)
