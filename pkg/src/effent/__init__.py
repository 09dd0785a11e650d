"""Effective entanglement of a phonon-dephased double quantum dot under SET read-out."""

from .config import SimulationConfig, default_gaas, dump_config, load_config
from .dephasing import EvolutionSeries, evolve, evolve_series
from .effective import (
    ConstraintSet,
    MinimizationResult,
    brute_force_oracle,
    eff_full,
    eff_record,
    eff_xz,
    eff_z,
    maximize_ad_xz,
    min_concurrence,
    real_restrict,
)
from .measurement import (
    InfeasibleRecordError,
    MeasurementRecord,
    SetConfiguration,
    observe,
    reconstruct_diagonals,
    reconstruct_reh,
    record,
)
from .phonons import CoherencePair, DephasingProfile, PhononCoupling, build_profile
from .states import TwoQubitState, bell_state, concurrence, random_state, real_part

__version__ = "0.1.0"
