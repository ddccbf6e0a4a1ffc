"""Frustrated F-AF spin chains: ground states, chirality walls and their continuum limits."""

from .continuum import (
    EquivalenceReport,
    GridFunction,
    continuum_F0,
    equivalence_report,
    interface_cost,
    minimize_functional,
    mm_energy_G,
    mm_energy_H,
)
from .crease import crease_energy, crease_sweep, fit_asymptotics
from .errors import CostGuard, DomainViolation, InvalidArgument, ScalingUndefined, SingularPoint
from .ground_state import (
    Init,
    MinimizeOptions,
    PinSet,
    brute_force_minimum,
    chirality_profile,
    minimize_constrained,
    minimize_periodic,
)
from .model import (
    AngleChain,
    SpinChain,
    angles_from_spins,
    derive_constants,
    energy_angles,
    energy_spins,
    potential_lower_bound,
    scaled_energy,
    spins_from_angles,
)
from .scaling import classify_regime, l_value, min_scaled_energy, phase_diagram, regime_limit_energy

__version__ = "0.1.0"
