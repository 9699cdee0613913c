"""Asymptotics of quantum Markov processes as generalized Gibbs states.

The package finds the attractor space of a Kraus channel or Lindbladian,
builds a basis of constants of motion, and reconstructs asymptotic states
as minimizers of the relative entropy to the maximally mixed T-trajectory.
"""

from .attractors import (
    AttractorDecomposition,
    Trajectory,
    asymptotic_trajectory,
    decompose,
    maximally_mixed_trajectory,
    regime_time,
    t_state_and_projector,
)
from .jaynes import (
    FitResult,
    GibbsModel,
    entropy_report,
    fit,
    gibbs_state,
    log_partition,
    moment_map,
    reconstruct_known_state,
    reconstruct_partial,
    reconstruct_stationary,
    relative_entropy,
)
from .motion import ConstantOfMotion, MotionBasis, expectations, motion_basis
from .process import ProcessSpec, evolve, heisenberg_evolve, propagator, to_superoperator

__version__ = "0.1.0"

__all__ = [
    "AttractorDecomposition",
    "ConstantOfMotion",
    "FitResult",
    "GibbsModel",
    "MotionBasis",
    "ProcessSpec",
    "Trajectory",
    "asymptotic_trajectory",
    "decompose",
    "entropy_report",
    "evolve",
    "expectations",
    "fit",
    "gibbs_state",
    "heisenberg_evolve",
    "log_partition",
    "maximally_mixed_trajectory",
    "moment_map",
    "motion_basis",
    "propagator",
    "reconstruct_known_state",
    "reconstruct_partial",
    "reconstruct_stationary",
    "regime_time",
    "relative_entropy",
    "t_state_and_projector",
    "to_superoperator",
]
