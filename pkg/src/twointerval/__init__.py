"""Selfadjoint momentum operators on two intervals [0,1] u [alpha,beta]."""

from .core import BoundaryParams, GridFunction, IntervalPair, PiecewiseExp, e, inner_product
from .errors import DomainError, SolverError, StructuralError, WrongPathError
from .moebius import LiftFunction, lift_g, moebius
from .pairs import (
    build_char_polynomial,
    classify_pair,
    gram_matrix,
    roots_on_unit_circle,
    spectral_set_criterion,
    tiles_with,
)
from .spectrum import (
    closed_form_w0,
    closed_form_w1,
    lattice_decomposition,
    master_residual,
    separation_delta,
    solve_branch,
    spectrum,
)
from .evolution import WaveState, check_translation, check_transition_probabilities, evolve, expand

__version__ = "0.1.0"
