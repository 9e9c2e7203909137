"""Wiener-Hopf factors, passage transforms and the perpetual American put for
Levy processes with phase-type jumps."""

from .errors import (
    LevyError,
    ModelClassError,
    NotOptimalToStopError,
    PoleError,
    StructureError,
    UnsupportedLimitError,
    ValidationError,
)
from .models import (
    JumpComponent,
    LevyModel,
    PhaseType,
    char_exponent,
    classify_regularity,
    laplace_exponent,
    log_mgf,
)
from .wiener_hopf import (
    ExpMixture,
    RationalFactor,
    inf_law,
    minus_factor,
    phase_type_roots,
    phi_of_alpha,
    scale_function,
    wiener_hopf_factors,
)
from .passage import PassageQuery, down_passage_transform, up_passage_transform
from .american import PutProblem, optimal_threshold, value_function
from .montecarlo import Estimate, SimConfig

__version__ = "0.1.0"
