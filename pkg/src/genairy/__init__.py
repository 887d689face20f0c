"""Resolvent and semigroup norms of generalized Airy operators ``-d/dx + W(x)``."""

__version__ = "0.1.0"

from .exceptions import (
    BelowThresholdError,
    BracketError,
    ConvergenceError,
    GenAiryError,
    IntegrationWarning,
    OverflowGuardError,
    PotentialSpecError,
    ResolutionError,
)
from .potential import (
    Family,
    Potential,
    ValidationReport,
    make_custom_potential,
    make_potential,
    parse_potential,
    validate_assumptions,
)
from .spectral import DELTA, SpectralProfile, f_lambda, laplace_integral, profile, turning_point
from .resolvent import (
    KernelDiscretization,
    ResolventEstimate,
    asymptotic_norm,
    closed_form_norm,
    discretize_kernel,
    estimate_resolvent,
    modulation_invariance_check,
    numeric_norm,
    resolvent_identity_check,
    schur_upper_bound,
    witness_lower_bound,
)
from .semigroup import SemigroupEstimate, apply_semigroup, norm_maximizer, semigroup_norm
from .applications import (
    LevelCurve,
    WeylFit,
    carleman_exponent_check,
    damped_wave_curve,
    quadratic_family_norm,
    schrodinger_imag_axis_curve,
    schrodinger_real_axis_curve,
    t_a_solve,
    weyl_fit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
