"""Exact regularity analysis of multivariate refinable functions.

Given an expansive integer dilation matrix, a digit set, and a finitely
supported refinement mask, the package computes Hölder regularity in C
and in L_p, local exponents at specific points, modulus-of-continuity
log factors, directional differentiability, and subdivision convergence
rates — all through transition matrices, invariant subspaces, the joint
spectral radius, and p-radii.
"""

# Thread count is the only environment knob: REFREG_THREADS caps the
# numeric backend's thread pools.  It must be applied before numpy is
# first imported, which the submodule imports below trigger.
import os as _os

_threads = _os.environ.get("REFREG_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS",
                 "VECLIB_MAXIMUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .lattice import (                                          # noqa: E402
    DigitSet,
    DilationData,
    IfsGeometry,
    IntersectKind,
    LatticeError,
    SpectralSplit,
    attractor_membership,
    cells_intersect,
    point_in_attractor,
    spectral_split,
    standard_digits,
    validate_dilation,
    verify_digit_set,
)
from .mask import (                                             # noqa: E402
    Mask,
    MaskError,
    OmegaSet,
    SumRuleError,
    check_sum_rules,
    compute_omega,
    compute_omega_tilde,
    make_admissible_simplex,
    make_mask,
    require_sum_rules,
)
from .transition import (                                       # noqa: E402
    RestrictedFamily,
    Subspace,
    TransitionError,
    TransitionFamily,
    build_transition,
    conditioned_subspace,
    difference_subspace,
    irreducibility_test,
    make_subspace,
    mean_eigenvector,
    origin_eigenvector,
    restrict,
    special_vectors,
    sum_zero_subspace,
)
from .spectral import (                                         # noqa: E402
    JsrResult,
    PRadiusResult,
    SpectralError,
    invariant_polytope,
    jsr_bounds,
    p_radius_bounds,
    p_radius_even,
    p_radius_one_nonneg,
    spectral_radius,
)
from .regularity import (                                       # noqa: E402
    DerivativeReport,
    HolderReport,
    LocalReport,
    ModulusReport,
    RegularityError,
    derivative_analysis,
    exists_Lp,
    holder_C,
    holder_Lp,
    holder_directional,
    local_exponent,
    modulus_report,
)
from .evaluate import (                                         # noqa: E402
    EvaluateError,
    EvaluationTable,
    SubdivisionData,
    boundary_consistency,
    empirical_rate,
    evaluate_v,
    export_phi,
    lp_mean_approximation,
    subdivide,
    subdivision_rate,
)
from .cli import (                                              # noqa: E402
    AnalysisOptions,
    ConfigError,
    ParseError,
    ProblemConfig,
    ReportEnvelope,
    ValidationError,
    parse_config,
    run_command,
    serialize_config,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisOptions",
    "ConfigError",
    "DerivativeReport",
    "DigitSet",
    "DilationData",
    "EvaluateError",
    "EvaluationTable",
    "HolderReport",
    "IfsGeometry",
    "IntersectKind",
    "JsrResult",
    "LatticeError",
    "LocalReport",
    "Mask",
    "MaskError",
    "ModulusReport",
    "OmegaSet",
    "PRadiusResult",
    "ParseError",
    "ProblemConfig",
    "RegularityError",
    "ReportEnvelope",
    "RestrictedFamily",
    "SpectralError",
    "SpectralSplit",
    "Subspace",
    "SubdivisionData",
    "SumRuleError",
    "TransitionError",
    "TransitionFamily",
    "ValidationError",
    "attractor_membership",
    "boundary_consistency",
    "build_transition",
    "cells_intersect",
    "check_sum_rules",
    "compute_omega",
    "compute_omega_tilde",
    "conditioned_subspace",
    "derivative_analysis",
    "difference_subspace",
    "empirical_rate",
    "evaluate_v",
    "exists_Lp",
    "export_phi",
    "holder_C",
    "holder_Lp",
    "holder_directional",
    "invariant_polytope",
    "irreducibility_test",
    "jsr_bounds",
    "local_exponent",
    "lp_mean_approximation",
    "make_admissible_simplex",
    "make_mask",
    "make_subspace",
    "mean_eigenvector",
    "modulus_report",
    "origin_eigenvector",
    "p_radius_bounds",
    "p_radius_even",
    "p_radius_one_nonneg",
    "parse_config",
    "point_in_attractor",
    "require_sum_rules",
    "restrict",
    "run_command",
    "serialize_config",
    "special_vectors",
    "spectral_radius",
    "spectral_split",
    "standard_digits",
    "subdivide",
    "subdivision_rate",
    "sum_zero_subspace",
    "validate_dilation",
    "verify_digit_set",
]
