"""Numerical laboratory for coordinate-wise decompositions of normed sequence spaces.

The package computes Luxemburg norms for convex gauges, validates
families of commuting projections, estimates their unconditionality and
frame constants, and runs the perturbation / similarity machinery that
decides when a perturbed family is equivalent to the original one.
"""
from .decomposition import (
    ExpansionResult,
    FamilyReport,
    ModelSpace,
    ProjectionFamily,
    Subspace,
    expand,
    family_rank,
    make_coordinate_family,
    range_subspace,
    selfadjoint_defect,
    transport_family,
    validate_family,
)
from .errors import BudgetError, ConvergenceError, DocumentError, SingularMatrixError
from .geometry import (
    KhintchineConstants,
    ProbeReport,
    SandwichConstants,
    SandwichReport,
    besselian_constant,
    hilbertian_constant,
    khintchine_constants,
    khintchine_crossover,
    lp_sandwich_constants,
    min_max_sign_norm,
    or_type_probe,
    rademacher_average,
    riesz_constant,
    type_cotype_check,
    unconditional_constant,
)
from .kernel import ConstantEstimate, InversionResult, invert_with_condition, operator_norm
from .orlicz import (
    Delta2Report,
    NormSpec,
    OrliczFunction,
    block_psi_norm,
    delta2_margin,
    divergence_witness,
    luxemburg_norm,
    rowwise_norm,
    vector_norm,
)
from .stability import (
    OpeningConditionReport,
    OpeningReport,
    StabilityReport,
    ThresholdReport,
    build_similarity,
    c0_stability_check,
    check_opening_condition,
    kato_check,
    lambda_threshold,
    nearest_in_span,
    opening,
    orlicz_stability_check,
    perturbation_sigma,
    reduced_minimum_modulus,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ConstantEstimate",
    "ConvergenceError",
    "Delta2Report",
    "DocumentError",
    "ExpansionResult",
    "FamilyReport",
    "InversionResult",
    "KhintchineConstants",
    "ModelSpace",
    "NormSpec",
    "OpeningConditionReport",
    "OpeningReport",
    "OrliczFunction",
    "ProbeReport",
    "ProjectionFamily",
    "SandwichConstants",
    "SandwichReport",
    "SingularMatrixError",
    "StabilityReport",
    "Subspace",
    "ThresholdReport",
    "besselian_constant",
    "block_psi_norm",
    "build_similarity",
    "c0_stability_check",
    "check_opening_condition",
    "delta2_margin",
    "divergence_witness",
    "expand",
    "family_rank",
    "hilbertian_constant",
    "invert_with_condition",
    "kato_check",
    "khintchine_constants",
    "khintchine_crossover",
    "lambda_threshold",
    "lp_sandwich_constants",
    "luxemburg_norm",
    "make_coordinate_family",
    "min_max_sign_norm",
    "nearest_in_span",
    "opening",
    "operator_norm",
    "or_type_probe",
    "orlicz_stability_check",
    "perturbation_sigma",
    "rademacher_average",
    "range_subspace",
    "reduced_minimum_modulus",
    "riesz_constant",
    "rowwise_norm",
    "selfadjoint_defect",
    "transport_family",
    "type_cotype_check",
    "unconditional_constant",
    "validate_family",
    "vector_norm",
]
