"""Orlicz renorming of L^1([0,1]) with quantitative convexity and
smoothness verification on concrete finite-dimensional subspaces."""

from .orlicz import (
    LIMIT_SLOPE,
    NormSolution,
    NormSolverError,
    OrliczEval,
    luxemburg_norm,
    m_defining_integral,
    modular,
    norm_equivalence_constants,
    orlicz_m,
    phi,
    validate_closed_form,
)
from .l1space import (
    AnalyticWeight,
    DistributionCurve,
    DyadicStepFunction,
    NonIntegrableError,
    ProductFunction,
    approximation_error,
    combine_steps,
    conditional_expectation,
    distribution,
    distribution_curve,
    l1_norm,
    log_weight,
    rademacher,
    tail_integral,
)
from .trees import (
    DyadicSet,
    NormEquivalenceResult,
    SplitInvariantError,
    SplitResult,
    WeightedTree,
    build_weighted_system,
    log_weight_tail_check,
    norm_equivalence_check,
    rademacher_tail_check,
    split_set,
    tree_to_jsonable,
    verify_tree,
)
from .subspaces import (
    DegenerateBasisError,
    IndexCurve,
    KXConstant,
    ModulusEstimate,
    NonSmoothPointError,
    SamplerConfig,
    SeparationUnreachableError,
    SmoothnessClassification,
    Subspace,
    c_index,
    classify_smoothness,
    delta_estimate,
    g_index,
    index_curve,
    k_x_constant,
    moduli_estimate,
    norm_derivative,
    rho_estimate,
    rho_figiel_estimate,
    sphere_sample,
    upper_envelope_integral,
    verify_convexity_estimate,
    verify_smoothness_estimate,
)
from .config import ExperimentConfig, GridSpec
from .reports import CheckRow, VerificationReport

__version__ = "0.1.0"
