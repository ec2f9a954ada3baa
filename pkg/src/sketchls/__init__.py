"""Randomized sketching for least squares, with statistical and worst-case diagnostics."""
from .criteria import (
    BoundCheck,
    BoundTemplate,
    CriteriaReport,
    DesignEvaluator,
    DrawEvaluation,
    RealizedErrors,
    StructuralConstants,
    check_structural_bounds,
    closed_form_criteria,
    heavy_hitter_k,
    lower_bound_condition,
    monte_carlo_criteria,
    oblique_projection,
    residual_ratio,
    structural_constants,
    theorem_bound,
)
from .datagen import (
    LinearModelInstance,
    SyntheticSpec,
    generate_design,
    generate_response,
    leverage_profile,
)
from .estimators import (
    FitResult,
    PartialSketchRegression,
    SketchedLinearRegression,
    ols_solve,
    partial_sketch_solve,
    sketched_solve,
)
from .exceptions import InvalidInputError, NumericError
from .linalg import (
    ThinSVD,
    cross_leverage,
    fwht,
    leverage_scores,
    pinv_solve,
    thin_svd,
)
from .rng import RngStream
from .sketches import (
    DenseProjection,
    RowSample,
    SketchKind,
    SketchTag,
    Srht,
    apply_sketch,
    apply_sketch_transpose,
    approx_leverage_scores,
    draw_dense_projection,
    draw_sampling_sketch,
    draw_sketch,
    draw_srht_sketch,
    identity_sketch,
    materialize,
    sampling_probabilities,
)

__version__ = "0.1.0"
