"""Convex feasibility solvers with Fejer-type iterate-trace diagnostics."""

from .errors import (
    DegenerateClusterPair,
    DimensionMismatch,
    EmptyProblem,
    EmptySample,
    FejerlabError,
    InvalidN,
    LengthMismatch,
    NegativeEpsilon,
    NotViolating,
    UnsupportedSet,
    ZeroSubgradient,
)
from .geometry import (
    Ball,
    Box,
    ConvexFnOracle,
    Halfspace,
    Hyperplane,
    Intersection,
    Sublevel,
    contains,
    inner_approximation,
    project,
    separating_halfspace,
)
from .operators import (
    Affine,
    Composition,
    ConvexCombination,
    OperatorProperty,
    Projection,
    PropertyReport,
    apply,
    check_property,
    fixed_point_residual,
)
from .solvers import (
    Constant,
    Geometric,
    Harmonic,
    StopRule,
    Trace,
    inner_approx_separating,
    iterate_fixed_point,
    load_trace_csv,
    load_trace_json,
    save_trace_csv,
    save_trace_json,
    sequential_projections,
    simultaneous_projections,
    trace_from_json,
    trace_to_json,
)
from .diagnostics import (
    AnchorSet,
    ClusterReport,
    MonotonicityReport,
    analyze_trace,
    cauchy_tail_statistic,
    check_cluster_hyperplane,
    check_cluster_midpoint_orthogonality,
    check_fejer,
    check_fejer_star,
    check_fejer_star_convex_hull,
    check_strong_convergence_condition,
    cluster_points,
    distance_sequence,
    fit_quasi_fejer,
    inner_product_sequence,
    quasi_fejer3_witness,
)
from .gallery import (
    FIXTURES,
    LIMIT_HEIGHT,
    AnalyticFact,
    ExampleFixture,
    example_3_3,
    example_quasi2_not_star,
    example_remark_interior,
    zigzag_arc_trace,
)

__version__ = "0.1.0"
