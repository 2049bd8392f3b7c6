"""circumfeas: circumcenter-accelerated projection methods for two-set
convex feasibility, with built-in invariant audits and a benchmark harness."""

__version__ = "0.1.0"

from .circumcenter import CircumcenterResult, Degeneracy, circumcenter3, circumcenter_residual
from .instances import (
    EllipsoidInstance,
    GeneratorConfig,
    gen_ball_pair,
    gen_ellipsoid_pair,
    gen_halfspace_pair,
    gen_hyperplane_pair,
    gen_suite,
    sample_start,
)
from .methods import (
    DistanceToKnownSolution,
    GapToFirstSet,
    MethodKind,
    MethodRun,
    ProjectionBudget,
    RankDeficientError,
    centralize,
    run,
    step_ccrm,
    step_crm,
    step_crmprod,
    step_map,
    step_pcrm,
    step_spm,
)
from .regularity import (
    CentralizationCheck,
    ErrorBoundEstimate,
    RateEstimate,
    check_centralized,
    estimate_error_bound,
    estimate_rates,
    project_halfspace_intersection,
    rate_bounds,
    support_halfspaces,
)
from .sets import (
    AffineSubspace,
    Ball,
    Box,
    ConvexSet,
    Diagonal,
    Ellipsoid,
    Halfspace,
    Hyperplane,
    Product,
    ProjectionCounter,
    gap_to_set,
    make_product,
    project,
    project_diagonal,
    reflect,
)

from .bench import BenchmarkReport, performance_profile, run_suite, summarize
