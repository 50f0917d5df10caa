"""Level-scheduled sparse LU factorization with relaxed dependency detection."""

from .sparse import (
    CscMatrix,
    CscPattern,
    CsrView,
    MatrixFormatError,
    Permutation,
    Triplets,
    load_matrix_market,
    load_permutation,
    make_csr_view,
    permute,
    to_csc,
)
from .symbolic import FilledPattern, SymbolicError, count_fill, symbolic_fillin
from .depgraph import (
    DependencyGraph,
    DetectMethod,
    Hazard,
    HazardReport,
    LevelSchedule,
    LevelStats,
    detect_double_u_exact,
    detect_relaxed,
    detect_upward,
    level_stats,
    levelize,
    simulate_hazards,
)
from .resource import (
    KernelMode,
    LevelPlan,
    ResourceModel,
    concurrency_cap,
    max_parallel_columns,
    plan_schedule,
    select_mode,
    warps_per_block,
)
from .numeric import (
    FactorOptions,
    FactorStats,
    LuFactors,
    PatternMismatchError,
    PivotError,
    ScheduleHazardError,
    factor_left_looking,
    factor_parallel,
    factor_right_looking_seq,
    lower_solve,
    residual,
    solve,
    subcolumn_update,
    upper_solve,
)

__version__ = "0.1.0"
