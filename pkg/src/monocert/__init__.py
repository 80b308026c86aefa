"""Data-driven safety certificates for unknown monotone discrete-time systems.

Build dominance-function bases from finite trajectories, assemble the
corner-sampled linear programs whose solutions are robust barrier
certificates or safe controller sets, solve them with the embedded
simplex, and falsify the results by Monte-Carlo simulation.
"""

from ._kernels import BACKEND
from .certify import (
    CertificateTemplate,
    ConstraintSystem,
    ControllerSet,
    Mode,
    SupportPattern,
    assemble_controlled_program,
    assemble_robust_program,
    controller_set,
    bracketing_diagnostic,
    eval_certificate,
    eval_inclusion,
    make_controlled_bases,
    make_robust_bases,
    policy_compat_table,
    select_control,
)
from .dominance import (
    BasisKind,
    DominanceBasis,
    DominanceTime,
    EMPTY_TIME,
    INFINITE_TIME,
    InflationSchedule,
    controlled_lower_time,
    controlled_upper_time,
    dominance_value,
    lambda_schedule,
    robust_lower_time,
    robust_upper_time,
    trunc_controlled_lower,
    trunc_controlled_upper,
    trunc_robust_lower,
    trunc_robust_upper,
)
from .errors import (
    ConfigError,
    SimplexStallError,
    StateEscapeError,
    TailAssumptionError,
    UsageError,
)
from .order import Box, Region, box, box_contains, partial_leq, shift
from .partition import CoverSets, GridPartition, build_partition, cover_indices, cover_sets
from .solver import (
    LinearProgram,
    Loss,
    ProgramResult,
    SolveResult,
    Status,
    solve_controlled_program,
    solve_controlled_program_milp,
    solve_lp,
    solve_robust_program,
    template_from_p,
)
from .systems import (
    BUILTIN_SYSTEMS,
    CONTRACTIVE_LIPSCHITZ,
    ConstantInput,
    FeedbackPolicy,
    InputRole,
    LipschitzBounds,
    PolicyInput,
    SampledDisturbance,
    SystemModel,
    TailDominance,
    TailInfo,
    Trajectory,
    audit_monotonicity,
    detect_dominating_tail,
    estimate_compact_tail,
    make_contractive,
    make_lotka_volterra,
    make_traffic,
    sample_disturbance,
    simulate,
    step,
)
from .validate import (
    check_dissipation,
    check_monotonicity,
    check_sublevel_invariance,
    check_trajectory_comparison,
    check_truncation_sandwich,
    check_value_range,
    monte_carlo_safety,
)

__version__ = "0.1.0"
