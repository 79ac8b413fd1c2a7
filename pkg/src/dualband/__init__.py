"""Delay-optimal scheduling for a dual-band downlink.

A fast but intermittently available mmWave path (head buffer -> processing
server -> mmWave queue) runs next to a slow, always-on sub-6 GHz server.
This package solves the discounted-cost scheduling MDP on the collapsed
state space, extracts the optimal dispatch threshold on fast-path occupancy,
verifies the structural properties the optimality argument rests on, and
simulates the uniformized chain to reproduce the delay/throughput
experiments.
"""

from .config import InvalidConfig, RunConfig, config_hash, load_config
from .model import (
    Action,
    AssumptionViolated,
    CollapsedState,
    Event,
    InadmissibleAction,
    NonPositiveRate,
    ParamsNotUniformized,
    RateParams,
    StabilityRegion,
    SystemState4D,
    admissible_actions,
    apply_action,
    apply_event,
    check_fastpath_assumption,
    resolve_renege,
    stability_region,
    uniformize,
)
from .policies import (
    PolicyLoop,
    apply_policy_to_fixpoint,
    maxweight_decide,
    maxweight_step,
    mmwave_only_decide,
    threshold_decide,
)
from .simulator import (
    CompareRow,
    ImprovementResult,
    RepStats,
    SimConfig,
    SimStats,
    compare_maxweight,
    relative_improvement,
    simulate,
    sweep_threshold,
)
from .solver import (
    AverageDelayResult,
    NoConvergence,
    NoStabilization,
    OutOfBox,
    PolicyTable,
    SolveResult,
    ThresholdResult,
    TruncationBox,
    ValueTable,
    average_delay_threshold,
    extract_policy,
    extract_threshold,
    initial_values,
    intermediate_value,
    nearest_threshold,
    solve_discounted,
    threshold_policy_table,
    value_iteration_step,
)
from .bellman4d import bellman_operator_4d, collapse_gap, solve_discounted_4d
from .verifier import (
    IterateAudit,
    IterationThresholdTrace,
    Violation,
    ViolationReport,
    check_class_F,
    check_extended,
    check_iteration_thresholds,
    check_theorem_fixedpoint,
    check_total_order_info,
    trace_rows,
    truncation_band,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AssumptionViolated",
    "AverageDelayResult",
    "CollapsedState",
    "CompareRow",
    "Event",
    "ImprovementResult",
    "InadmissibleAction",
    "InvalidConfig",
    "IterateAudit",
    "IterationThresholdTrace",
    "NoConvergence",
    "NoStabilization",
    "NonPositiveRate",
    "OutOfBox",
    "ParamsNotUniformized",
    "PolicyLoop",
    "PolicyTable",
    "RateParams",
    "RepStats",
    "RunConfig",
    "SimConfig",
    "SimStats",
    "SolveResult",
    "StabilityRegion",
    "SystemState4D",
    "ThresholdResult",
    "TruncationBox",
    "ValueTable",
    "Violation",
    "ViolationReport",
    "admissible_actions",
    "apply_action",
    "apply_event",
    "apply_policy_to_fixpoint",
    "average_delay_threshold",
    "bellman_operator_4d",
    "check_class_F",
    "check_extended",
    "check_fastpath_assumption",
    "check_iteration_thresholds",
    "check_theorem_fixedpoint",
    "check_total_order_info",
    "collapse_gap",
    "compare_maxweight",
    "config_hash",
    "extract_policy",
    "extract_threshold",
    "initial_values",
    "intermediate_value",
    "load_config",
    "maxweight_decide",
    "maxweight_step",
    "mmwave_only_decide",
    "nearest_threshold",
    "relative_improvement",
    "resolve_renege",
    "simulate",
    "solve_discounted",
    "solve_discounted_4d",
    "stability_region",
    "sweep_threshold",
    "threshold_decide",
    "threshold_policy_table",
    "trace_rows",
    "truncation_band",
    "uniformize",
    "value_iteration_step",
]
