"""Incidence-ratio tests for vaccine waning in two-period randomized trials."""

from .bounds import BoundResult, ve1_challenge, ve2_bound_curve, ve2_upper_bound
from .errors import (
    DegenerateResampling,
    DomainError,
    EmptyInput,
    Infeasible,
    InvalidCounts,
    MalformedInput,
    WaningError,
    WrongMode,
    ZeroDenominator,
    ZeroEvents,
    ZeroStratum,
)
from .power_study import PowerCell, PowerGrid, emit_plot, emit_table, run_hr_power_grid, run_power_grid
from .strata_sim import (
    SimConfig,
    StratumDist,
    TransitionRates,
    challenge_ir,
    hr2_bias_factor,
    simulate_trial,
    transition_rates,
)
from .stratified import StratifiedSummary, adjust_pvalues, per_stratum_tests, pooled_test
from .trial_data import (
    ArmPeriodCounts,
    IndividualRecord,
    RecordArray,
    TrialSummary,
    aggregate,
    parse_summary,
    read_records_csv,
    serialize_summary,
    write_records_csv,
)
from .waning_test import (
    TestResult,
    bootstrap_ir_test,
    conservative_variance,
    direct_delta_variance,
    hr_ratio_test,
    incidence_ratio,
    ir_ratio_test,
    katz_variance,
)

__version__ = "0.1.0"

__all__ = [
    "ArmPeriodCounts",
    "BoundResult",
    "DegenerateResampling",
    "DomainError",
    "EmptyInput",
    "IndividualRecord",
    "Infeasible",
    "InvalidCounts",
    "MalformedInput",
    "PowerCell",
    "PowerGrid",
    "RecordArray",
    "SimConfig",
    "StratifiedSummary",
    "StratumDist",
    "TestResult",
    "TransitionRates",
    "TrialSummary",
    "WaningError",
    "WrongMode",
    "ZeroDenominator",
    "ZeroEvents",
    "ZeroStratum",
    "adjust_pvalues",
    "aggregate",
    "bootstrap_ir_test",
    "challenge_ir",
    "conservative_variance",
    "direct_delta_variance",
    "emit_plot",
    "emit_table",
    "hr2_bias_factor",
    "hr_ratio_test",
    "incidence_ratio",
    "ir_ratio_test",
    "katz_variance",
    "parse_summary",
    "per_stratum_tests",
    "pooled_test",
    "read_records_csv",
    "run_hr_power_grid",
    "run_power_grid",
    "serialize_summary",
    "simulate_trial",
    "transition_rates",
    "ve1_challenge",
    "ve2_bound_curve",
    "ve2_upper_bound",
    "write_records_csv",
]
