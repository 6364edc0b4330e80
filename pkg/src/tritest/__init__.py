"""Three-outcome hypothesis testing for partially identifiable causal queries.

A ternary test returns one of three decisions: don't reject (0), reject (1),
or unidentifiable (2), the last meaning that no amount of data of the given
kind can settle the question.  The package builds such tests by composing
two binary tests, derives per-cell error bounds for the composition, ships
two concrete procedures (an efficacy-threshold test under confounding and an
instrument-validity test), an advisor that recommends compositions from
declared topological structure, and a Monte-Carlo harness for detection
probabilities.
"""

from ._version import __version__
from .advisor import AdvisorInput, Recommendation, TopologyLabel, advise, controlled_cells
from .cli import cli_dispatch
from .core import (
    AlphaSchedule,
    BinaryTestProcedure,
    BinaryVerdict,
    Decision,
    ErrorCell,
    ErrorMatrix,
    Outcome,
    PlanKind,
    Region,
    TwoStagePlan,
    TwoStageRun,
    alpha_schedule_wrap,
    analytic_bound_table,
    classify_error,
    compose_two_stage,
    enumerate_plans,
    run_two_stage,
)
from .dataio import berkeley_analysis, berkeley_table, load_table
from .errors import ConfigurationError, ParseError, TritestError, ValidationError
from .procedures import (
    IV_PLAN,
    TEC_PLAN,
    IvResult,
    TecResult,
    failure_excess_test,
    iv_inequality_procedure,
    iv_region_of,
    iv_ternary,
    positivity_procedure,
    success_deficit_test,
    tec_region_of,
    tec_ternary,
)
from .sim import (
    PcdCurve,
    ResponseFunctionDist,
    SimConfig,
    SyntheticBinaryTest,
    joint_from_response,
    run_pcd_study,
    sample_response_dist,
    validate_bound_table,
)
from .stats import (
    ConditionalKernel,
    ContingencyTable,
    ManskiInterval,
    binom_pvalue_lower,
    binom_pvalue_upper,
    iv_bootstrap_test,
    iv_lhs,
    manski_bounds,
    naive_manski_ternary,
    positivity_check,
    wilson_interval,
)

__all__ = [
    "__version__",
    "Outcome",
    "Region",
    "Decision",
    "BinaryVerdict",
    "BinaryTestProcedure",
    "PlanKind",
    "TwoStagePlan",
    "TwoStageRun",
    "ErrorCell",
    "ErrorMatrix",
    "AlphaSchedule",
    "compose_two_stage",
    "run_two_stage",
    "classify_error",
    "analytic_bound_table",
    "alpha_schedule_wrap",
    "enumerate_plans",
    "ContingencyTable",
    "ConditionalKernel",
    "ManskiInterval",
    "binom_pvalue_upper",
    "binom_pvalue_lower",
    "positivity_check",
    "iv_lhs",
    "iv_bootstrap_test",
    "manski_bounds",
    "wilson_interval",
    "naive_manski_ternary",
    "TEC_PLAN",
    "IV_PLAN",
    "TecResult",
    "IvResult",
    "failure_excess_test",
    "success_deficit_test",
    "positivity_procedure",
    "iv_inequality_procedure",
    "tec_ternary",
    "iv_ternary",
    "tec_region_of",
    "iv_region_of",
    "TopologyLabel",
    "AdvisorInput",
    "Recommendation",
    "advise",
    "controlled_cells",
    "ResponseFunctionDist",
    "SimConfig",
    "PcdCurve",
    "SyntheticBinaryTest",
    "sample_response_dist",
    "joint_from_response",
    "run_pcd_study",
    "validate_bound_table",
    "TritestError",
    "ValidationError",
    "ConfigurationError",
    "ParseError",
    "load_table",
    "berkeley_table",
    "berkeley_analysis",
    "cli_dispatch",
]
