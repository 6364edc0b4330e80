"""Ready-made three-outcome tests for two partially identifiable queries.

Treatment-efficacy threshold query: given a binary (X, Y) table from an
observational study with possible unmeasured confounding, test whether
P(Y=1 | do(X=1)) is at least a threshold c.  The sharp observational bounds
on that quantity are [P(Y=1, X=1), P(Y=1, X=1) + P(X != 1)], so the three
truth regions are: the bound interval lies entirely at or above c (region 0),
entirely below c (region 1), or straddles c (region 2, unidentifiable).

Instrument-validity query: given a (Z, X, Y) table, test the inequality
max_x sum_y max_z K(x, y | z) <= 1 that every model in which Z affects Y
only through X must satisfy.  Violation refutes such a model (region 1);
satisfaction with all instrument values observed is region 0; an instrument
value of probability zero makes the query unanswerable (region 2).

Both tests are two-stage compositions of binary tests (see :mod:`.core`),
so their per-cell error bounds come straight from the stage levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    BinaryTestProcedure,
    BinaryVerdict,
    Outcome,
    PlanKind,
    Region,
    TwoStagePlan,
    run_two_stage,
)
from .errors import ValidationError
from .stats import (
    ConditionalKernel,
    ContingencyTable,
    ManskiInterval,
    binom_pvalue_lower,
    binom_pvalue_upper,
    iv_bootstrap_test,
    iv_lhs,
    manski_bounds,
    positivity_check,
)

__all__ = [
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
]

# Efficacy test: stage 1 rejects straight to "efficacy below c" (region 1),
# stage 2 then separates "at least c" (region 0) from unidentifiable.
TEC_PLAN = TwoStagePlan.make(
    PlanKind.SPLIT_NULL, first=Region.ALT_ONLY, second_null=Region.NULL_ONLY
)

# Instrument test: stage 1 accepts straight to unidentifiable (region 2),
# stage 2 then separates "inequality holds" from "inequality violated".
IV_PLAN = TwoStagePlan.make(
    PlanKind.SPLIT_ALTERNATIVE, first=Region.OVERLAP, second_null=Region.NULL_ONLY
)


def _require_binary_table(table: ContingencyTable) -> None:
    if table.has_instrument or table.counts.shape != (2, 2):
        raise ValidationError("this test needs a 2x2 table over binary (X, Y)")
    if table.n == 0:
        raise ValidationError("cannot test an empty table")


def failure_excess_test(c: float) -> BinaryTestProcedure:
    """Binary test of "P(Y=0, X=1) <= 1 - c" against the excess-failure alternative.

    The observed failure fraction P(Y=0, X=1) exceeds 1 - c exactly when the
    upper efficacy bound falls below c, which is what places a distribution
    in region 1.  Exact one-sided binomial test, upper tail of the
    count(X=1, Y=0) statistic at success probability 1 - c.
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"threshold c must be in [0, 1], got {c}")

    def run(table: ContingencyTable, level: float) -> BinaryVerdict:
        _require_binary_table(table)
        p = binom_pvalue_upper(int(table.counts[1, 0]), table.n, 1.0 - c)
        return BinaryVerdict.from_pvalue(p, level=level)

    return BinaryTestProcedure(
        name=f"failure excess over 1-c (c={c:g})",
        null_regions=frozenset({Region.NULL_ONLY, Region.OVERLAP}),
        alt_regions=frozenset({Region.ALT_ONLY}),
        run=run,
    )


def success_deficit_test(c: float) -> BinaryTestProcedure:
    """Binary test of "P(Y=1, X=1) >= c" against the deficit alternative.

    The lower efficacy bound reaching c is what places a distribution in
    region 0; falling short of it (without the failure excess of region 1)
    is the unidentifiable region.  Exact one-sided binomial test, lower tail
    of the count(X=1, Y=1) statistic at success probability c.
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"threshold c must be in [0, 1], got {c}")

    def run(table: ContingencyTable, level: float) -> BinaryVerdict:
        _require_binary_table(table)
        p = binom_pvalue_lower(int(table.counts[1, 1]), table.n, c)
        return BinaryVerdict.from_pvalue(p, level=level)

    return BinaryTestProcedure(
        name=f"success deficit under c (c={c:g})",
        null_regions=frozenset({Region.NULL_ONLY}),
        alt_regions=frozenset({Region.OVERLAP}),
        run=run,
    )


def positivity_procedure() -> BinaryTestProcedure:
    """Deterministic stage-1 procedure: were all instrument values observed?

    Ignores the level passed at call time; the verdict always carries level
    0.0 with a degenerate p-value (see :func:`.stats.positivity_check`).
    """

    def run(table: ContingencyTable, level: float) -> BinaryVerdict:
        return positivity_check(table)

    return BinaryTestProcedure(
        name="instrument support observed",
        null_regions=frozenset({Region.OVERLAP}),
        alt_regions=frozenset({Region.NULL_ONLY, Region.ALT_ONLY}),
        run=run,
    )


def iv_inequality_procedure(bootstrap: int, seed: int) -> BinaryTestProcedure:
    """Stage-2 procedure: bootstrap test of the instrument inequality.

    Wraps :func:`.stats.iv_bootstrap_test` with the given replicate count and
    seed; the level comes from the caller at run time.
    """
    if bootstrap < 100:
        raise ValidationError(f"need at least 100 bootstrap replicates, got {bootstrap}")

    def run(table: ContingencyTable, level: float) -> BinaryVerdict:
        return iv_bootstrap_test(table, B=bootstrap, alpha=level, seed=seed)

    return BinaryTestProcedure(
        name=f"instrument inequality bootstrap (B={bootstrap})",
        null_regions=frozenset({Region.NULL_ONLY}),
        alt_regions=frozenset({Region.ALT_ONLY}),
        run=run,
    )


@dataclass(frozen=True)
class TecResult:
    """Everything the efficacy-threshold test produced."""

    outcome: Outcome
    stage1: BinaryVerdict
    stage2: Optional[BinaryVerdict]
    manski: ManskiInterval
    c: float

    def to_json_dict(self) -> dict:
        return {
            "outcome": int(self.outcome),
            "c": self.c,
            "stage1": self.stage1.to_json_dict(),
            "stage2": self.stage2.to_json_dict() if self.stage2 is not None else None,
            "bounds": self.manski.to_json_dict(),
        }


@dataclass(frozen=True)
class IvResult:
    """Everything the instrument-validity test produced.

    ``statistic`` is the inequality left-hand side of the empirical kernel;
    it is NaN when some instrument value was never observed, because the
    kernel is undefined there.
    """

    outcome: Outcome
    positivity: BinaryVerdict
    iv: Optional[BinaryVerdict]
    statistic: float

    def to_json_dict(self) -> dict:
        return {
            "outcome": int(self.outcome),
            "positivity": self.positivity.to_json_dict(),
            "iv": self.iv.to_json_dict() if self.iv is not None else None,
            "statistic": None if math.isnan(self.statistic) else self.statistic,
        }


def tec_ternary(
    table: ContingencyTable,
    c: float,
    alpha1: float,
    alpha2: float,
) -> TecResult:
    """Three-outcome test of "P(Y=1 | do(X=1)) >= c" from a 2x2 table.

    Outcome 0: don't reject (the data certify the efficacy bound interval sits
    at or above c).  Outcome 1: reject (the interval sits below c).  Outcome
    2: the interval straddles c and no amount of data of this kind settles
    the query.  Stage errors: wrongly rejecting is controlled at alpha1 in
    regions 0 and 2; wrongly concluding 0 or 2 in region 1 at the stage-1
    type-II rate; confusing 0 with 2 at alpha2 (and the reverse at the
    stage-2 type-II rate).
    """
    _require_binary_table(table)
    for name, a in (("alpha1", alpha1), ("alpha2", alpha2)):
        if not 0.0 < a < 1.0:
            raise ValidationError(f"{name} must be in (0, 1), got {a}")
    run = run_two_stage(
        TEC_PLAN,
        failure_excess_test(c),
        success_deficit_test(c),
        table,
        alpha1=alpha1,
        alpha2=alpha2,
    )
    return TecResult(
        outcome=run.outcome,
        stage1=run.stage1,
        stage2=run.stage2,
        manski=manski_bounds(table),
        c=c,
    )


def iv_ternary(
    table: ContingencyTable,
    alpha: float,
    bootstrap: int,
    seed: int,
) -> IvResult:
    """Three-outcome test of instrument validity from a (Z, X, Y) table.

    Outcome 0: the inequality max_x sum_y max_z K(x, y | z) <= 1 is not
    refuted.  Outcome 1: it is refuted at level alpha (no model where Z acts
    on Y only through X fits the data).  Outcome 2: some instrument value was
    never observed, so the inequality cannot be evaluated.  Stage 1 is the
    deterministic support check; stage 2 the parametric bootstrap.
    """
    if not table.has_instrument:
        raise ValidationError("instrument-validity test needs a (Z, X, Y) table")
    if table.z_card != 2:
        raise ValidationError(
            f"the instrument must be binary, got {table.z_card} values"
        )
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    run = run_two_stage(
        IV_PLAN,
        positivity_procedure(),
        iv_inequality_procedure(bootstrap, seed),
        table,
        alpha1=0.0,
        alpha2=alpha,
    )
    if run.stage2 is None:
        statistic = math.nan
    else:
        statistic = iv_lhs(ConditionalKernel.from_table(table))
    return IvResult(
        outcome=run.outcome,
        positivity=run.stage1,
        iv=run.stage2,
        statistic=statistic,
    )


def tec_region_of(joint: Union[np.ndarray, ContingencyTable], c: float) -> Region:
    """True region of the efficacy query for a known 2x2 joint distribution.

    ``joint`` is a 2x2 probability table (rows = X, columns = Y) or a table
    of counts standing in for its empirical distribution.  Region 1 when the
    whole bound interval is below c; region 0 when the lower bound reaches c;
    region 2 otherwise.
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"threshold c must be in [0, 1], got {c}")
    if isinstance(joint, ContingencyTable):
        _require_binary_table(joint)
        p11 = joint.counts[1, 1] / joint.n
        p10 = joint.counts[1, 0] / joint.n
    else:
        arr = np.asarray(joint, dtype=float)
        if arr.shape != (2, 2):
            raise ValidationError("joint must be 2x2 (rows = X, columns = Y)")
        if np.any(arr < 0.0) or abs(float(arr.sum()) - 1.0) > 1e-9:
            raise ValidationError("joint must be a probability table summing to 1")
        p11 = float(arr[1, 1])
        p10 = float(arr[1, 0])
    if p10 > 1.0 - c:
        return Region.ALT_ONLY
    if p11 >= c:
        return Region.NULL_ONLY
    return Region.OVERLAP


def iv_region_of(kernel: ConditionalKernel, pz: np.ndarray) -> Region:
    """True region of the instrument query for a known kernel and Z marginal.

    Region 2 when some instrument value has probability zero (the inequality
    involves unobservable slices); otherwise region 1 exactly when the
    inequality statistic exceeds 1, else region 0.
    """
    pz = np.asarray(pz, dtype=float)
    if pz.ndim != 1 or pz.shape[0] != kernel.values.shape[0]:
        raise ValidationError("pz must be a vector with one entry per instrument value")
    if np.any(pz < 0.0) or abs(float(pz.sum()) - 1.0) > 1e-9:
        raise ValidationError("pz must be a probability vector summing to 1")
    if np.any(pz == 0.0):
        return Region.OVERLAP
    return Region.ALT_ONLY if iv_lhs(kernel) > 1.0 else Region.NULL_ONLY
