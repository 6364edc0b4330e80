"""Two-stage three-outcome hypothesis tests built from binary tests.

A three-outcome ("ternary") test decides between "don't reject the null"
(0), "reject the null" (1) and "unidentifiable" (2).  The three decisions
correspond to three disjoint truth regions of the space of data-generating
distributions:

* region 0 -- distributions consistent with the null only,
* region 1 -- distributions consistent with the alternative only,
* region 2 -- the overlap, where both causal answers induce the same
  observational distribution and the query cannot be decided from data.

This module provides the outcome/region taxonomy, a thin wrapper for binary
test procedures, the two ways of composing two binary tests into a ternary
test (split-alternative and split-null), the analytic per-cell error-bound
tables for those compositions, error-cell classification, and a wrapper that
turns a fixed-level binary test family into one whose level shrinks along a
sample-size schedule.

Everything here is immutable after construction and safe to use from many
threads concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Callable, Optional

import numpy as np

from .errors import ConfigurationError, ValidationError

__all__ = [
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
]


class Outcome(IntEnum):
    """The three decisions a ternary test can output."""

    DONT_REJECT = 0
    REJECT = 1
    UNIDENTIFIABLE = 2


class Region(IntEnum):
    """The three disjoint truth regions of a partially identifiable query.

    ``NULL_ONLY`` holds distributions induced only by null models,
    ``ALT_ONLY`` those induced only by alternative models, and ``OVERLAP``
    the distributions induced by both, where the query is unidentifiable.
    The integer values line up with the matching correct :class:`Outcome`.
    """

    NULL_ONLY = 0
    ALT_ONLY = 1
    OVERLAP = 2


class Decision(Enum):
    """Verdict of a binary test."""

    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class BinaryVerdict:
    """Outcome of one binary test run, with the p-value and level recorded.

    The decision and p-value are kept consistent by construction: the test
    rejects exactly when ``p_value <= level``.  Tests defined only by a
    rejection region report degenerate p-values of 0.0 or 1.0 so that every
    verdict carries the same fields.
    """

    decision: Decision
    p_value: float
    level: float

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValidationError(f"p_value must be in [0, 1], got {self.p_value}")
        if not 0.0 <= self.level <= 1.0:
            raise ValidationError(f"level must be in [0, 1], got {self.level}")
        expected = Decision.REJECT if self.p_value <= self.level else Decision.ACCEPT
        if self.decision is not expected:
            raise ValidationError(
                f"decision {self.decision.value!r} inconsistent with "
                f"p_value={self.p_value} at level={self.level}"
            )

    @classmethod
    def from_pvalue(cls, p_value: float, level: float) -> "BinaryVerdict":
        """Build a verdict from a p-value, rejecting iff ``p_value <= level``."""
        decision = Decision.REJECT if p_value <= level else Decision.ACCEPT
        return cls(decision=decision, p_value=p_value, level=level)

    @property
    def rejected(self) -> bool:
        return self.decision is Decision.REJECT

    def to_json_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "p_value": self.p_value,
            "level": self.level,
        }


@dataclass(frozen=True)
class BinaryTestProcedure:
    """A binary test together with the truth regions it separates.

    ``run(sample, level)`` must return a :class:`BinaryVerdict`.  The region
    metadata says which truth regions make up the test's null and alternative
    hypotheses; the two sets must be disjoint, nonempty, and jointly cover
    two or three regions.  The metadata is what lets a two-stage composition
    check that its stages actually test the hypotheses the plan calls for.
    """

    name: str
    null_regions: frozenset
    alt_regions: frozenset
    run: Callable[[Any, float], BinaryVerdict]

    def __post_init__(self):
        null = frozenset(Region(r) for r in self.null_regions)
        alt = frozenset(Region(r) for r in self.alt_regions)
        object.__setattr__(self, "null_regions", null)
        object.__setattr__(self, "alt_regions", alt)
        if not null or not alt:
            raise ValidationError("null and alternative region sets must be nonempty")
        if null & alt:
            raise ValidationError("null and alternative region sets must be disjoint")
        if len(null | alt) not in (2, 3):
            raise ValidationError("null and alternative must cover 2 or 3 regions")

    def __call__(self, sample: Any, level: float) -> BinaryVerdict:
        return self.run(sample, level)


class PlanKind(Enum):
    """How stage 1 of a two-stage ternary test is oriented.

    ``SPLIT_ALTERNATIVE`` ("SA"): stage 1 takes the designated first region
    as its null, so *accepting* concludes that region.  ``SPLIT_NULL``
    ("SN"): stage 1 takes the complement of the first region as its null, so
    *rejecting* concludes the first region.  Either way, stage 2 then splits
    the complement into its two constituent regions.
    """

    SPLIT_ALTERNATIVE = "SA"
    SPLIT_NULL = "SN"


@dataclass(frozen=True)
class TwoStagePlan:
    """Which region is concluded first and how stage 2 splits the rest.

    ``first`` is the region concluded when stage 1 favors it.  ``second_null``
    and ``second_alt`` are the null and alternative of the stage-2 binary
    test; together with ``first`` they must be a permutation of the three
    regions.
    """

    kind: PlanKind
    first: Region
    second_null: Region
    second_alt: Region

    def __post_init__(self):
        regions = {self.first, self.second_null, self.second_alt}
        if regions != {Region.NULL_ONLY, Region.ALT_ONLY, Region.OVERLAP}:
            raise ValidationError(
                "first, second_null and second_alt must be a permutation of the three regions"
            )

    @classmethod
    def make(cls, kind: PlanKind, first: Region, second_null: Region) -> "TwoStagePlan":
        """Construct a plan, deriving the remaining region as second_alt."""
        first = Region(first)
        second_null = Region(second_null)
        if first == second_null:
            raise ValidationError("second_null must differ from first")
        (second_alt,) = [r for r in Region if r not in (first, second_null)]
        return cls(kind=kind, first=first, second_null=second_null, second_alt=second_alt)

    @property
    def stage1_null(self) -> frozenset:
        """Truth regions forming the stage-1 null hypothesis."""
        if self.kind is PlanKind.SPLIT_ALTERNATIVE:
            return frozenset({self.first})
        return frozenset({self.second_null, self.second_alt})

    @property
    def stage1_alt(self) -> frozenset:
        """Truth regions forming the stage-1 alternative hypothesis."""
        if self.kind is PlanKind.SPLIT_ALTERNATIVE:
            return frozenset({self.second_null, self.second_alt})
        return frozenset({self.first})

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "first": int(self.first),
            "second_null": int(self.second_null),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TwoStagePlan":
        try:
            kind = PlanKind(data["kind"])
            first = Region(int(data["first"]))
            second_null = Region(int(data["second_null"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"invalid plan document: {exc}") from exc
        return cls.make(kind, first, second_null)


def enumerate_plans() -> list:
    """All 12 distinct two-stage plans: {SA, SN} x 3 first regions x 2 splits."""
    plans = []
    for kind in PlanKind:
        for first in Region:
            for second_null in Region:
                if second_null == first:
                    continue
                plans.append(TwoStagePlan.make(kind, first, second_null))
    return plans


@dataclass(frozen=True, order=True)
class ErrorCell:
    """An (outcome, truth) pair with outcome != truth: one of the 6 error cells."""

    outcome: Outcome
    truth: Region

    def __post_init__(self):
        object.__setattr__(self, "outcome", Outcome(self.outcome))
        object.__setattr__(self, "truth", Region(self.truth))
        if int(self.outcome) == int(self.truth):
            raise ValidationError("diagonal (outcome == truth) cells are not errors")


def classify_error(outcome: Outcome, truth: Region) -> Optional[ErrorCell]:
    """Return the error cell for (outcome, truth), or None on the diagonal."""
    if int(outcome) == int(truth):
        return None
    return ErrorCell(Outcome(outcome), Region(truth))


@dataclass(frozen=True, eq=False)
class ErrorMatrix:
    """A 3x3 table of error rates or bounds; rows = outcomes, columns = truths.

    Off-diagonal entries are rates (or bounds on rates) of the corresponding
    error cells.  Diagonal entries carry 1.0, meaning "no bound": correctness
    rates are not constrained by the table.
    """

    rates: np.ndarray

    def __post_init__(self):
        rates = np.array(self.rates, dtype=float)
        if rates.shape != (3, 3):
            raise ValidationError(f"error matrix must be 3x3, got shape {rates.shape}")
        if np.any(rates < 0.0) or np.any(rates > 1.0):
            raise ValidationError("error matrix entries must lie in [0, 1]")
        rates.flags.writeable = False
        object.__setattr__(self, "rates", rates)

    def cell(self, outcome: Outcome, truth: Region) -> float:
        return float(self.rates[int(outcome), int(truth)])

    def to_flat_list(self) -> list:
        """Row-major 9-element list, the serialization format."""
        return [float(v) for v in self.rates.ravel()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ErrorMatrix):
            return NotImplemented
        return bool(np.array_equal(self.rates, other.rates))


def compose_two_stage(
    plan: TwoStagePlan,
    stage1: BinaryVerdict,
    stage2: Optional[BinaryVerdict] = None,
) -> Outcome:
    """Map the stage verdicts to the ternary outcome the plan dictates.

    Stage 1 concludes the plan's first region when it accepts (split-
    alternative: the first region *is* the stage-1 null) or when it rejects
    (split-null: the stage-1 null is the complement).  Otherwise the stage-2
    verdict picks between the two remaining regions: accept concludes
    ``second_null``, reject concludes ``second_alt``.  ``stage2`` may be
    omitted only when stage 1 concludes the first region.
    """
    if plan.kind is PlanKind.SPLIT_ALTERNATIVE:
        concluded_first = not stage1.rejected
    else:
        concluded_first = stage1.rejected
    if concluded_first:
        return Outcome(int(plan.first))
    if stage2 is None:
        raise ValidationError(
            "stage 1 did not conclude the first region, so a stage-2 verdict is required"
        )
    return Outcome(int(plan.second_alt if stage2.rejected else plan.second_null))


@dataclass(frozen=True)
class TwoStageRun:
    """Result of executing a two-stage plan: outcome plus stage verdicts."""

    outcome: Outcome
    stage1: BinaryVerdict
    stage2: Optional[BinaryVerdict] = None

    def to_json_dict(self) -> dict:
        return {
            "outcome": int(self.outcome),
            "stage1": self.stage1.to_json_dict(),
            "stage2": self.stage2.to_json_dict() if self.stage2 is not None else None,
        }


def run_two_stage(
    plan: TwoStagePlan,
    stage1_test: BinaryTestProcedure,
    stage2_test: BinaryTestProcedure,
    sample: Any,
    alpha1: float,
    alpha2: float,
) -> TwoStageRun:
    """Execute both stages on the *same* sample and compose the outcome.

    Stage 2 runs lazily: when stage 1 concludes the first region the second
    test is never invoked.  Both procedures' region metadata must match what
    the plan calls for, otherwise a :class:`ConfigurationError` is raised.
    """
    if stage1_test.null_regions != plan.stage1_null or stage1_test.alt_regions != plan.stage1_alt:
        raise ConfigurationError(
            f"stage-1 test {stage1_test.name!r} tests "
            f"{sorted(stage1_test.null_regions)} vs {sorted(stage1_test.alt_regions)}, "
            f"but the plan needs {sorted(plan.stage1_null)} vs {sorted(plan.stage1_alt)}"
        )
    if stage2_test.null_regions != frozenset({plan.second_null}) or stage2_test.alt_regions != frozenset({plan.second_alt}):
        raise ConfigurationError(
            f"stage-2 test {stage2_test.name!r} does not test "
            f"{plan.second_null!r} vs {plan.second_alt!r}"
        )
    verdict1 = stage1_test(sample, alpha1)
    if plan.kind is PlanKind.SPLIT_ALTERNATIVE:
        concluded_first = not verdict1.rejected
    else:
        concluded_first = verdict1.rejected
    verdict2 = None if concluded_first else stage2_test(sample, alpha2)
    outcome = compose_two_stage(plan, verdict1, verdict2)
    return TwoStageRun(outcome=outcome, stage1=verdict1, stage2=verdict2)


def analytic_bound_table(
    plan: TwoStagePlan,
    alpha1: float,
    beta1: float,
    alpha2: float,
    beta2: float,
) -> ErrorMatrix:
    """Per-cell error bounds of the composed test from its stage error rates.

    Given stage-1 rates (``alpha1`` = wrongly rejecting its null, ``beta1`` =
    wrongly accepting it) and likewise for stage 2, each off-diagonal
    (outcome, truth) cell of the composition is bounded by exactly one stage
    rate.  For a split-alternative plan the first region is the stage-1
    null, so concluding it under a complement truth is a beta1 event and
    leaving it under a first-region truth is an alpha1 event; for a
    split-null plan the roles swap.  Errors between the two complement
    regions are stage-2 events regardless of kind.  Diagonal entries are set
    to 1.0 (no bound).
    """
    for name, rate in (("alpha1", alpha1), ("beta1", beta1), ("alpha2", alpha2), ("beta2", beta2)):
        if not 0.0 <= rate <= 1.0:
            raise ValidationError(f"{name} must be in [0, 1], got {rate}")
    f, sn, sa = int(plan.first), int(plan.second_null), int(plan.second_alt)
    rates = np.ones((3, 3))
    if plan.kind is PlanKind.SPLIT_ALTERNATIVE:
        rates[sn, f] = alpha1
        rates[sa, f] = alpha1
        rates[f, sn] = beta1
        rates[f, sa] = beta1
    else:
        rates[f, sn] = alpha1
        rates[f, sa] = alpha1
        rates[sn, f] = beta1
        rates[sa, f] = beta1
    rates[sa, sn] = alpha2
    rates[sn, sa] = beta2
    return ErrorMatrix(rates)


@dataclass(frozen=True)
class AlphaSchedule:
    """Sample-size breakpoints N_1 < N_2 < ... with levels 1, 1/2, 1/3, ...

    The test level on the block of sample sizes (N_m, N_{m+1}] is 1/m.  For
    n <= N_1 the level is 1, which permits always rejecting; callers who find
    that too permissive should start the schedule below their smallest n.
    An empty schedule keeps level 1 for every n.
    """

    breakpoints: tuple = ()

    def __post_init__(self):
        bps = tuple(int(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if any(b < 1 for b in bps):
            raise ValidationError("breakpoints must be positive sample sizes")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValidationError("breakpoints must be strictly increasing")

    @property
    def levels(self) -> tuple:
        """The level used on each block, aligned with the breakpoints."""
        return tuple(1.0 / m for m in range(1, len(self.breakpoints) + 1))

    def level_at(self, n: int) -> float:
        """Level for a sample of size n: 1/m where m counts breakpoints below n."""
        if n < 1:
            raise ValidationError(f"sample size must be >= 1, got {n}")
        m = sum(1 for b in self.breakpoints if b < n)
        return 1.0 / max(m, 1)


def _sample_size(sample: Any) -> int:
    n = getattr(sample, "n", None)
    if n is not None:
        return int(n)
    try:
        return len(sample)
    except TypeError:
        raise ValidationError(
            "cannot determine the sample size: sample has neither an `n` attribute nor a length"
        ) from None


def alpha_schedule_wrap(
    family: BinaryTestProcedure,
    schedule: AlphaSchedule,
) -> BinaryTestProcedure:
    """Run a level-indexed binary test at the schedule's level for each sample size.

    The returned procedure ignores the level passed at call time and instead
    derives its level from the sample size via ``schedule.level_at``; as the
    sample grows past successive breakpoints the level walks down 1, 1/2,
    1/3, ...  Region metadata is inherited from the wrapped family.
    """

    def run(sample: Any, level: float) -> BinaryVerdict:
        n = _sample_size(sample)
        return family.run(sample, schedule.level_at(n))

    return BinaryTestProcedure(
        name=f"{family.name} (scheduled level)",
        null_regions=family.null_regions,
        alt_regions=family.alt_regions,
        run=run,
    )
