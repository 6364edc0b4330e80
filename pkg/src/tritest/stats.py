"""Statistical primitives: exact binomial tails, the instrument-support
(positivity) check, the instrumental-variable inequality statistic with a
parametric bootstrap test, observational efficacy bounds, Wilson score
intervals, and the naive interval-based three-outcome baseline.

Counts live in :class:`ContingencyTable`, the universal data container: an
integer array over (X, Y) cells, optionally with a leading instrument axis Z.
Conditional kernels K(x, y | z) live in :class:`ConditionalKernel`.

All functions are pure.  The bootstrap derives one child generator per
replicate from the caller's seed (counter-based spawn keys), so replicates
can be evaluated in any order, or concurrently, with identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import norm

from .core import BinaryVerdict, Outcome
from .errors import ValidationError

__all__ = [
    "ContingencyTable",
    "ConditionalKernel",
    "ManskiInterval",
    "ConfidenceInterval",
    "binom_pvalue_upper",
    "binom_pvalue_lower",
    "positivity_check",
    "iv_lhs",
    "iv_bootstrap_test",
    "manski_bounds",
    "wilson_interval",
    "naive_manski_ternary",
]


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Nonnegative integer counts over (X, Y) or (Z, X, Y) cells.

    The first axis is the instrument Z when present (``counts.ndim == 3``).
    Axis category labels are optional bookkeeping for reports; they do not
    participate in equality.
    """

    counts: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim not in (2, 3):
            raise ValidationError(
                f"counts must be 2-d (X, Y) or 3-d (Z, X, Y), got {counts.ndim}-d"
            )
        if not np.issubdtype(counts.dtype, np.integer):
            rounded = np.rint(counts)
            if not np.array_equal(rounded, counts):
                raise ValidationError("counts must be integers")
            counts = rounded
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise ValidationError("counts must be nonnegative")
        if any(dim < 1 for dim in counts.shape):
            raise ValidationError("every axis must have at least one category")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        if self.labels is not None:
            object.__setattr__(
                self, "labels", tuple(tuple(str(v) for v in axis) for axis in self.labels)
            )

    @property
    def has_instrument(self) -> bool:
        return self.counts.ndim == 3

    @property
    def n(self) -> int:
        """Total number of observations."""
        return int(self.counts.sum())

    @property
    def x_card(self) -> int:
        return self.counts.shape[-2]

    @property
    def y_card(self) -> int:
        return self.counts.shape[-1]

    @property
    def z_card(self) -> int:
        if not self.has_instrument:
            raise ValidationError("table has no instrument axis")
        return self.counts.shape[0]

    def z_totals(self) -> np.ndarray:
        """Observation count per instrument value."""
        if not self.has_instrument:
            raise ValidationError("table has no instrument axis")
        return self.counts.sum(axis=(1, 2))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return self.counts.shape == other.counts.shape and bool(
            np.array_equal(self.counts, other.counts)
        )

    def to_json_dict(self) -> dict:
        card = {"x": self.x_card, "y": self.y_card}
        if self.has_instrument:
            card = {"z": self.z_card, **card}
        return {"card": card, "counts": [int(v) for v in self.counts.ravel()]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ContingencyTable":
        try:
            card = data["card"]
            flat = data["counts"]
            shape = (card["x"], card["y"])
            if "z" in card:
                shape = (card["z"],) + shape
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"invalid table document: {exc}") from exc
        expected = int(np.prod(shape))
        if len(flat) != expected:
            raise ValidationError(
                f"counts length {len(flat)} does not match cardinalities {shape}"
            )
        return cls(np.array(flat, dtype=np.int64).reshape(shape))


@dataclass(frozen=True, eq=False)
class ConditionalKernel:
    """Conditional probabilities K(x, y | z), one distribution per z value.

    Stored as an array of shape (Z, X, Y); every z-slice must sum to 1
    within 1e-9.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 3:
            raise ValidationError(f"kernel must be 3-d (Z, X, Y), got {values.ndim}-d")
        if np.any(values < 0.0):
            raise ValidationError("kernel entries must be nonnegative")
        slice_sums = values.sum(axis=(1, 2))
        if np.any(np.abs(slice_sums - 1.0) > 1e-9):
            raise ValidationError(
                f"every z-slice must sum to 1 within 1e-9, got sums {slice_sums}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_table(cls, table: ContingencyTable) -> "ConditionalKernel":
        """Empirical kernel: counts in each z-slice divided by the slice total."""
        if not table.has_instrument:
            raise ValidationError("empirical kernel needs a table with an instrument axis")
        totals = table.z_totals()
        if np.any(totals == 0):
            raise ValidationError(
                "every instrument value needs at least one observation to form the kernel"
            )
        return cls(table.counts / totals[:, None, None])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConditionalKernel):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


def _check_binom_args(k: int, n: int, p0: float) -> None:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValidationError(f"k must satisfy 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= p0 <= 1.0:
        raise ValidationError(f"p0 must be in [0, 1], got {p0}")


def binom_pvalue_upper(k: int, n: int, p0: float) -> float:
    """P(Bin(n, p0) >= k): upper-tail p-value for the null "proportion <= p0".

    Rejects for large k.  Computed by exact summation of the tail in log
    space (log binomial coefficients via the log-gamma function) with
    compensated summation; no normal approximation.
    """
    k, n = int(k), int(n)
    _check_binom_args(k, n, p0)
    if k == 0:
        return 1.0
    if p0 == 0.0:
        return 0.0
    if p0 == 1.0:
        return 1.0
    j = np.arange(k, n + 1)
    log_terms = (
        gammaln(n + 1)
        - gammaln(j + 1)
        - gammaln(n - j + 1)
        + j * math.log(p0)
        + (n - j) * math.log1p(-p0)
    )
    total = math.fsum(np.exp(log_terms).tolist())
    return min(1.0, total)


def binom_pvalue_lower(k: int, n: int, p0: float) -> float:
    """P(Bin(n, p0) <= k): lower-tail p-value for the null "proportion >= p0".

    Rejects for small k.  Defined as one minus the upper tail at k + 1, which
    makes the two tails complementary exactly, not just to rounding.
    """
    k, n = int(k), int(n)
    _check_binom_args(k, n, p0)
    if k == n:
        return 1.0
    if p0 == 0.0:
        return 1.0
    if p0 == 1.0:
        return 0.0
    return 1.0 - binom_pvalue_upper(k + 1, n, p0)


def positivity_check(table: ContingencyTable) -> BinaryVerdict:
    """Deterministic check that every instrument value was observed.

    Accepting means some z-slice is empty: the empirical evidence is
    consistent with an instrument value of probability zero, which is
    exactly the unidentifiable situation for the instrumental-variable
    inequalities.  The verdict is a rejection-region test, so the p-value is
    degenerate: 0.0 on reject (all values observed), 1.0 on accept.
    """
    if not table.has_instrument:
        raise ValidationError("positivity check needs a table with an instrument axis")
    if table.n == 0:
        raise ValidationError("cannot test an empty table")
    some_empty = bool(np.any(table.z_totals() == 0))
    p_value = 1.0 if some_empty else 0.0
    return BinaryVerdict.from_pvalue(p_value, level=0.0)


def iv_lhs(kernel: ConditionalKernel) -> float:
    """The inequality statistic max_x sum_y max_z K(x, y | z).

    The instrumental-variable inequalities hold for the kernel exactly when
    this value is at most 1.
    """
    return float(kernel.values.max(axis=0).sum(axis=1).max())


def iv_bootstrap_test(
    table: ContingencyTable,
    B: int,
    alpha: float,
    seed: int,
) -> BinaryVerdict:
    """Parametric bootstrap test of the inequality statistic against 1.

    The statistic is T = iv_lhs(empirical kernel) - 1.  When T <= 0 the
    inequalities hold in sample and the p-value is 1.  Otherwise B
    per-z-slice multinomial resamples from the empirical kernel give
    replicate statistics T*_b, and the p-value is
    (1 + #{b : T*_b - T >= T}) / (B + 1): the bootstrap is centered at the
    observed statistic and compared against the least-favorable boundary
    T = 0, with add-one smoothing.  Every instrument value must have been
    observed (run :func:`positivity_check` first).  Deterministic given the
    seed; replicate b uses its own generator spawned with counter b.
    """
    if B < 100:
        raise ValidationError(f"need at least 100 bootstrap replicates, got {B}")
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"alpha must be in (0, 1], got {alpha}")
    totals = table.z_totals()
    if np.any(totals == 0):
        raise ValidationError(
            "some instrument value has no observations; run positivity_check first"
        )
    kernel = ConditionalKernel.from_table(table)
    t_hat = iv_lhs(kernel) - 1.0
    if t_hat <= 0.0:
        return BinaryVerdict.from_pvalue(1.0, level=alpha)
    z_card = table.z_card
    shape = (table.x_card, table.y_card)
    probs = [kernel.values[z].ravel() for z in range(z_card)]
    exceed = 0
    for b in range(B):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(b,)))
        resampled = np.empty((z_card,) + shape)
        for z in range(z_card):
            draw = rng.multinomial(int(totals[z]), probs[z]).reshape(shape)
            resampled[z] = draw / totals[z]
        t_star = float(resampled.max(axis=0).sum(axis=1).max()) - 1.0
        if t_star - t_hat >= t_hat:
            exceed += 1
    p_value = (1 + exceed) / (B + 1)
    return BinaryVerdict.from_pvalue(p_value, level=alpha)


@dataclass(frozen=True)
class ManskiInterval:
    """Sharp observational bounds on P(Y=1 | do(X=1)).

    ``lower`` is the observed P(Y=1, X=1); ``width`` is the observed
    P(X != 1), exactly; ``upper = lower + width`` in float arithmetic.
    """

    lower: float
    upper: float
    width: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValidationError(
                f"bounds must satisfy 0 <= lower <= upper <= 1, got [{self.lower}, {self.upper}]"
            )
        if self.width < 0.0:
            raise ValidationError("width must be nonnegative")

    def to_json_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


def manski_bounds(table: Union[ContingencyTable, np.ndarray]) -> ManskiInterval:
    """Bounds on P(Y=1 | do(X=1)) from a 2x2 table of counts or probabilities.

    Accepts a binary :class:`ContingencyTable` over (X, Y) or a 2x2 array of
    joint probabilities (rows = X, columns = Y).  The lower bound is
    P(Y=1, X=1); the width is P(X != 1), the mass on which the treated
    outcome is unobserved.
    """
    if isinstance(table, ContingencyTable):
        if table.has_instrument:
            raise ValidationError("efficacy bounds expect a table over (X, Y) only")
        if table.counts.shape != (2, 2):
            raise ValidationError("efficacy bounds need binary X and Y")
        n = table.n
        if n == 0:
            raise ValidationError("cannot form bounds from an empty table")
        lower = table.counts[1, 1] / n
        width = (n - table.counts[1, 0] - table.counts[1, 1]) / n
    else:
        joint = np.asarray(table, dtype=float)
        if joint.shape != (2, 2):
            raise ValidationError("joint must be 2x2 (rows = X, columns = Y)")
        if np.any(joint < 0.0) or abs(float(joint.sum()) - 1.0) > 1e-9:
            raise ValidationError("joint must be a probability table summing to 1")
        lower = float(joint[1, 1])
        width = float(joint[0, 0] + joint[0, 1])
        return ManskiInterval(lower=lower, upper=min(1.0, lower + width), width=width)
    return ManskiInterval(lower=lower, upper=lower + width, width=width)


@dataclass(frozen=True)
class ConfidenceInterval:
    """A two-sided confidence interval for a proportion."""

    lo: float
    hi: float
    level: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValidationError(f"level must be in (0, 1), got {self.level}")
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ValidationError(f"interval must satisfy 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")


def wilson_interval(k: int, n: int, level: float) -> ConfidenceInterval:
    """Wilson score interval for a binomial proportion.

    Always contains k/n.  The endpoints are pinned to 0 and 1 exactly at
    k = 0 and k = n respectively.
    """
    k, n = int(k), int(n)
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not 0 <= k <= n:
        raise ValidationError(f"k must satisfy 0 <= k <= n, got k={k}")
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must be in (0, 1), got {level}")
    z = float(norm.ppf(0.5 + level / 2.0))
    phat = k / n
    z2n = z * z / n
    denom = 1.0 + z2n
    center = (phat + z2n / 2.0) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z2n / (4.0 * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return ConfidenceInterval(lo=lo, hi=hi, level=level)


def naive_manski_ternary(table: ContingencyTable, c: float, level: float) -> Outcome:
    """Three-outcome baseline from confidence intervals on the efficacy bounds.

    Builds a Wilson lower confidence bound for the efficacy lower bound
    P(Y=1, X=1) and a Wilson upper confidence bound for the efficacy upper
    bound P(Y=1, X=1) + P(X != 1) (the latter treated as a single binomial
    count).  If the threshold c sits at or below the lower confidence bound,
    the efficacy is confidently at least c (outcome 0); if c sits above the
    upper confidence bound, the efficacy is confidently below c (outcome 1);
    otherwise the data cannot separate the hypotheses (outcome 2).
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"threshold c must be in [0, 1], got {c}")
    if isinstance(table, ContingencyTable) and (table.has_instrument or table.counts.shape != (2, 2)):
        raise ValidationError("the baseline needs a binary table over (X, Y)")
    n = table.n
    if n == 0:
        raise ValidationError("cannot run the baseline on an empty table")
    k_lower = int(table.counts[1, 1])
    k_upper = int(n - table.counts[1, 0])
    lower_cb = wilson_interval(k_lower, n, level).lo
    upper_cb = wilson_interval(k_upper, n, level).hi
    if c <= lower_cb:
        return Outcome.DONT_REJECT
    if c > upper_cb:
        return Outcome.REJECT
    return Outcome.UNIDENTIFIABLE
