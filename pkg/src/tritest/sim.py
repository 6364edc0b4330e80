"""Monte-Carlo study of the efficacy-threshold test's detection probability.

Nature is modeled by response functions: a binary cause X together with one
of the four functions {always 0, always 1, copy X, negate X} for the binary
effect Y.  A distribution over the resulting 8 atoms (an exogenous
confounder) induces an exact observational joint over (X, Y), whose true
region for a threshold c is computable in closed form.  The study samples
such distributions from a symmetric Dirichlet, draws i.i.d. datasets of
growing size from each, runs the three-outcome efficacy test (and optionally
the naive interval baseline) on the same datasets, and reports the
probability of correct detection per threshold, true region and sample size.

Determinism: every work unit (one sampled distribution) derives its own
generator from the study seed and a counter, so scheduling order cannot
change any result; aggregation happens once, in index order, after all units
finish.  ``run_pcd_study`` is therefore bit-identical across ``n_jobs``.

This module also houses synthetic binary tests with dial-in error rates.
They ignore the data entirely and are only useful for one thing: empirically
confirming that composed two-stage tests respect the analytic per-cell error
bounds.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO

import numpy as np

from .core import PlanKind, Region, TwoStagePlan
from .errors import ConfigurationError, ValidationError
from .procedures import tec_region_of, tec_ternary
from .stats import ContingencyTable, naive_manski_ternary

__all__ = [
    "ResponseFunctionDist",
    "SimConfig",
    "PcdPoint",
    "PcdCurve",
    "SyntheticBinaryTest",
    "sample_response_dist",
    "joint_from_response",
    "run_pcd_study",
    "validate_bound_table",
]

# Atom layout: index = 4 * u_x + u_y, with u_y in the order
# [always 0, always 1, copy X, negate X].
_UY_CONST0, _UY_CONST1, _UY_COPY, _UY_NEGATE = 0, 1, 2, 3


@dataclass(frozen=True)
class ResponseFunctionDist:
    """A distribution over the 8 (cause value, response function) atoms."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (8,):
            raise ValidationError(f"need 8 atom probabilities, got shape {probs.shape}")
        if np.any(probs < 0.0):
            raise ValidationError("atom probabilities must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValidationError(f"atom probabilities must sum to 1, got {probs.sum()!r}")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)


def sample_response_dist(
    rng: np.random.Generator, concentration: float = 0.125
) -> ResponseFunctionDist:
    """One draw from the symmetric Dirichlet over the 8 atoms.

    Implemented as normalized Gamma variates.  Low concentrations put most
    mass near the simplex corners, giving the study a good spread of easy
    and near-boundary distributions.
    """
    if concentration <= 0.0:
        raise ValidationError(f"concentration must be positive, got {concentration}")
    while True:
        g = rng.gamma(concentration, size=8)
        total = g.sum()
        if total > 0.0:
            return ResponseFunctionDist(g / total)


def joint_from_response(d: ResponseFunctionDist) -> np.ndarray:
    """Exact 2x2 observational joint over (X, Y) induced by the atom masses.

    X = the cause atom value; Y = its response function applied to X.  Each
    joint cell is the sum of exactly two atom masses, so the cells partition
    the total mass and each cell is the correctly rounded sum of its atoms.
    Returns an array with rows = X, columns = Y.
    """
    p = d.probs
    return np.array(
        [
            [p[0 + _UY_CONST0] + p[0 + _UY_COPY], p[0 + _UY_CONST1] + p[0 + _UY_NEGATE]],
            [p[4 + _UY_CONST0] + p[4 + _UY_NEGATE], p[4 + _UY_CONST1] + p[4 + _UY_COPY]],
        ]
    )


@dataclass(frozen=True)
class SimConfig:
    """Everything that defines one detection-probability study.

    ``boundary_margin`` excludes sampled distributions whose joint sits
    within that distance of a region boundary for a given threshold; the
    default 0 keeps every draw.  ``naive_level`` is the two-sided confidence
    level of the baseline's Wilson intervals; 0.95 spends the same total
    error budget as the default stage levels.
    """

    n_dist: int
    sample_sizes: tuple
    c_values: tuple
    alpha1: float = 0.025
    alpha2: float = 0.025
    dirichlet_concentration: float = 0.125
    seed: int = 0
    boundary_margin: float = 0.0
    include_naive: bool = False
    naive_level: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        if self.n_dist < 1:
            raise ValidationError(f"n_dist must be >= 1, got {self.n_dist}")
        if not self.sample_sizes:
            raise ValidationError("sample_sizes must be nonempty")
        if any(n < 1 for n in self.sample_sizes):
            raise ValidationError("sample sizes must be >= 1")
        if any(b >= a for a, b in zip(self.sample_sizes[1:], self.sample_sizes)):
            raise ValidationError("sample sizes must be strictly ascending")
        if not self.c_values:
            raise ValidationError("c_values must be nonempty")
        if any(not 0.0 <= c <= 1.0 for c in self.c_values):
            raise ValidationError("thresholds must lie in [0, 1]")
        if len(set(self.c_values)) != len(self.c_values):
            raise ValidationError("thresholds must be distinct")
        for name in ("alpha1", "alpha2", "naive_level"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValidationError(f"{name} must be in (0, 1), got {v}")
        if self.dirichlet_concentration <= 0.0:
            raise ValidationError("dirichlet_concentration must be positive")
        if self.seed < 0:
            raise ValidationError(f"seed must be nonnegative, got {self.seed}")
        if self.boundary_margin < 0.0:
            raise ValidationError(f"boundary_margin must be >= 0, got {self.boundary_margin}")

    def to_json_dict(self) -> dict:
        return {
            "n_dist": self.n_dist,
            "sample_sizes": list(self.sample_sizes),
            "c_values": list(self.c_values),
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "dirichlet_concentration": self.dirichlet_concentration,
            "seed": self.seed,
            "boundary_margin": self.boundary_margin,
            "include_naive": self.include_naive,
            "naive_level": self.naive_level,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SimConfig":
        if not isinstance(data, dict):
            raise ValidationError("config document must be a JSON object")
        known = {
            "n_dist",
            "sample_sizes",
            "c_values",
            "alpha1",
            "alpha2",
            "dirichlet_concentration",
            "seed",
            "boundary_margin",
            "include_naive",
            "naive_level",
        }
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        missing = {"n_dist", "sample_sizes", "c_values"} - set(data)
        if missing:
            raise ValidationError(f"config is missing required keys: {sorted(missing)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "SimConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"config is not valid JSON: {exc}") from exc
        return cls.from_json_dict(data)


@dataclass(frozen=True)
class PcdPoint:
    """One aggregated cell of the study: a (c, region, n, method) combination."""

    c: float
    region: int
    n: int
    pcd: float
    count: int
    stderr: float
    method: str


_CSV_HEADER = "c,region,n,pcd,count,stderr,method"


@dataclass(frozen=True)
class PcdCurve:
    """The full grid of aggregated detection probabilities."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def get(self, c: float, region: int, n: int, method: str = "two_stage") -> PcdPoint:
        for p in self.points:
            if p.c == c and p.region == int(region) and p.n == n and p.method == method:
                return p
        raise KeyError(f"no point for c={c}, region={region}, n={n}, method={method!r}")

    def write_csv(self, fh: IO[str]) -> None:
        fh.write(_CSV_HEADER + "\n")
        for p in self.points:
            fh.write(
                f"{p.c!r},{p.region},{p.n},{p.pcd!r},{p.count},{p.stderr!r},{p.method}\n"
            )

    def to_csv_file(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            self.write_csv(fh)


def _near_boundary(joint: np.ndarray, c: float, margin: float) -> bool:
    p11 = float(joint[1, 1])
    p10 = float(joint[1, 0])
    return abs(p10 - (1.0 - c)) <= margin or abs(p11 - c) <= margin


def _run_one_dist(cfg: SimConfig, i: int, region_of: np.ndarray, correct: np.ndarray) -> None:
    """Fill row i of the result arrays; independent of every other row."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(i,)))
    dist = sample_response_dist(rng, cfg.dirichlet_concentration)
    joint = joint_from_response(dist)
    flat = joint.ravel()
    for ci, c in enumerate(cfg.c_values):
        if cfg.boundary_margin > 0.0 and _near_boundary(joint, c, cfg.boundary_margin):
            region_of[i, ci] = -1
        else:
            region_of[i, ci] = int(tec_region_of(joint, c))
    for ni, n in enumerate(cfg.sample_sizes):
        table = ContingencyTable(rng.multinomial(n, flat).reshape(2, 2))
        for ci, c in enumerate(cfg.c_values):
            true_region = region_of[i, ci]
            if true_region < 0:
                continue
            res = tec_ternary(table, c, cfg.alpha1, cfg.alpha2)
            correct[0, i, ci, ni] = int(res.outcome) == true_region
            if cfg.include_naive:
                out = naive_manski_ternary(table, c, cfg.naive_level)
                correct[1, i, ci, ni] = int(out) == true_region


def run_pcd_study(cfg: SimConfig, n_jobs: int = 1) -> PcdCurve:
    """Run the full study and aggregate detection probabilities.

    Each sampled distribution is one independent work unit seeded by
    (cfg.seed, unit index); the same drawn datasets feed every threshold and
    both methods, so method curves are paired.  ``n_jobs`` > 1 evaluates
    units in a thread pool; results are identical to serial execution.
    Points are emitted in threshold order, then region 0..2, then sample
    size, then method.
    """
    if n_jobs < 1:
        raise ValidationError(f"n_jobs must be >= 1, got {n_jobs}")
    n_methods = 2 if cfg.include_naive else 1
    region_of = np.full((cfg.n_dist, len(cfg.c_values)), -2, dtype=np.int8)
    correct = np.zeros(
        (n_methods, cfg.n_dist, len(cfg.c_values), len(cfg.sample_sizes)), dtype=bool
    )
    if n_jobs == 1:
        for i in range(cfg.n_dist):
            _run_one_dist(cfg, i, region_of, correct)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            futures = [
                pool.submit(_run_one_dist, cfg, i, region_of, correct)
                for i in range(cfg.n_dist)
            ]
            for fut in futures:
                fut.result()
    method_names = ("two_stage", "naive")[:n_methods]
    points = []
    for ci, c in enumerate(cfg.c_values):
        for region in (0, 1, 2):
            mask = region_of[:, ci] == region
            count = int(np.count_nonzero(mask))
            for ni, n in enumerate(cfg.sample_sizes):
                for mi, method in enumerate(method_names):
                    if count == 0:
                        pcd = math.nan
                        stderr = math.nan
                    else:
                        hits = int(np.count_nonzero(correct[mi, mask, ci, ni]))
                        pcd = hits / count
                        stderr = math.sqrt(pcd * (1.0 - pcd) / count)
                    points.append(
                        PcdPoint(
                            c=c, region=region, n=n, pcd=pcd,
                            count=count, stderr=stderr, method=method,
                        )
                    )
    return PcdCurve(tuple(points))


@dataclass(frozen=True)
class SyntheticBinaryTest:
    """A data-blind binary test with exactly known error rates.

    When the truth lies in its null set it rejects with probability
    ``alpha_true``; in its alternative set it accepts with probability
    ``beta_true``; anywhere else it flips a fair coin.  Only useful for
    validating composition error bounds, where the stage rates must be knobs.
    """

    alpha_true: float
    beta_true: float
    null_regions: frozenset
    alt_regions: frozenset

    def __post_init__(self):
        for name in ("alpha_true", "beta_true"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")
        null = frozenset(Region(r) for r in self.null_regions)
        alt = frozenset(Region(r) for r in self.alt_regions)
        object.__setattr__(self, "null_regions", null)
        object.__setattr__(self, "alt_regions", alt)
        if not null or not alt or (null & alt):
            raise ValidationError("null and alternative sets must be nonempty and disjoint")

    def reject_prob(self, truth: Region) -> float:
        truth = Region(truth)
        if truth in self.null_regions:
            return self.alpha_true
        if truth in self.alt_regions:
            return 1.0 - self.beta_true
        return 0.5


def validate_bound_table(
    plan: TwoStagePlan,
    s1: SyntheticBinaryTest,
    s2: SyntheticBinaryTest,
    truth: Region,
    trials: int,
    seed: int,
) -> np.ndarray:
    """Empirical outcome frequencies of the composed test under a fixed truth.

    Runs the two synthetic stages ``trials`` times and returns the length-3
    frequency vector over outcomes: one column of an empirical error matrix.
    Stage-2 draws are only consulted on trials where stage 1 does not
    conclude the first region, so the result matches the lazy composition.
    Callers compare the off-diagonal entries against the analytic bound table.
    """
    if trials < 1000:
        raise ValidationError(f"need at least 1000 trials, got {trials}")
    if s1.null_regions != plan.stage1_null or s1.alt_regions != plan.stage1_alt:
        raise ConfigurationError(
            "stage-1 synthetic test's region partition does not match the plan"
        )
    if s2.null_regions != frozenset({plan.second_null}) or s2.alt_regions != frozenset(
        {plan.second_alt}
    ):
        raise ConfigurationError(
            "stage-2 synthetic test's region partition does not match the plan"
        )
    truth = Region(truth)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    reject1 = rng.random(trials) < s1.reject_prob(truth)
    reject2 = rng.random(trials) < s2.reject_prob(truth)
    if plan.kind is PlanKind.SPLIT_ALTERNATIVE:
        concluded_first = ~reject1
    else:
        concluded_first = reject1
    outcomes = np.where(
        concluded_first,
        int(plan.first),
        np.where(reject2, int(plan.second_alt), int(plan.second_null)),
    )
    freqs = np.bincount(outcomes, minlength=3).astype(float) / trials
    return freqs
