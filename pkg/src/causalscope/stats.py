"""Statistical primitives: distances, the two-sample closeness tester, and
the empirical-distribution learner.

The tester uses the collision-corrected chi-square statistic

    Z = sum over occupied atoms of ((X_i - Y_i)^2 - X_i - Y_i) / (X_i + Y_i)

with a Monte-Carlo threshold calibrated under the null by resampling both
sides from the pooled empirical distribution. Calibration absorbs the
unknown constants that an analytic threshold would need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetMismatch, InsufficientSamples, SupportMismatch
from .model import DiscreteDist
from .rng import substream

DEFAULT_BASE_CONSTANT = 5.0
DEFAULT_LEARN_CONSTANT = 2.0
DEFAULT_CALIBRATION_REPS = 500


def _aligned(p: DiscreteDist, q: DiscreteDist):
    if p.support_vars != q.support_vars or p.K != q.K:
        raise SupportMismatch(
            f"supports differ: {p.support_vars} (K={p.K}) vs {q.support_vars} (K={q.K})"
        )
    return p.probs, q.probs


def tv_distance(p: DiscreteDist, q: DiscreteDist) -> float:
    """Total variation distance: half the L1 distance."""
    a, b = _aligned(p, q)
    return float(np.abs(a - b).sum()) / 2.0


def bhattacharyya(p: DiscreteDist, q: DiscreteDist) -> float:
    a, b = _aligned(p, q)
    return float(np.sqrt(a * b).sum())


def squared_hellinger(p: DiscreteDist, q: DiscreteDist) -> float:
    """1 minus the Bhattacharyya coefficient, in [0, 1]."""
    return max(0.0, 1.0 - bhattacharyya(p, q))


@dataclass
class TestParams:
    """Knobs for one two-sample closeness test."""

    __test__ = False  # keep pytest collection away despite the name

    epsilon2_threshold: float
    delta: float
    sample_budget: int
    calibration_reps: int = DEFAULT_CALIBRATION_REPS
    base_constant: float = DEFAULT_BASE_CONSTANT

    def __post_init__(self):
        if not (0.0 < self.epsilon2_threshold <= 1.0):
            raise BudgetMismatch("epsilon2_threshold must be in (0, 1]")
        if not (0.0 < self.delta < 1.0):
            raise BudgetMismatch("delta must be in (0, 1)")
        if self.sample_budget < 1:
            raise BudgetMismatch("sample_budget must be >= 1")


@dataclass
class TestVerdict:
    decision: str  # "equal" | "far"
    statistic: float
    threshold: float
    samples_used: int


def collision_statistic(counts_x: np.ndarray, counts_y: np.ndarray) -> float:
    tot = counts_x + counts_y
    occupied = tot > 0
    x = counts_x[occupied].astype(np.float64)
    y = counts_y[occupied].astype(np.float64)
    return float((((x - y) ** 2 - x - y) / (x + y)).sum())


def sample_size_for_test(D: int, epsilon2: float, delta: float,
                         base_constant: float = DEFAULT_BASE_CONSTANT) -> int:
    """Per-side budget for distinguishing equality from H^2 >= epsilon2.

    ceil(c * min(D^(2/3)/eps^(8/3), D^(3/4)/eps^2) * (1 + ln(1/delta)))
    with eps = sqrt(epsilon2).
    """
    if D < 1 or epsilon2 <= 0 or delta <= 0 or base_constant <= 0:
        raise BudgetMismatch("all test-size inputs must be positive")
    eps = math.sqrt(epsilon2)
    core = min(D ** (2.0 / 3.0) / eps ** (8.0 / 3.0), D ** 0.75 / epsilon2)
    return int(math.ceil(base_constant * core * (1.0 + max(0.0, math.log(1.0 / delta)))))


def hellinger_two_sample_test(sa: np.ndarray, sb: np.ndarray, domain_size: int,
                              params: TestParams, seed: int) -> TestVerdict:
    """Distinguish P = Q from H^2(P,Q) >= epsilon2 at failure rate <= delta.

    ``sa`` and ``sb`` are atom-index multisets of equal size
    ``params.sample_budget``. The threshold is the (1 - delta/2) quantile of
    the statistic under ``calibration_reps`` seeded resamples of both sides
    from the pooled empirical distribution.
    """
    sa = np.asarray(sa, dtype=np.int64)
    sb = np.asarray(sb, dtype=np.int64)
    if sa.shape != (params.sample_budget,) or sb.shape != (params.sample_budget,):
        raise BudgetMismatch(
            f"need exactly {params.sample_budget} samples per side, "
            f"got {sa.shape} and {sb.shape}"
        )
    m = params.sample_budget
    counts_x = np.bincount(sa, minlength=domain_size)
    counts_y = np.bincount(sb, minlength=domain_size)
    statistic = collision_statistic(counts_x, counts_y)

    pooled = (counts_x + counts_y).astype(np.float64)
    pooled /= pooled.sum()
    rng = substream(seed, "calibration")
    # calibration_reps is a floor; the (1 - delta/2) quantile needs at least
    # 2/delta replicates to be resolvable at all
    reps = max(params.calibration_reps, math.ceil(2.0 / params.delta))
    null_counts = rng.multinomial(m, pooled, size=(reps, 2))
    diff = null_counts[:, 0, :].astype(np.float64) - null_counts[:, 1, :]
    tot = null_counts.sum(axis=1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = (diff**2 - tot) / tot
    null_stats = np.where(tot > 0, terms, 0.0).sum(axis=1)
    null_stats.sort()
    order = min(max(1, math.ceil((1.0 - params.delta / 2.0) * reps)), reps)
    threshold = float(null_stats[order - 1])
    decision = "far" if statistic > threshold else "equal"
    return TestVerdict(decision=decision, statistic=statistic,
                       threshold=threshold, samples_used=m)


def learn_sample_size(D: int, epsilon: float, delta: float,
                      c_learn: float = DEFAULT_LEARN_CONSTANT) -> int:
    """Samples for the empirical distribution to hit TV <= epsilon w.p. 1-delta."""
    if D < 1 or epsilon <= 0 or delta <= 0 or c_learn <= 0:
        raise InsufficientSamples("all learn-size inputs must be positive")
    return int(math.ceil(c_learn * (D + max(0.0, math.log(1.0 / delta))) / epsilon**2))


def learn_empirical(samples: np.ndarray, support_vars, K: int, epsilon: float,
                    delta: float, c_learn: float = DEFAULT_LEARN_CONSTANT) -> DiscreteDist:
    """Empirical frequency distribution from atom-index samples.

    Requires at least ``learn_sample_size`` samples; unseen atoms keep
    probability zero (no smoothing, which would void the TV guarantee).
    """
    samples = np.asarray(samples, dtype=np.int64)
    support_vars = tuple(int(v) for v in support_vars)
    D = K ** len(support_vars)
    need = learn_sample_size(D, epsilon, delta, c_learn)
    if samples.size < need:
        raise InsufficientSamples(f"need >= {need} samples for this (D, eps, delta), got {samples.size}")
    freqs = np.bincount(samples, minlength=D).astype(np.float64) / samples.size
    return DiscreteDist(support_vars, freqs, K)
