"""Cost-cognizant fault detection metrics and strategy comparison statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata

ALPHA = 0.05
MIN_WILCOXON_N = 3


class NoFaultsError(ValueError):
    """APFD_c is undefined for a suite in which no test detects a fault."""


@dataclass(frozen=True)
class FaultProfile:
    """Per-test fault detection; every unsafe test reveals one distinct fault."""

    detects: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "detects", np.asarray(self.detects, dtype=bool))

    @property
    def fault_count(self) -> int:
        return int(self.detects.sum())

    @classmethod
    def from_scenarios(cls, scenarios) -> "FaultProfile":
        missing = [s.id for s in scenarios if s.label is None]
        if missing:
            raise ValueError(f"scenarios without a safe/unsafe label: {missing[:5]}")
        return cls(np.array([s.is_unsafe for s in scenarios], dtype=bool))


def _ordered(order, cost, faults: FaultProfile) -> tuple[np.ndarray, np.ndarray]:
    order = np.asarray(order, dtype=np.intp)
    cost = np.asarray(cost, dtype=float)
    if len(order) != len(cost) or len(order) != len(faults.detects):
        raise ValueError("order, cost and fault profile must cover the same tests")
    if not (cost > 0).all():
        raise ValueError("all test costs must be positive")
    return cost[order], faults.detects[order]


def apfd_c(order, cost, faults: FaultProfile) -> float:
    """Cost-cognizant APFD of ``order`` with equal fault severities."""
    t, hit = _ordered(order, cost, faults)
    m = int(hit.sum())
    if m == 0:
        raise NoFaultsError("no test in the suite detects a fault")
    remaining = np.cumsum(t[::-1])[::-1]  # cost of positions j..n
    numerator = np.sum(remaining[hit] - 0.5 * t[hit])
    return float(numerator / (remaining[0] * m))


def detection_curve(order, cost, faults: FaultProfile) -> list[tuple[float, int]]:
    """(cumulative cost, cumulative faults) after each executed test."""
    t, hit = _ordered(order, cost, faults)
    return list(zip(np.cumsum(t).tolist(), np.cumsum(hit).astype(int).tolist()))


def faults_within_budget(order, cost, faults: FaultProfile, fraction: float) -> int:
    """Faults revealed by the tests that complete within ``fraction`` of total cost."""
    t, hit = _ordered(order, cost, faults)
    spent = np.cumsum(t)
    done = spent <= fraction * spent[-1] * (1 + 1e-12)
    return int(hit[done].sum())


def a12(sample_a, sample_b) -> float:
    """Vargha-Delaney A12: chance a draw from A beats one from B, ties half."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("A12 needs two non-empty samples")
    greater = np.count_nonzero(a[:, None] > b[None, :])
    equal = np.count_nonzero(a[:, None] == b[None, :])
    return (2 * greater + equal) / (2 * a.size * b.size)


@dataclass(frozen=True)
class RankSumResult:
    statistic: float | None  # rank sum of the first sample
    p_value: float | None
    significant: bool
    status: str = "ok"  # or "insufficient-n"


def wilcoxon_rank_sum(sample_a, sample_b, alpha: float = ALPHA) -> RankSumResult:
    """Two-sided rank-sum test, normal approximation with tie and continuity
    corrections. Samples with fewer than three observations are not tested."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    n1, n2 = a.size, b.size
    if n1 < MIN_WILCOXON_N or n2 < MIN_WILCOXON_N:
        return RankSumResult(None, None, False, "insufficient-n")
    ranks = rankdata(np.concatenate([a, b]))
    w = float(ranks[:n1].sum())
    n = n1 + n2
    expected = n1 * (n + 1) / 2.0
    _, counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(counts**3 - counts)) / (n * (n - 1))
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if variance <= 0:
        return RankSumResult(w, 1.0, False)
    z = max(abs(w - expected) - 0.5, 0.0) / math.sqrt(variance)
    p = min(1.0, 2.0 * float(norm.sf(z)))
    return RankSumResult(w, p, p < alpha)


_MAGNITUDES = ((0.06, "negligible"), (0.14, "small"), (0.21, "medium"))


def magnitude(effect: float) -> str:
    """Vargha-Delaney magnitude label for an A12 value."""
    if not 0.0 <= effect <= 1.0:
        raise ValueError(f"A12 must lie in [0, 1], got {effect}")
    delta = abs(effect - 0.5)
    for bound, label in _MAGNITUDES:
        if delta < bound:
            return label
    return "large"


@dataclass(frozen=True)
class Comparison:
    strategy: str
    baseline: str
    a12: float
    p_value: float | None
    magnitude: str
    significant: bool


def compare(name_a: str, sample_a, name_b: str, sample_b) -> Comparison:
    effect = a12(sample_a, sample_b)
    test = wilcoxon_rank_sum(sample_a, sample_b)
    return Comparison(name_a, name_b, effect, test.p_value, magnitude(effect), test.significant)
