"""Structural-break detection in the mean of a series.

Three detectors share one Gaussian change-in-mean cost with prefix-sum
segment evaluation:

* ``detect_pelt``      — penalized optimal partitioning with candidate pruning
* ``detect_binseg``    — greedy recursive binary segmentation
* ``detect_cusum``     — recursive cumulative-sum test

``exhaustive_optimal_partition`` is the quadratic dynamic program over the
same objective; it exists as an oracle for testing ``detect_pelt`` and is
guarded to short series.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numba import njit

from .core import ChangepointSet, TimeSeries
from .errors import InvalidConfig, OracleSizeExceeded, SeriesTooShort

#: Asymptotic 95% crossing level of the Brownian-bridge sup statistic.
DEFAULT_CUSUM_CRITICAL = 1.358

#: Gaussian consistency constant: median absolute deviation -> sigma.
MAD_TO_SIGMA = 1.0 / 0.6745


def _values(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return np.asarray(series.values, dtype=float)
    return np.asarray(series, dtype=float)


def robust_sigma(values: np.ndarray) -> float:
    """Noise scale from the MAD of first differences.

    sigma_hat = MAD(diff(y)) / (sqrt(2) * 0.6745); differencing removes
    slowly-varying structure so level shifts do not inflate the estimate.
    """
    d = np.diff(values)
    if d.size == 0:
        return 0.0
    mad = float(np.median(np.abs(d - np.median(d))))
    return mad * MAD_TO_SIGMA / math.sqrt(2.0)


@dataclass(frozen=True)
class PenaltyPolicy:
    """Per-changepoint penalty: fixed value, or BIC-style auto resolution."""

    mode: str = "auto"
    value: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("auto", "fixed"):
            raise InvalidConfig(f"unknown penalty mode {self.mode!r}")
        if self.mode == "fixed" and (self.value is None or self.value <= 0):
            raise InvalidConfig("fixed penalty requires a positive value")

    @classmethod
    def coerce(cls, penalty) -> "PenaltyPolicy":
        if isinstance(penalty, PenaltyPolicy):
            return penalty
        if penalty == "auto" or penalty is None:
            return cls("auto")
        return cls("fixed", float(penalty))

    def resolve(self, values: np.ndarray) -> float:
        """beta = 2 * sigma_hat^2 * ln(n); falls back to ln(n) when sigma_hat = 0."""
        if self.mode == "fixed":
            return float(self.value)
        n = len(values)
        sigma = robust_sigma(values)
        if sigma == 0.0:
            return math.log(n)
        return 2.0 * sigma * sigma * math.log(n)


class CostModel:
    """Gaussian change-in-mean segment cost with O(1) evaluation.

    cost(a, b) = sum(y^2) - sum(y)^2 / m over the closed range [a, b].
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        self.n = values.size
        self.s1 = np.concatenate(([0.0], np.cumsum(values)))
        self.s2 = np.concatenate(([0.0], np.cumsum(values * values)))

    def cost(self, a: int, b: int) -> float:
        m = b - a + 1
        s = self.s1[b + 1] - self.s1[a]
        q = self.s2[b + 1] - self.s2[a]
        return q - s * s / m

    def cost_starts(self, starts: np.ndarray, b: int) -> np.ndarray:
        """Vectorized cost(a, b) over an array of segment starts."""
        m = b + 1 - starts
        s = self.s1[b + 1] - self.s1[starts]
        q = self.s2[b + 1] - self.s2[starts]
        return q - s * s / m


def _check_length(n: int, min_segment_length: int):
    if min_segment_length < 1:
        raise InvalidConfig("min_segment_length must be >= 1")
    if n < 2 * min_segment_length:
        raise SeriesTooShort(
            f"need n >= 2*min_segment_length ({2 * min_segment_length}), got {n}"
        )


@njit(cache=True)
def _pelt_core(y, beta, min_seg):  # pragma: no cover - exercised via detect_pelt
    n = y.size
    s1 = np.empty(n + 1)
    s2 = np.empty(n + 1)
    s1[0] = 0.0
    s2[0] = 0.0
    for i in range(n):
        s1[i + 1] = s1[i] + y[i]
        s2[i + 1] = s2[i] + y[i] * y[i]

    inf = np.inf
    F = np.empty(n + 1)
    F[0] = -beta
    for t in range(1, n + 1):
        F[t] = inf
    last = np.zeros(n + 1, dtype=np.int64)
    cand = np.empty(n + 1, dtype=np.int64)
    ncand = 0

    for t in range(min_seg, n + 1):
        s_new = t - min_seg
        if F[s_new] < inf:
            cand[ncand] = s_new
            ncand += 1
        best = inf
        best_s = 0
        for j in range(ncand):
            s = cand[j]
            m = t - s
            ss = s1[t] - s1[s]
            c = F[s] + (s2[t] - s2[s]) - ss * ss / m
            if c < best:  # strict: smallest index wins ties (cand ascending)
                best = c
                best_s = s
        F[t] = best + beta
        last[t] = best_s
        # prune candidates that can never again be optimal (K = 0)
        k = 0
        for j in range(ncand):
            s = cand[j]
            m = t - s
            ss = s1[t] - s1[s]
            c = F[s] + (s2[t] - s2[s]) - ss * ss / m
            if c <= F[t]:
                cand[k] = s
                k += 1
        ncand = k

    nb = 0
    t = n
    path = np.empty(n, dtype=np.int64)
    while last[t] > 0:
        s = last[t]
        path[nb] = s - 1
        nb += 1
        t = s
    return F[n], path[:nb][::-1].copy()


def detect_pelt(
    series,
    penalty: Union[str, float, PenaltyPolicy] = "auto",
    min_segment_length: int = 10,
) -> ChangepointSet:
    """Optimal penalized segmentation with PELT candidate pruning.

    Minimizes sum of segment costs plus beta per changepoint; identical
    to the exhaustive dynamic program's optimum. Ties between equally good
    split points resolve to the smallest index.
    """
    y = _values(series)
    n = y.size
    _check_length(n, min_segment_length)
    beta = PenaltyPolicy.coerce(penalty).resolve(y)
    _, breaks = _pelt_core(y, beta, min_segment_length)
    return ChangepointSet(breaks=tuple(int(b) for b in breaks), n=n)


def pelt_objective(series, breaks, penalty="auto") -> float:
    """Objective value (total cost + beta per break) of a given segmentation."""
    y = _values(series)
    beta = PenaltyPolicy.coerce(penalty).resolve(y)
    cm = CostModel(y)
    bounds = [-1, *breaks, y.size - 1]
    total = len(breaks) * beta
    for a, b in zip(bounds[:-1], bounds[1:]):
        total += cm.cost(a + 1, b)
    return total


def exhaustive_optimal_partition(
    series,
    penalty: Union[str, float, PenaltyPolicy] = "auto",
    min_segment_length: int = 10,
    max_n: int = 2000,
) -> ChangepointSet:
    """Quadratic dynamic program over all admissible segmentations.

    Test oracle for ``detect_pelt``: same objective, same tie-breaking, no
    pruning. Refuses series longer than ``max_n``.
    """
    y = _values(series)
    n = y.size
    _check_length(n, min_segment_length)
    if n > max_n:
        raise OracleSizeExceeded(f"oracle limited to n <= {max_n}, got {n}")
    beta = PenaltyPolicy.coerce(penalty).resolve(y)
    cm = CostModel(y)

    F = np.full(n + 1, np.inf)
    F[0] = -beta
    last = np.zeros(n + 1, dtype=int)
    for t in range(min_segment_length, n + 1):
        starts = np.arange(0, t - min_segment_length + 1)
        feasible = np.isfinite(F[starts])
        if not feasible.any():
            continue
        starts = starts[feasible]
        costs = F[starts] + cm.cost_starts(starts, t - 1)
        j = int(np.argmin(costs))  # first minimum: smallest index on ties
        F[t] = costs[j] + beta
        last[t] = starts[j]

    breaks = []
    t = n
    while last[t] > 0:
        s = last[t]
        breaks.append(s - 1)
        t = s
    return ChangepointSet(breaks=tuple(reversed(breaks)), n=n)


def detect_binseg(
    series,
    penalty: Union[str, float, PenaltyPolicy] = "auto",
    min_segment_length: int = 10,
    max_breaks: Optional[int] = None,
) -> ChangepointSet:
    """Greedy recursive binary segmentation.

    Repeatedly splits the segment whose best split gives the largest cost
    reduction; a split is accepted only when the reduction exceeds the
    penalty and both children respect ``min_segment_length``.
    """
    y = _values(series)
    n = y.size
    _check_length(n, min_segment_length)
    beta = PenaltyPolicy.coerce(penalty).resolve(y)
    cm = CostModel(y)
    limit = n if max_breaks is None else max_breaks

    def best_split(a, b):
        # candidate break k leaves children [a,k], [k+1,b]
        ks = np.arange(a + min_segment_length - 1, b - min_segment_length + 1)
        if ks.size == 0:
            return None
        seg_cost = cm.cost(a, b)
        m_l = ks - a + 1
        s_l = cm.s1[ks + 1] - cm.s1[a]
        q_l = cm.s2[ks + 1] - cm.s2[a]
        left = q_l - s_l * s_l / m_l
        m_r = b - ks
        s_r = cm.s1[b + 1] - cm.s1[ks + 1]
        q_r = cm.s2[b + 1] - cm.s2[ks + 1]
        right = q_r - s_r * s_r / m_r
        gains = seg_cost - left - right
        j = int(np.argmax(gains))
        return float(gains[j]), int(ks[j])

    # max-heap on gain; ties resolve to the smaller break index
    heap = []
    first = best_split(0, n - 1)
    if first is not None and first[0] > beta:
        heapq.heappush(heap, (-first[0], first[1], 0, n - 1))
    breaks = []
    while heap and len(breaks) < limit:
        gain, k, a, b = heapq.heappop(heap)
        breaks.append(k)
        for ca, cb in ((a, k), (k + 1, b)):
            s = best_split(ca, cb)
            if s is not None and s[0] > beta:
                heapq.heappush(heap, (-s[0], s[1], ca, cb))
    return ChangepointSet(breaks=tuple(sorted(breaks)), n=n)


def detect_cusum(
    series,
    critical_value: float = DEFAULT_CUSUM_CRITICAL,
    min_segment_length: int = 10,
) -> ChangepointSet:
    """Recursive CUSUM test for mean shifts.

    Within each segment the statistic is max_k |S_k| / (sigma_hat sqrt(m))
    with S_k the partial sums of deviations from the segment mean; a crossing
    above ``critical_value`` places a break at the argmax and recurses into
    both halves. The argmax is restricted to splits that respect
    ``min_segment_length``.
    """
    y = _values(series)
    n = y.size
    _check_length(n, min_segment_length)
    if critical_value <= 0:
        raise InvalidConfig("critical_value must be positive")
    L = min_segment_length
    breaks = []

    def recurse(a, b):
        m = b - a + 1
        if m < 2 * L:
            return
        seg = y[a : b + 1]
        sigma = robust_sigma(seg)
        if sigma == 0.0:
            sigma = float(np.std(seg))
            if sigma == 0.0:
                return  # constant segment: Q = 0
        dev = np.cumsum(seg - seg.mean())
        # break k means left child [a, k]; admissible child lengths >= L
        ks = np.arange(L - 1, m - L)
        stats = np.abs(dev[ks]) / (sigma * math.sqrt(m))
        j = int(np.argmax(stats))
        if stats[j] > critical_value:
            k = a + int(ks[j])
            breaks.append(k)
            recurse(a, k)
            recurse(k + 1, b)

    recurse(0, n - 1)
    return ChangepointSet(breaks=tuple(sorted(breaks)), n=n)


def detect(series, method: str, penalty="auto", min_segment_length: int = 10,
           critical_value: float = DEFAULT_CUSUM_CRITICAL,
           max_breaks: Optional[int] = None) -> ChangepointSet:
    """Dispatch on method name; 'none' returns the empty break set."""
    n = len(_values(series))
    if method == "none":
        return ChangepointSet(breaks=(), n=n)
    if method == "pelt":
        return detect_pelt(series, penalty, min_segment_length)
    if method == "binseg":
        return detect_binseg(series, penalty, min_segment_length, max_breaks)
    if method == "cusum":
        return detect_cusum(series, critical_value, min_segment_length)
    raise InvalidConfig(f"unknown changepoint method {method!r}")
