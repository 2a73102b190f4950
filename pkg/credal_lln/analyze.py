"""Empirical functionals of sample paths.

Finite-horizon proxies for limsup/liminf of S_n/n and for its cluster set.
Everything is exact over the realised path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_CLUSTER_EPS, DEFAULT_CONTAINMENT_EPS, REFERENCE_GAP
from .data_models import ClusterHit, ClusterReport, CredalSet, SamplePath, TailStats
from .errors import BadWindowError, EmptyInputError, EmptyPathError

logger = logging.getLogger("credal_lln.analyze")


def running_averages(path: SamplePath) -> np.ndarray:
    """Element m-1 is S_m/m, from one cumulative sum."""
    if len(path) == 0:
        raise EmptyPathError("path has no samples")
    return np.cumsum(path.xs) / np.arange(1, len(path) + 1)


def default_n0(n: int) -> int:
    return max(1, math.ceil(n / 2))


def tail_stats(path: SamplePath, n0: int) -> TailStats:
    avgs = running_averages(path)
    n = avgs.shape[0]
    if not 1 <= n0 <= n:
        raise BadWindowError(f"n0={n0} outside [1, {n}]")
    window = avgs[n0 - 1:]
    return TailStats(
        n0=n0,
        n=n,
        tail_sup=float(window.max()),
        tail_inf=float(window.min()),
        final_mean=float(avgs[-1]),
    )


def cluster_coverage(
    path: SamplePath, targets: Sequence[float], n0: int, eps: float
) -> ClusterReport:
    """For each target, the closest running average on [n0, n] and where it occurs."""
    if eps <= 0:
        raise BadWindowError(f"eps must be > 0, got {eps!r}")
    avgs = running_averages(path)
    n = avgs.shape[0]
    if not 1 <= n0 < n:
        raise BadWindowError(f"n0={n0} must satisfy 1 <= n0 < {n}")
    window = avgs[n0 - 1:]
    hits = []
    for t in targets:
        dist = np.abs(window - t)
        i = int(np.argmin(dist))
        d = float(dist[i])
        hits.append(ClusterHit(target=float(t), distance=d, m=n0 + i, hit=d <= eps))
    return ClusterReport(targets=tuple(float(t) for t in targets), hits=tuple(hits), epsilon=eps)


def _exits(stats: TailStats, mu_lower: float, mu_upper: float, eps: float) -> bool:
    return stats.tail_inf < mu_lower - eps or stats.tail_sup > mu_upper + eps


def violation_rate(
    paths: Sequence[SamplePath], mu_lower: float, mu_upper: float, eps: float, n0: int
) -> float:
    """Fraction of paths whose running average leaves [mu_lower - eps, mu_upper + eps] on [n0, n]."""
    if not paths:
        raise EmptyInputError("no paths to analyse")
    if eps <= 0:
        raise BadWindowError(f"eps must be > 0, got {eps!r}")
    bad = sum(_exits(tail_stats(p, n0), mu_lower, mu_upper, eps) for p in paths)
    logger.debug("violation rate %d/%d at eps=%r n0=%d", bad, len(paths), eps, n0)
    return bad / len(paths)


def block_increment_means(path: SamplePath, boundaries: Sequence[int]) -> np.ndarray:
    """(S_{n_k} - S_{n_{k-1}}) / (n_k - n_{k-1}) with n_0 = 0."""
    if len(path) == 0:
        raise EmptyPathError("path has no samples")
    ends = np.asarray(boundaries, dtype=np.int64)
    if ends.size == 0 or ends[0] < 1 or ends[-1] > len(path) or np.any(np.diff(ends) <= 0):
        raise BadWindowError(f"boundaries must increase within [1, {len(path)}]")
    sums = np.concatenate(([0.0], np.cumsum(path.xs)))
    starts = np.concatenate(([0], ends[:-1]))
    return (sums[ends] - sums[starts]) / (ends - starts)


def final_mean_concentration(paths: Sequence[SamplePath], mu: float, radius: float) -> float:
    if not paths:
        raise EmptyInputError("no paths to analyse")
    inside = sum(abs(float(np.mean(p.xs)) - mu) <= radius for p in paths)
    return inside / len(paths)


@dataclass(frozen=True)
class Tolerances:
    containment: float
    cluster: float


def default_tolerances(cs: CredalSet) -> Tolerances:
    """0.05 / 0.02 at a mean gap of 0.4, scaled proportionally; a zero gap keeps them unscaled."""
    gap = cs.mu_upper - cs.mu_lower
    scale = gap / REFERENCE_GAP if gap > 0 else 1.0
    return Tolerances(DEFAULT_CONTAINMENT_EPS * scale, DEFAULT_CLUSTER_EPS * scale)
