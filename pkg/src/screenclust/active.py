"""Margin-based informativeness with distribution-mirroring batch selection."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class MarginReport:
    point: int
    margin: float
    centroid_a: int
    centroid_b: int


@dataclass(frozen=True)
class BatchSpec:
    batch_size: int = 200
    slack: int = 1

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.slack < 0:
            raise ValueError("slack must be >= 0")


def margins(points, centroids, mode: str = "nearest") -> list[MarginReport]:
    """Per-point margin between its two nearest centroids, sorted ascending.

    Small margins flag points whose cluster assignment is most ambiguous.
    ``mode="farthest"`` switches to the gap between the two farthest
    centroids instead (kept for comparison runs; not the default semantics).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    k = centroids.shape[0]
    if k < 2:
        raise ValueError("margins require at least 2 centroids")
    if mode not in ("nearest", "farthest"):
        raise ValueError(f"unknown margin mode {mode!r}")

    p_sq = np.einsum("ij,ij->i", points, points)
    c_sq = np.einsum("ij,ij->i", centroids, centroids)
    d2 = np.maximum(p_sq[:, None] + c_sq[None, :] - 2.0 * points @ centroids.T, 0.0)
    d = np.sqrt(d2)

    if mode == "nearest":
        order = np.argsort(d, axis=1, kind="stable")[:, :2]
    else:
        order = np.argsort(d, axis=1, kind="stable")[:, -1:-3:-1]
    pair = np.take_along_axis(d, order, axis=1)
    gap = np.abs(pair[:, 1] - pair[:, 0])

    reports = [
        MarginReport(point=i, margin=float(gap[i]),
                     centroid_a=int(order[i, 0]), centroid_b=int(order[i, 1]))
        for i in range(points.shape[0])
    ]
    reports.sort(key=lambda r: (r.margin, r.point))
    return reports


def _largest_remainder_quotas(shares: np.ndarray, n: int) -> np.ndarray:
    """Integer apportionment of n by fractional shares (sums to exactly n)."""
    exact = shares * n
    floors = np.floor(exact).astype(np.int64)
    remainder = n - int(floors.sum())
    if remainder > 0:
        # largest fractional parts win the leftover seats; ties to lowest index
        frac = exact - floors
        order = np.lexsort((np.arange(frac.size), -frac))
        floors[order[:remainder]] += 1
    return floors


def select_batch(reports: Sequence[MarginReport], assignments, spec: BatchSpec,
                 exclude: set = frozenset()) -> list[int]:
    """Greedy lowest-margin selection under per-cluster quotas.

    Quotas mirror the cluster distribution of the unlabeled pool
    (largest-remainder apportionment of the batch size). The walk runs in
    up to three ascending passes: exact quotas first, then quotas padded by
    ``spec.slack`` (only reachable when some cluster's supply fell short of
    its quota), then unconstrained, so the batch size is met whenever the
    pool allows. Slack never lets one cluster starve another below quota.
    """
    assignments = np.asarray(assignments, dtype=np.int64)
    n = spec.batch_size
    pool = [r for r in reports if r.point not in exclude]
    if len(pool) < n:
        raise ValueError(f"unlabeled pool ({len(pool)}) smaller than batch size ({n})")

    k = int(assignments.max()) + 1
    pool_clusters = np.bincount([assignments[r.point] for r in pool], minlength=k)
    shares = pool_clusters / pool_clusters.sum()
    quotas = _largest_remainder_quotas(shares, n)

    selected: list[int] = []
    taken = np.zeros(k, dtype=np.int64)
    chosen = set()
    for cap in (quotas, quotas + spec.slack, None):
        for r in pool:
            if len(selected) == n:
                return selected
            if r.point in chosen:
                continue
            c = assignments[r.point]
            if cap is None or taken[c] < cap[c]:
                selected.append(r.point)
                chosen.add(r.point)
                taken[c] += 1
    return selected
