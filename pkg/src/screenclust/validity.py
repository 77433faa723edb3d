"""Internal cluster-validity indices: Silhouette, Dunn, Davies-Bouldin."""

from dataclasses import dataclass

import numpy as np


class ValidityError(ValueError):
    pass


@dataclass
class ValidityReport:
    silhouette_mean: float
    dunn: float
    davies_bouldin: float
    per_point_silhouette: np.ndarray


def _check(points, assignments):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    assignments = np.asarray(assignments, dtype=np.int64)
    if points.shape[0] != assignments.size:
        raise ValidityError("points/assignments length mismatch")
    labels = np.unique(assignments)
    if labels.size < 2:
        raise ValidityError("at least 2 clusters required")
    return points, assignments, labels


def _pairwise_dist(points: np.ndarray) -> np.ndarray:
    # explicit differences (chunked): the Gram-matrix shortcut loses ~1e-8
    # of precision to cancellation, which matters for oracle comparisons
    n, dims = points.shape
    out = np.empty((n, n))
    chunk = max(1, int(2e7) // max(1, n * dims))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        diff = points[start:stop, None, :] - points[None, :, :]
        out[start:stop] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def silhouette(points, assignments):
    """Per-point silhouette scores and their mean.

    a(i): mean distance to co-cluster points; b(i): smallest mean distance
    to another cluster; score is the usual piecewise cohesion/separation
    ratio. Points in singleton clusters score 0 by convention.
    """
    points, assignments, labels = _check(points, assignments)
    dist = _pairwise_dist(points)
    n = points.shape[0]
    scores = np.zeros(n)
    masks = {c: assignments == c for c in labels}
    counts = {c: int(m.sum()) for c, m in masks.items()}
    for i in range(n):
        own = assignments[i]
        if counts[own] == 1:
            continue
        a = dist[i, masks[own]].sum() / (counts[own] - 1)
        b = min(dist[i, masks[c]].mean() for c in labels if c != own)
        if a < b:
            scores[i] = 1.0 - a / b
        elif a > b:
            scores[i] = b / a - 1.0
    return float(scores.mean()), scores


def dunn(points, assignments) -> float:
    """Minimum closest-pair inter-cluster distance over maximum cluster diameter."""
    points, assignments, labels = _check(points, assignments)
    dist = _pairwise_dist(points)
    masks = [assignments == c for c in labels]

    max_diam = 0.0
    for m in masks:
        if m.sum() >= 2:
            max_diam = max(max_diam, float(dist[np.ix_(m, m)].max()))
    if max_diam == 0.0:
        raise ValidityError("all clusters are singletons: Dunn undefined")

    min_sep = np.inf
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            min_sep = min(min_sep, float(dist[np.ix_(masks[i], masks[j])].min()))
    return min_sep / max_diam


def davies_bouldin(points, assignments) -> float:
    """Mean over clusters of the worst (scatter_i + scatter_j) / centroid distance."""
    points, assignments, labels = _check(points, assignments)
    k = labels.size
    centroids = np.vstack([points[assignments == c].mean(axis=0) for c in labels])
    scatter = np.array([
        np.linalg.norm(points[assignments == c] - centroids[idx], axis=1).mean()
        for idx, c in enumerate(labels)
    ])
    sep = _pairwise_dist(centroids)
    if np.any(sep[~np.eye(k, dtype=bool)] == 0.0):
        raise ValidityError("coincident centroids: Davies-Bouldin undefined")

    total = 0.0
    for i in range(k):
        ratios = [(scatter[i] + scatter[j]) / sep[i, j] for j in range(k) if j != i]
        total += max(ratios)
    return total / k


def evaluate(points, assignments) -> ValidityReport:
    mean_s, per_point = silhouette(points, assignments)
    return ValidityReport(
        silhouette_mean=mean_s,
        dunn=dunn(points, assignments),
        davies_bouldin=davies_bouldin(points, assignments),
        per_point_silhouette=per_point,
    )
