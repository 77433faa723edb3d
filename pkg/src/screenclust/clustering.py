"""K-Means++ seeding, Lloyd iterations, SSE scoring and elbow K selection."""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .backend import assign_nearest


@dataclass
class Clustering:
    centroids: np.ndarray
    assignments: np.ndarray
    sizes: np.ndarray

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass
class SseCurve:
    ks: list = field(default_factory=list)
    sse: list = field(default_factory=list)

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "sse"])
            for k, v in zip(self.ks, self.sse):
                writer.writerow([k, repr(float(v))])

    @classmethod
    def load_csv(cls, path) -> "SseCurve":
        curve = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                curve.ks.append(int(row["k"]))
                curve.sse.append(float(row["sse"]))
        return curve


def kmeanspp_seed(points: np.ndarray, k: int, rng_seed: int = 0) -> np.ndarray:
    """K-Means++ seeding: first centroid uniform, each next drawn with
    probability proportional to squared distance to the nearest chosen one."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    n_distinct = np.unique(points, axis=0).shape[0]
    if k > n_distinct:
        raise ValueError(f"K={k} exceeds {n_distinct} distinct points")
    rng = np.random.default_rng(rng_seed)

    chosen = [int(rng.integers(n))]
    d2 = np.einsum("ij,ij->i", points - points[chosen[0]], points - points[chosen[0]])
    while len(chosen) < k:
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass on already-chosen coordinates; pick any unchosen distinct point
            remaining = [i for i in range(n) if i not in chosen]
            idx = remaining[int(rng.integers(len(remaining)))]
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        nd = np.einsum("ij,ij->i", points - points[idx], points - points[idx])
        d2 = np.minimum(d2, nd)
    return points[chosen].copy()


def lloyd(points: np.ndarray, init_centroids: np.ndarray, max_iter: int = 300,
          tol: float = 1e-6) -> Clustering:
    """Lloyd iterations: nearest-centroid assignment (ties to the lowest
    index) alternated with mean updates until assignments stabilize, the
    centroid shift falls under tol, or max_iter is hit. Empty clusters are
    reseeded at the point farthest from its current centroid."""
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    centroids = np.ascontiguousarray(np.atleast_2d(init_centroids), dtype=np.float64).copy()
    k = centroids.shape[0]
    n = points.shape[0]

    prev_labels = None
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        labels, sqd = assign_nearest(points, centroids)

        # keep K constant: move each empty centroid onto the worst-fit point
        for c in range(k):
            if not np.any(labels == c):
                far = int(np.argmax(sqd))
                centroids[c] = points[far]
                labels[far] = c
                sqd[far] = 0.0

        new_centroids = np.empty_like(centroids)
        for c in range(k):
            new_centroids[c] = points[labels == c].mean(axis=0)

        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels.copy()
        if shift < tol:
            labels, _ = assign_nearest(points, centroids)
            break

    sizes = np.bincount(labels, minlength=k)
    return Clustering(centroids=centroids, assignments=labels, sizes=sizes)


def sse(clustering: Clustering, points: np.ndarray) -> float:
    """Within-cluster sums of squared distances, averaged over the K clusters.

    Empty clusters contribute zero (warned, since they dilute the average).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    k = clustering.k
    per_cluster = np.zeros(k)
    for c in range(k):
        members = points[clustering.assignments == c]
        if members.size == 0:
            warnings.warn(f"cluster {c} is empty; contributes 0 to SSE")
            continue
        per_cluster[c] = ((members - clustering.centroids[c]) ** 2).sum()
    return float(per_cluster.sum() / k)


def total_within_ss(points: np.ndarray, centroids: np.ndarray,
                    labels: np.ndarray) -> float:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return float(((points - centroids[labels]) ** 2).sum())


def elbow_scan(points: np.ndarray, k_min: int = 10, k_max: int = 100,
               step: int = 10, seeds=(0, 1, 2)) -> SseCurve:
    """Scan a K grid; per K keep the best (lowest) averaged SSE over seeds."""
    if k_min < 1 or step < 1:
        raise ValueError("k_min and step must be >= 1")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n_distinct = np.unique(points, axis=0).shape[0]
    if k_max > n_distinct:
        warnings.warn(f"k_max={k_max} clamped to {n_distinct} distinct points")
        k_max = n_distinct

    curve = SseCurve()
    for k in range(k_min, k_max + 1, step):
        best = np.inf
        for seed in seeds:
            clustering = lloyd(points, kmeanspp_seed(points, k, seed))
            best = min(best, sse(clustering, points))
        curve.ks.append(k)
        curve.sse.append(best)
    return curve


def pick_k_at_break(curve: SseCurve, fraction: float = 0.8) -> int:
    """Smallest scanned K whose cumulative SSE drop reaches fraction of the
    total drop across the curve."""
    if len(curve.ks) < 2:
        raise ValueError("curve must have at least 2 points")
    first, last = curve.sse[0], curve.sse[-1]
    total_drop = first - last
    if total_drop <= 0.0:
        raise ValueError("flat or rising SSE curve: no elbow exists")
    threshold = fraction * total_drop
    for k, v in zip(curve.ks, curve.sse):
        if first - v >= threshold:
            return k
    return curve.ks[-1]
