"""Pure-numpy implementations of the hot kernels.

Same signatures and semantics as the compiled extension in ``_kernels.pyx``;
the backend module picks whichever is available. Everything here is
deterministic: reductions run in fixed index order (numpy sums over
contiguous axes).
"""

import numpy as np

IMPL = "python"


def cell_histograms(mag, bin_lo, frac_hi, cell, bins):
    """Accumulate per-cell orientation histograms with linear bin votes.

    mag, bin_lo, frac_hi are per-pixel arrays (H x W). Each pixel votes
    ``mag * (1 - frac_hi)`` into ``bin_lo`` and ``mag * frac_hi`` into the
    circularly adjacent bin. Returns (H//cell, W//cell, bins) float64.
    """
    h, w = mag.shape
    cy, cx = h // cell, w // cell
    hist = np.zeros((cy, cx, bins), dtype=np.float64)

    rows = np.arange(h) // cell
    cols = np.arange(w) // cell
    cell_r = np.broadcast_to(rows[:, None], (h, w))
    cell_c = np.broadcast_to(cols[None, :], (h, w))

    lo = bin_lo
    hi = (bin_lo + 1) % bins
    np.add.at(hist, (cell_r, cell_c, lo), mag * (1.0 - frac_hi))
    np.add.at(hist, (cell_r, cell_c, hi), mag * frac_hi)
    return hist


def assign_nearest(points, centroids):
    """Nearest centroid per point under squared Euclidean distance.

    Ties broken toward the lowest centroid index. Returns
    (labels int64[n], sqdist float64[n]).
    """
    p_sq = np.einsum("ij,ij->i", points, points)
    c_sq = np.einsum("ij,ij->i", centroids, centroids)
    # chunk to bound the n x k temporary
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    sqd = np.empty(n, dtype=np.float64)
    step = max(1, 2_000_000 // max(1, centroids.shape[0]))
    for start in range(0, n, step):
        stop = min(n, start + step)
        d = p_sq[start:stop, None] + c_sq[None, :] - 2.0 * points[start:stop] @ centroids.T
        labels[start:stop] = np.argmin(d, axis=1)
        sqd[start:stop] = np.maximum(d[np.arange(stop - start), labels[start:stop]], 0.0)
    return labels, sqd


def best_split(x, g, h, min_leaf, lam):
    """Exhaustive best axis-aligned split for a regression tree node.

    x: (n, d) features, g: (n,) gradient-like targets, h: (n,) weights.
    Gain is the weighted squared-sum criterion
    GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam), split at midpoints between
    distinct consecutive sorted values, both sides >= min_leaf rows.
    Returns (feature, threshold, gain); feature -1 when no valid split.
    """
    n, d = x.shape
    total_g = float(g.sum())
    total_h = float(h.sum())
    parent = total_g * total_g / (total_h + lam)

    best_feat = -1
    best_thr = 0.0
    best_gain = 0.0
    for j in range(d):
        order = np.argsort(x[:, j], kind="stable")
        xs = x[order, j]
        gl = np.cumsum(g[order])[:-1]
        hl = np.cumsum(h[order])[:-1]
        counts = np.arange(1, n)
        valid = (xs[1:] != xs[:-1]) & (counts >= min_leaf) & (n - counts >= min_leaf)
        if not valid.any():
            continue
        gr = total_g - gl
        hr = total_h - hl
        gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best_gain + 1e-12:
            best_gain = float(gain[k])
            best_feat = j
            best_thr = 0.5 * (xs[k] + xs[k + 1])
    return best_feat, best_thr, best_gain
