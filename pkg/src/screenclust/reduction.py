"""Randomized-SVD PCA and component-count selection."""

from dataclasses import dataclass

import numpy as np

from . import matrixio


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray  # components x features, row-orthonormal
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.basis.shape[0]

    def save(self, path) -> None:
        matrixio.save_sections(path, {
            "pca_mean": self.mean,
            "pca_basis": self.basis,
            "pca_ratios": self.explained_variance_ratio,
        })

    @classmethod
    def load(cls, path) -> "PcaModel":
        sec = matrixio.load_sections(path)
        return cls(sec["pca_mean"].ravel(), sec["pca_basis"], sec["pca_ratios"].ravel())


def randomized_svd(m: np.ndarray, n_components: int, oversampling: int = 10,
                   power_iters: int = 4, rng_seed: int = 0):
    """Truncated SVD via Gaussian range sketching with power iterations.

    Sketch Y = (A A^T)^q A Omega with QR re-orthonormalization between
    passes, then an exact SVD of the small projected matrix. Returns
    (U, S, Vt) with S non-negative and non-increasing.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    rows, cols = m.shape
    if not 1 <= n_components <= min(rows, cols):
        raise ValueError(
            f"n_components={n_components} out of range for {rows}x{cols} matrix")
    rng = np.random.default_rng(rng_seed)
    sketch = min(n_components + oversampling, min(rows, cols))

    omega = rng.standard_normal((cols, sketch))
    q, _ = np.linalg.qr(m @ omega)
    for _ in range(power_iters):
        q, _ = np.linalg.qr(m.T @ q)
        q, _ = np.linalg.qr(m @ q)
    b = q.T @ m
    u_small, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q @ u_small
    return u[:, :n_components], s[:n_components], vt[:n_components]


def fit_pca(m: np.ndarray, max_components: int = 1000, rng_seed: int = 0) -> PcaModel:
    """Center columns, factor with randomized SVD, keep up to max_components."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    rows, cols = m.shape
    if rows < 2:
        raise ValueError("fit_pca requires at least 2 rows")
    mean = m.mean(axis=0)
    centered = m - mean
    total_var = float((centered ** 2).sum())
    if total_var == 0.0:
        raise ValueError("degenerate all-zero matrix")
    k = min(max_components, rows - 1, cols)
    _, s, vt = randomized_svd(centered, k, rng_seed=rng_seed)
    ratios = (s ** 2) / total_var
    return PcaModel(mean=mean, basis=vt, explained_variance_ratio=ratios)


def select_components(ratios: np.ndarray, marginal_epsilon: float = 0.001) -> int:
    """Smallest kept-prefix length m >= 1 ending before the first component whose
    marginal explained-variance ratio drops below epsilon; all of them if none do."""
    ratios = np.asarray(ratios, dtype=np.float64).ravel()
    if ratios.size == 0:
        raise ValueError("empty ratios")
    below = np.flatnonzero(ratios < marginal_epsilon)
    if below.size == 0:
        return ratios.size
    return max(1, int(below[0]))


def project(m: np.ndarray, model: PcaModel, m_components: int) -> np.ndarray:
    """Project centered rows onto the first m_components basis rows."""
    if m_components > model.n_components:
        raise ValueError(
            f"m_components={m_components} exceeds model rank {model.n_components}")
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    if m.shape[1] != model.mean.size:
        raise ValueError(
            f"feature count {m.shape[1]} != model features {model.mean.size}")
    return (m - model.mean) @ model.basis[:m_components].T
