"""One-vs-rest RBF-kernel SVM trained by SMO, with Platt-calibrated probabilities."""

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    gamma: float | None = None  # None -> 1 / feature count
    tol: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    a_sq = np.einsum("ij,ij->i", a, a)
    b_sq = np.einsum("ij,ij->i", b, b)
    d2 = np.maximum(a_sq[:, None] + b_sq[None, :] - 2.0 * a @ b.T, 0.0)
    return np.exp(-gamma * d2)


def _smo(kmat: np.ndarray, y: np.ndarray, c: float, tol: float,
         max_passes: int, seed: int = 0):
    """Simplified sequential minimal optimization on a precomputed kernel.

    Sweeps all i, pairs each KKT violator with a pseudo-random j, and solves
    the 2-variable subproblem analytically; stops after max_passes sweeps
    without a change. Returns (alphas, bias).
    """
    n = kmat.shape[0]
    alphas = np.zeros(n)
    b = 0.0
    rng = np.random.default_rng(seed)
    passes = 0
    while passes < max_passes:
        changed = 0
        f = (alphas * y) @ kmat + b
        for i in range(n):
            e_i = f[i] - y[i]
            if not ((y[i] * e_i < -tol and alphas[i] < c)
                    or (y[i] * e_i > tol and alphas[i] > 0)):
                continue
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            e_j = f[j] - y[j]
            a_i_old, a_j_old = alphas[i], alphas[j]
            if y[i] != y[j]:
                low, high = max(0.0, a_j_old - a_i_old), min(c, c + a_j_old - a_i_old)
            else:
                low, high = max(0.0, a_i_old + a_j_old - c), min(c, a_i_old + a_j_old)
            if low >= high:
                continue
            eta = 2.0 * kmat[i, j] - kmat[i, i] - kmat[j, j]
            if eta >= 0:
                continue
            a_j = np.clip(a_j_old - y[j] * (e_i - e_j) / eta, low, high)
            if abs(a_j - a_j_old) < 1e-5:
                continue
            a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)
            alphas[i], alphas[j] = a_i, a_j

            b1 = b - e_i - y[i] * (a_i - a_i_old) * kmat[i, i] \
                - y[j] * (a_j - a_j_old) * kmat[i, j]
            b2 = b - e_j - y[i] * (a_i - a_i_old) * kmat[i, j] \
                - y[j] * (a_j - a_j_old) * kmat[j, j]
            if 0 < a_i < c:
                b = b1
            elif 0 < a_j < c:
                b = b2
            else:
                b = 0.5 * (b1 + b2)
            f = (alphas * y) @ kmat + b
            changed += 1
        passes = passes + 1 if changed == 0 else 0
        if changed == 0:
            break
    return alphas, b


def _platt_fit(decision: np.ndarray, y: np.ndarray, max_iter: int = 100):
    """Sigmoid calibration A,B minimizing NLL of 1/(1+exp(A f + B)).

    Standard damped-Newton procedure with regularized targets.
    """
    prior1 = float((y > 0).sum())
    prior0 = float(y.size - prior1)
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y > 0, hi, lo)

    a, b = 0.0, np.log((prior0 + 1.0) / (prior1 + 1.0))
    min_step, sigma = 1e-10, 1e-12

    def nll(a_, b_):
        z = decision * a_ + b_
        return float(np.sum(np.where(
            z >= 0,
            t * z + np.log1p(np.exp(-z)),
            (t - 1) * z + np.log1p(np.exp(z)),
        )))

    fval = nll(a, b)
    for _ in range(max_iter):
        z = decision * a + b
        p = np.where(z >= 0, np.exp(-z) / (1 + np.exp(-z)), 1 / (1 + np.exp(z)))
        d1 = t - p
        d2 = p * (1 - p)
        g1 = float(np.sum(decision * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        h11 = float(np.sum(decision * decision * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(decision * d2))
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db

        step = 1.0
        while step >= min_step:
            new_a, new_b = a + step * da, b + step * db
            new_f = nll(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                a, b, fval = new_a, new_b, new_f
                break
            step /= 2.0
        else:
            break
    return a, b


class SvmModel:
    def __init__(self, support, coeffs, biases, platt, classes, n_classes, gamma):
        self.support = support      # training rows
        self.coeffs = coeffs        # per-class alpha*y over support rows
        self.biases = biases
        self.platt = platt          # per-class (A, B)
        self.classes = classes
        self.n_classes = n_classes
        self.gamma = gamma

    def decision_values(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        kmat = rbf_kernel(x, self.support, self.gamma)
        return kmat @ self.coeffs.T + self.biases

    def predict_proba(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        proba = np.zeros((x.shape[0], self.n_classes))
        if len(self.classes) == 1:
            proba[:, self.classes[0]] = 1.0
            return proba
        dec = self.decision_values(x)
        for ci in range(len(self.classes)):
            a, b = self.platt[ci]
            z = dec[:, ci] * a + b
            proba[:, self.classes[ci]] = np.where(
                z >= 0, np.exp(-z) / (1 + np.exp(-z)), 1 / (1 + np.exp(z)))
        row_sums = proba.sum(axis=1, keepdims=True)
        return proba / row_sums

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)


def svm_rbf_fit(rows, labels, cfg: SvmConfig = SvmConfig(),
                n_classes: int | None = None) -> SvmModel:
    """Train one binary RBF-SMO machine per present class (one-vs-rest) and
    calibrate each with a Platt sigmoid; probabilities renormalized per row."""
    x = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    classes = np.unique(y)
    if n_classes is None:
        n_classes = int(classes.max()) + 1
    gamma = cfg.gamma if cfg.gamma is not None else 1.0 / x.shape[1]

    if classes.size == 1:
        warnings.warn("single-class training set: emitting a constant model")
        return SvmModel(x, np.zeros((1, x.shape[0])), np.zeros(1), [(0.0, 0.0)],
                        classes.tolist(), n_classes, gamma)

    kmat = rbf_kernel(x, x, gamma)
    coeffs = np.zeros((classes.size, x.shape[0]))
    biases = np.zeros(classes.size)
    platt = []
    for ci, c in enumerate(classes):
        y_bin = np.where(y == c, 1.0, -1.0)
        alphas, b = _smo(kmat, y_bin, cfg.C, cfg.tol, cfg.max_passes)
        coeffs[ci] = alphas * y_bin
        biases[ci] = b
        dec = kmat @ coeffs[ci] + b
        platt.append(_platt_fit(dec, y_bin))
    return SvmModel(x, coeffs, biases, platt, classes.tolist(), n_classes, gamma)
