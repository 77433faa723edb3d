"""Multiclass gradient-boosted regression trees on the softmax objective."""

import warnings
from dataclasses import dataclass

import numpy as np

from .backend import best_split


@dataclass(frozen=True)
class GbtConfig:
    rounds: int = 100
    depth: int = 4
    learning_rate: float = 0.1
    min_leaf: int = 2

    def __post_init__(self):
        if min(self.rounds, self.depth, self.min_leaf) < 1 or self.learning_rate <= 0:
            raise ValueError("GbtConfig fields must be positive")


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = 0.0


def _leaf_value(residuals: np.ndarray, n_classes: int) -> float:
    # Newton step for the per-class softmax residual fit
    denom = np.sum(np.abs(residuals) * (1.0 - np.abs(residuals)))
    if denom < 1e-12:
        return 0.0
    return (n_classes - 1) / n_classes * residuals.sum() / denom


def _build_tree(x, residuals, depth, min_leaf, n_classes):
    node = _Node()
    if depth == 0 or x.shape[0] < 2 * min_leaf:
        node.value = _leaf_value(residuals, n_classes)
        return node
    ones = np.ones(x.shape[0])
    feat, thr, gain = best_split(np.ascontiguousarray(x), residuals, ones,
                                 min_leaf, 0.0)
    if feat < 0 or gain <= 0.0:
        node.value = _leaf_value(residuals, n_classes)
        return node
    mask = x[:, feat] <= thr
    node.feature = int(feat)
    node.threshold = float(thr)
    node.left = _build_tree(x[mask], residuals[mask], depth - 1, min_leaf, n_classes)
    node.right = _build_tree(x[~mask], residuals[~mask], depth - 1, min_leaf, n_classes)
    return node


def _tree_predict(node, x):
    out = np.empty(x.shape[0])
    stack = [(node, np.arange(x.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if nd.feature < 0:
            out[idx] = nd.value
            continue
        mask = x[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[mask]))
        stack.append((nd.right, idx[~mask]))
    return out


def _softmax(f):
    z = f - f.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class GbtModel:
    """One-vs-rest additive trees per boosting round; softmax probabilities."""

    def __init__(self, trees, classes, n_classes, learning_rate):
        self.trees = trees  # list of rounds, each a list of per-class trees
        self.classes = classes  # taxonomy indices present at fit time
        self.n_classes = n_classes
        self.learning_rate = learning_rate

    def predict_proba(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        proba = np.zeros((x.shape[0], self.n_classes))
        if len(self.classes) == 1:
            proba[:, self.classes[0]] = 1.0
            return proba
        f = np.zeros((x.shape[0], len(self.classes)))
        for round_trees in self.trees:
            for ci, tree in enumerate(round_trees):
                f[:, ci] += self.learning_rate * _tree_predict(tree, x)
        proba[:, self.classes] = _softmax(f)
        return proba

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)


def gbt_fit(rows, labels, cfg: GbtConfig = GbtConfig(),
            n_classes: int | None = None) -> GbtModel:
    """Boosted CART ensemble: per round, one regression tree per class is fit
    to the softmax gradient residuals with greedy variance-reduction splits."""
    x = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    classes = np.unique(y)
    if n_classes is None:
        n_classes = int(classes.max()) + 1

    if classes.size == 1:
        warnings.warn("single-class training set: emitting a constant model")
        return GbtModel([], classes.tolist(), n_classes, cfg.learning_rate)

    kc = classes.size
    onehot = np.zeros((x.shape[0], kc))
    for ci, c in enumerate(classes):
        onehot[y == c, ci] = 1.0

    f = np.zeros((x.shape[0], kc))
    trees = []
    for _ in range(cfg.rounds):
        p = _softmax(f)
        round_trees = []
        for ci in range(kc):
            residuals = onehot[:, ci] - p[:, ci]
            tree = _build_tree(x, residuals, cfg.depth, cfg.min_leaf, kc)
            f[:, ci] += cfg.learning_rate * _tree_predict(tree, x)
            round_trees.append(tree)
        trees.append(round_trees)
    return GbtModel(trees, classes.tolist(), n_classes, cfg.learning_rate)
