"""Class-probability propagation and the per-iteration active-learning engine."""

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from . import active, boost, clustering, svm, validity


@dataclass(frozen=True)
class PropagationConfig:
    proba_weight: float = 10.0

    def __post_init__(self):
        if self.proba_weight <= 0:
            raise ValueError("proba_weight must be positive")


CLASSIFIERS = {
    "gbt": lambda rows, labels, n_classes: boost.gbt_fit(rows, labels, n_classes=n_classes),
    "svm": lambda rows, labels, n_classes: svm.svm_rbf_fit(rows, labels, n_classes=n_classes),
}


def fit_classifier(kind: str, rows, labels, n_classes: int, **cfg):
    if kind == "gbt":
        return boost.gbt_fit(rows, labels, cfg=boost.GbtConfig(**cfg) if cfg else boost.GbtConfig(),
                             n_classes=n_classes)
    if kind == "svm":
        return svm.svm_rbf_fit(rows, labels, cfg=svm.SvmConfig(**cfg) if cfg else svm.SvmConfig(),
                               n_classes=n_classes)
    raise ValueError(f"unknown classifier {kind!r}")


def augment(features: np.ndarray, proba: np.ndarray, cfg: PropagationConfig,
            labeled: Optional[Mapping[int, int]] = None) -> np.ndarray:
    """Append weighted class-probability columns to each feature row.

    Rows listed in ``labeled`` get their ground-truth one-hot vector instead
    of the classifier estimate, so confirmed labels dominate the suffix.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    proba = np.atleast_2d(np.asarray(proba, dtype=np.float64))
    if features.shape[0] != proba.shape[0]:
        raise ValueError(
            f"row mismatch: {features.shape[0]} features vs {proba.shape[0]} probabilities")
    suffix = proba.copy()
    if labeled:
        for idx, label_id in labeled.items():
            suffix[idx] = 0.0
            suffix[idx, label_id] = 1.0
    return np.concatenate([features, cfg.proba_weight * suffix], axis=1)


class SimulatedOracle:
    """Answers label queries from a ground-truth transcript (item id -> label id)."""

    def __init__(self, transcript: Mapping[str, int]):
        self.transcript = dict(transcript)

    @classmethod
    def load(cls, path) -> "SimulatedOracle":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls({str(k): int(v) for k, v in raw.items()})

    def __call__(self, item_ids) -> dict:
        answers = {}
        for item_id in item_ids:
            if item_id not in self.transcript:
                raise KeyError(f"oracle transcript has no label for item {item_id!r}")
            answers[item_id] = self.transcript[item_id]
        return answers


@dataclass
class IterationRecord:
    iteration: int
    labels_seen: int
    metrics: dict
    batch_cluster_counts: list = field(default_factory=list)
    pool_cluster_shares: list = field(default_factory=list)


def _validity_row(points, assignments) -> dict:
    try:
        report = validity.evaluate(points, assignments)
        return {
            "silhouette": report.silhouette_mean,
            "dunn": report.dunn,
            "davies_bouldin": report.davies_bouldin,
        }
    except validity.ValidityError as exc:
        warnings.warn(f"validity indices undefined: {exc}")
        return {"silhouette": float("nan"), "dunn": float("nan"),
                "davies_bouldin": float("nan")}


class ActiveLearningEngine:
    """Deterministic compute loop over one feature matrix.

    Each iteration: margins on the current clustering, diverse batch
    selection, oracle labels, classifier fit on all labels, probability
    propagation, reclustering of the augmented space (warm-started), and
    validity bookkeeping. Rows are addressed by integer index; id mapping
    is the caller's concern.
    """

    def __init__(self, features: np.ndarray, k: int, n_classes: int,
                 classifier: str = "gbt", proba_weight: float = 10.0,
                 batch_size: int = 200, slack: int = 1, seed: int = 0,
                 margin_mode: str = "nearest"):
        self.features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        self.k = k
        self.n_classes = n_classes
        self.classifier = classifier
        self.prop_cfg = PropagationConfig(proba_weight)
        self.batch_spec = active.BatchSpec(batch_size, slack)
        self.seed = seed
        self.margin_mode = margin_mode

        self.iteration = 0
        self.labeled: dict[int, int] = {}
        self.current_space = self.features
        self.current: Optional[clustering.Clustering] = None
        self.history: list[IterationRecord] = []

    def start(self) -> IterationRecord:
        """Cluster the unlabeled space and record the baseline metrics row."""
        seeds = clustering.kmeanspp_seed(self.features, self.k, self.seed)
        self.current = clustering.lloyd(self.features, seeds)
        row = _validity_row(self.features, self.current.assignments)
        row.update({f"{key}_aug": row[key] for key in
                    ("silhouette", "dunn", "davies_bouldin")})
        record = IterationRecord(iteration=0, labels_seen=0, metrics=row)
        self.history.append(record)
        return record

    def propose_batch(self) -> list[int]:
        if self.current is None:
            raise RuntimeError("engine not started")
        if len(self.labeled) + self.batch_spec.batch_size > self.features.shape[0]:
            warnings.warn("unlabeled pool exhausted; no batch proposed")
            return []
        reports = active.margins(self.current_space, self.current.centroids,
                                 mode=self.margin_mode)
        return active.select_batch(reports, self.current.assignments,
                                   self.batch_spec, exclude=set(self.labeled))

    def integrate(self, batch: list[int], batch_labels: Mapping[int, int]) -> IterationRecord:
        """Fold a fully-labeled batch into the model and advance one iteration."""
        missing = [i for i in batch if i not in batch_labels]
        if missing:
            raise ValueError(f"batch rows without labels: {missing[:5]}")

        pool_counts = np.bincount(
            [self.current.assignments[i] for i in range(self.features.shape[0])
             if i not in self.labeled],
            minlength=self.k)
        batch_counts = np.bincount(
            [self.current.assignments[i] for i in batch], minlength=self.k)

        self.labeled.update({i: batch_labels[i] for i in batch})

        rows = np.array(sorted(self.labeled))
        model = fit_classifier(self.classifier, self.features[rows],
                               [self.labeled[i] for i in rows], self.n_classes)
        proba = model.predict_proba(self.features)
        augmented = augment(self.features, proba, self.prop_cfg, self.labeled)

        init = self._warm_start(augmented)
        new_clustering = clustering.lloyd(augmented, init)

        row = _validity_row(self.features, new_clustering.assignments)
        aug_row = _validity_row(augmented, new_clustering.assignments)
        row.update({f"{key}_aug": aug_row[key] for key in aug_row})

        self.iteration += 1
        self.current = new_clustering
        self.current_space = augmented
        record = IterationRecord(
            iteration=self.iteration,
            labels_seen=len(self.labeled),
            metrics=row,
            batch_cluster_counts=batch_counts.tolist(),
            pool_cluster_shares=(pool_counts / max(1, pool_counts.sum())).tolist(),
        )
        self.history.append(record)
        return record

    def _warm_start(self, augmented: np.ndarray) -> np.ndarray:
        """Extend previous centroids into the new space: keep the base-feature
        block, suffix each with its cluster's mean probability columns."""
        base_cols = self.features.shape[1]
        init = np.zeros((self.k, augmented.shape[1]))
        init[:, :base_cols] = self.current.centroids[:, :base_cols]
        for c in range(self.k):
            members = augmented[self.current.assignments == c, base_cols:]
            if members.shape[0]:
                init[c, base_cols:] = members.mean(axis=0)
        return init


def run_iteration(engine: ActiveLearningEngine,
                  oracle: Callable[[list], Mapping],
                  ids: Optional[list] = None) -> Optional[IterationRecord]:
    """One full query round: propose, ask the oracle, integrate.

    ``ids`` maps row indices to external item ids for the oracle; identity
    when omitted. Returns None when the pool is exhausted.
    """
    batch = engine.propose_batch()
    if not batch:
        return None
    if ids is None:
        answers = oracle(batch)
        return engine.integrate(batch, dict(answers))
    answers = oracle([ids[i] for i in batch])
    return engine.integrate(batch, {i: answers[ids[i]] for i in batch})
