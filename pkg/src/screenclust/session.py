"""Durable labeling sessions: append-only journal, replay-based resume."""

import datetime as dt
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import corpus, features as features_mod, matrixio
from .propagate import ActiveLearningEngine


class SessionError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class SessionConfig:
    manifest_path: str
    features_path: str
    taxonomy_path: str
    k: int = 190
    batch_size: int = 200
    iterations: int = 10
    classifier: str = "gbt"
    proba_weight: float = 10.0
    feature_mode: str = "image"
    slack: int = 1
    seed: int = 0
    standardize: bool = True

    def validate(self):
        if self.k < 2:
            raise SessionError("invalid_config", "K must be >= 2")
        if self.batch_size < 1:
            raise SessionError("invalid_config", "batch_size must be >= 1")
        if self.iterations < 1:
            raise SessionError("invalid_config", "iterations must be >= 1")
        if self.classifier not in ("gbt", "svm"):
            raise SessionError("invalid_config", f"unknown classifier {self.classifier!r}")
        if self.feature_mode not in ("image", "joint"):
            raise SessionError("invalid_config", f"unknown feature mode {self.feature_mode!r}")
        if self.proba_weight <= 0:
            raise SessionError("invalid_config", "proba_weight must be positive")


@dataclass
class LabelRecord:
    item_id: str
    label_id: int
    annotator: str
    at: str


class LabelSession:
    """One active-learning run bridged to annotators.

    All accepted labels go to the journal (fsync'd) before any state change;
    resume replays the journal and recomputes the deterministic pipeline, so
    a crash between label acceptance and loop resume loses nothing.
    """

    def __init__(self, session_id: str, directory: Path, config: SessionConfig):
        self.session_id = session_id
        self.directory = Path(directory)
        self.config = config
        self.lock = threading.Lock()

        self.items = corpus.load_manifest(config.manifest_path)
        self.taxonomy = corpus.load_taxonomy(config.taxonomy_path)
        self.item_index = {it.id: i for i, it in enumerate(self.items)}

        _, matrix = matrixio.load_matrix(config.features_path)
        if matrix.shape[0] != len(self.items):
            raise SessionError(
                "invalid_config",
                f"feature rows ({matrix.shape[0]}) != manifest items ({len(self.items)})")
        if config.standardize:
            matrix, _ = features_mod.standardize(matrix)
        self.engine = ActiveLearningEngine(
            matrix, k=config.k, n_classes=len(self.taxonomy),
            classifier=config.classifier, proba_weight=config.proba_weight,
            batch_size=config.batch_size, slack=config.slack, seed=config.seed)

        self.pending_rows: list[int] = []
        self.pending_labels: dict[int, LabelRecord] = {}
        self.complete = False

    # ------------------------------------------------------------------ setup

    @property
    def journal_path(self) -> Path:
        return self.directory / "journal.jsonl"

    def _journal(self, event: dict, fsync: bool = False) -> None:
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            if fsync:
                fh.flush()
                os.fsync(fh.fileno())

    @classmethod
    def create(cls, store_dir, config: SessionConfig,
               session_id: Optional[str] = None) -> "LabelSession":
        config.validate()
        session_id = session_id or uuid.uuid4().hex[:12]
        directory = Path(store_dir) / session_id
        directory.mkdir(parents=True, exist_ok=False)
        session = cls(session_id, directory, config)
        session._journal({"event": "create", "config": config.__dict__})
        record = session.engine.start()
        session._journal({"event": "iteration", "record": _record_to_dict(record)})
        session._advance_batch()
        return session

    @classmethod
    def load(cls, store_dir, session_id: str) -> "LabelSession":
        directory = Path(store_dir) / session_id
        journal = directory / "journal.jsonl"
        if not journal.exists():
            raise SessionError("not_found", f"unknown session {session_id!r}")
        with open(journal, encoding="utf-8") as fh:
            events = [json.loads(line) for line in fh if line.strip()]
        if not events or events[0]["event"] != "create":
            raise SessionError("corrupt_journal", "journal missing create event")
        config = SessionConfig(**events[0]["config"])
        session = cls(session_id, directory, config)
        session._replay(events[1:])
        return session

    def _replay(self, events: list[dict]) -> None:
        self.engine.start()
        pending_rows: list[int] = []
        pending_labels: dict[int, LabelRecord] = {}
        for ev in events:
            kind = ev["event"]
            if kind == "iteration":
                if ev["record"]["iteration"] == 0:
                    continue  # baseline recomputed by start()
                labels = {row: pending_labels[row].label_id for row in pending_rows}
                self.engine.integrate(pending_rows, labels)
                pending_rows, pending_labels = [], {}
            elif kind == "batch":
                pending_rows = list(ev["rows"])
                pending_labels = {}
            elif kind == "label":
                row = self.item_index[ev["item_id"]]
                pending_labels[row] = LabelRecord(
                    ev["item_id"], ev["label_id"], ev["annotator"], ev["at"])
            elif kind == "complete":
                self.complete = True
        self.pending_rows = pending_rows
        self.pending_labels = pending_labels
        if not self.complete and not self.pending_rows:
            self._advance_batch()

    # ------------------------------------------------------------- operations

    def _advance_batch(self) -> None:
        if self.engine.iteration >= self.config.iterations:
            self.complete = True
            self._journal({"event": "complete"})
            return
        batch = self.engine.propose_batch()
        if not batch:
            self.complete = True
            self._journal({"event": "complete"})
            return
        self.pending_rows = batch
        self.pending_labels = {}
        self._journal({"event": "batch", "iteration": self.engine.iteration + 1,
                       "rows": batch, "ids": [self.items[i].id for i in batch]})

    def get_batch(self) -> dict:
        with self.lock:
            if self.complete:
                return {"session_id": self.session_id, "iteration": self.engine.iteration,
                        "complete": True, "items": [],
                        "taxonomy": list(self.taxonomy.labels),
                        "progress": {"labeled": 0, "pending": 0}}
            if not self.pending_rows:
                raise SessionError("no_batch", "no pending batch")
            remaining = [r for r in self.pending_rows if r not in self.pending_labels]
            return {
                "session_id": self.session_id,
                "iteration": self.engine.iteration + 1,
                "complete": False,
                "items": [{"id": self.items[r].id,
                           "image_path": self.items[r].image_path,
                           "text": self.items[r].text}
                          for r in remaining],
                "taxonomy": list(self.taxonomy.labels),
                "progress": {"labeled": len(self.pending_labels),
                             "pending": len(remaining)},
            }

    def submit_labels(self, records: list[LabelRecord]) -> dict:
        with self.lock:
            if self.complete:
                raise SessionError("complete", "session already complete")
            for rec in records:
                if rec.item_id not in self.item_index:
                    raise SessionError("unknown_item", f"unknown item {rec.item_id!r}")
                row = self.item_index[rec.item_id]
                if row not in self.pending_rows:
                    raise SessionError(
                        "not_pending", f"item {rec.item_id!r} is not in the pending batch")
                if row in self.pending_labels:
                    raise SessionError(
                        "duplicate_label", f"item {rec.item_id!r} already labeled")
                if not 0 <= rec.label_id < len(self.taxonomy):
                    raise SessionError(
                        "label_out_of_range",
                        f"label_id {rec.label_id} outside taxonomy of {len(self.taxonomy)}")
            for rec in records:
                self._journal({"event": "label", "item_id": rec.item_id,
                               "label_id": rec.label_id, "annotator": rec.annotator,
                               "at": rec.at}, fsync=True)
                self.pending_labels[self.item_index[rec.item_id]] = rec
            remaining = len(self.pending_rows) - len(self.pending_labels)
            if remaining == 0:
                labels = {r: self.pending_labels[r].label_id for r in self.pending_rows}
                record = self.engine.integrate(self.pending_rows, labels)
                self._journal({"event": "iteration", "record": _record_to_dict(record)})
                self.pending_rows, self.pending_labels = [], {}
                self._advance_batch()
            return {"remaining": remaining, "iteration": self.engine.iteration,
                    "complete": self.complete}

    def get_metrics(self) -> list[dict]:
        with self.lock:
            return [_record_to_dict(rec) for rec in self.engine.history]

    def get_item(self, item_id: str) -> corpus.Item:
        if item_id not in self.item_index:
            raise SessionError("unknown_item", f"unknown item {item_id!r}")
        return self.items[self.item_index[item_id]]


def _record_to_dict(record) -> dict:
    return {
        "iteration": record.iteration,
        "labels_seen": record.labels_seen,
        **record.metrics,
        "batch_cluster_counts": record.batch_cluster_counts,
        "pool_cluster_shares": record.pool_cluster_shares,
    }


def now_iso() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


class SessionStore:
    """In-process registry backed by per-session journal directories."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, LabelSession] = {}
        self._lock = threading.Lock()

    def create(self, config: SessionConfig) -> LabelSession:
        session = LabelSession.create(self.root, config)
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> LabelSession:
        with self._lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        session = LabelSession.load(self.root, session_id)
        with self._lock:
            self._sessions[session_id] = session
        return session
