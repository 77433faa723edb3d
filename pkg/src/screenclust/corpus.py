"""Dataset model: manifest ingestion, taxonomy, and stratified reservoir sampling."""

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence


class ManifestError(ValueError):
    """Raised for malformed or inconsistent manifest/taxonomy files."""


@dataclass(frozen=True)
class Item:
    id: str
    image_path: str
    bucket: str
    text: str = ""
    timestamp: Optional[str] = None


@dataclass(frozen=True)
class Taxonomy:
    labels: tuple

    def __post_init__(self):
        if not self.labels:
            raise ManifestError("taxonomy must contain at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ManifestError("taxonomy labels must be distinct")

    def __len__(self):
        return len(self.labels)

    def id_of(self, label: str) -> int:
        return self.labels.index(label)

    def label_of(self, label_id: int) -> str:
        return self.labels[label_id]


@dataclass(frozen=True)
class SampleSpec:
    reservoir_k: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        if self.reservoir_k < 1:
            raise ValueError("reservoir_k must be >= 1")


def load_manifest(path) -> list[Item]:
    """Parse a line-delimited JSON manifest into an ordered list of Items.

    Required fields: id, image_path, bucket. Optional: text (defaults to ""),
    timestamp. Blank lines are skipped. Errors report the 1-based line number.
    """
    items: list[Item] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {lineno}: malformed record: {exc}") from exc
            if not isinstance(rec, dict):
                raise ManifestError(f"line {lineno}: record is not an object")
            for req in ("id", "image_path", "bucket"):
                if req not in rec:
                    raise ManifestError(f"line {lineno}: missing field {req!r}")
            item_id = str(rec["id"])
            if item_id in seen:
                raise ManifestError(f"line {lineno}: duplicate id {item_id!r}")
            seen.add(item_id)
            items.append(Item(
                id=item_id,
                image_path=str(rec["image_path"]),
                bucket=str(rec["bucket"]),
                text=str(rec.get("text", "")),
                timestamp=rec.get("timestamp"),
            ))
    return items


def save_manifest(items: Sequence[Item], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for it in items:
            rec = {"id": it.id, "image_path": it.image_path, "bucket": it.bucket}
            if it.text:
                rec["text"] = it.text
            if it.timestamp is not None:
                rec["timestamp"] = it.timestamp
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_taxonomy(path) -> Taxonomy:
    """One label per line; '#'-prefixed lines and blank lines are ignored."""
    labels: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            label = line.strip()
            if not label or label.startswith("#"):
                continue
            if label in labels:
                raise ManifestError(f"line {lineno}: duplicate label {label!r}")
            labels.append(label)
    if not labels:
        raise ManifestError(f"taxonomy file {path} contains no labels")
    return Taxonomy(tuple(labels))


def reservoir_sample(stream: Iterable[Item], spec: SampleSpec) -> list[Item]:
    """Single-pass uniform sample of up to ``reservoir_k`` items (Algorithm R).

    Deterministic for a fixed seed; streams shorter than k are returned whole.
    """
    rng = random.Random(spec.rng_seed)
    k = spec.reservoir_k
    reservoir: list[Item] = []
    for i, item in enumerate(stream):
        if i < k:
            reservoir.append(item)
        else:
            j = rng.randint(0, i)
            if j < k:
                reservoir[j] = item
    return reservoir


def stratified_sample(buckets: Mapping[str, Iterable[Item]], spec: SampleSpec) -> list[Item]:
    """Reservoir-sample each bucket independently; concatenate in bucket-name order.

    Each bucket gets its own RNG stream derived from (seed, bucket name) so
    results do not depend on how the buckets mapping was built.
    """
    if not buckets:
        raise ValueError("at least one bucket required")
    out: list[Item] = []
    for name in sorted(buckets):
        sub_seed = random.Random(f"{spec.rng_seed}:{name}").getrandbits(63)
        out.extend(reservoir_sample(buckets[name], SampleSpec(spec.reservoir_k, sub_seed)))
    return out


def group_by_bucket(items: Sequence[Item]) -> dict[str, list[Item]]:
    groups: dict[str, list[Item]] = {}
    for it in items:
        groups.setdefault(it.bucket, []).append(it)
    return groups
