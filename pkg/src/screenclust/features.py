"""Feature-matrix assembly: standardization, fusion, and per-item featurization."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import image as img_mod
from . import text as text_mod
from .corpus import Item

STAGES = ("raw", "hog", "text", "joint", "reduced", "augmented")


@dataclass
class FeatureMatrix:
    """Dense row-major matrix of per-item vectors with stage provenance."""
    data: np.ndarray
    stage: str

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def transform(self, m: np.ndarray) -> np.ndarray:
        safe = np.where(self.stds == 0.0, 1.0, self.stds)
        out = (m - self.means) / safe
        # constant columns carry no information; pin them to zero
        out[:, self.stds == 0.0] = 0.0
        return out


def standardize(m: np.ndarray):
    """Column-wise zero-mean unit-std transform.

    Returns (transformed matrix, Standardizer) so held-out rows can be
    mapped into the same space. Constant columns become all-zero.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    if m.shape[0] < 2:
        raise ValueError("standardize requires at least 2 rows")
    means = m.mean(axis=0)
    stds = m.std(axis=0)
    st = Standardizer(means, stds)
    return st.transform(m), st


def fuse(visual: np.ndarray, textual: np.ndarray) -> np.ndarray:
    """Concatenate visual and textual vectors (or matrices), visual block first."""
    visual = np.asarray(visual, dtype=np.float64)
    textual = np.asarray(textual, dtype=np.float64)
    if visual.ndim != textual.ndim:
        raise ValueError("visual/textual rank mismatch")
    if visual.ndim == 2 and visual.shape[0] != textual.shape[0]:
        raise ValueError(
            f"row count mismatch: {visual.shape[0]} vs {textual.shape[0]}")
    return np.concatenate([visual, textual], axis=-1)


def featurize_visual(items: Sequence[Item], cfg: img_mod.HogConfig = img_mod.HogConfig(),
                     loader=None, on_error=None) -> tuple[np.ndarray, list[Item]]:
    """HOG descriptors for each item's image.

    ``loader`` maps image_path -> decoded array (defaults to Pillow).
    Items whose image fails to decode are skipped and reported through
    ``on_error(item, exc)``; returns (matrix, kept items).
    """
    if loader is None:
        loader = _pil_loader
    rows = []
    kept = []
    for item in items:
        try:
            raw = loader(item.image_path)
            gray = img_mod.preprocess_image(raw)
            rows.append(img_mod.hog(gray, cfg))
            kept.append(item)
        except Exception as exc:  # noqa: BLE001 - robustness policy: skip + report
            if on_error is None:
                raise
            on_error(item, exc)
    n_feat = img_mod.hog_length(cfg)
    if not rows:
        return np.empty((0, n_feat)), []
    return np.vstack(rows), kept


def featurize_text(items: Sequence[Item], table: text_mod.EmbeddingTable,
                   tfidf: Optional[text_mod.TfidfModel] = None) -> np.ndarray:
    docs = [text_mod.tokenize(it.text) for it in items]
    if tfidf is None:
        tfidf = text_mod.fit_tfidf(docs) if docs else text_mod.TfidfModel({}, 1)
    rows = [text_mod.embed_document(doc, table, tfidf) for doc in docs]
    if not rows:
        return np.empty((0, table.dimension))
    return np.vstack(rows)


def _pil_loader(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
