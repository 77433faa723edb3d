"""Text pipeline: tokenization, TF-IDF weighting, embedding lookup and pooling."""

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Whitespace split, punctuation stripped, lowercased, empties dropped."""
    tokens = []
    for raw in text.split():
        tok = "".join(ch for ch in raw if not _is_punct(ch)).lower()
        if tok:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class TfidfModel:
    doc_freq: dict
    n_docs: int

    def idf(self, token: str) -> float:
        # smoothed; finite even for unseen tokens (df = 0)
        df = self.doc_freq.get(token, 0)
        return math.log((1 + self.n_docs) / (1 + df)) + 1.0

    def weight(self, token: str, tf: int) -> float:
        return tf * self.idf(token)


def fit_tfidf(corpus: Iterable[Sequence[str]]) -> TfidfModel:
    """Document frequencies counted once per document."""
    df: Counter = Counter()
    n = 0
    for doc in corpus:
        n += 1
        df.update(set(doc))
    if n == 0:
        raise ValueError("corpus must be non-empty")
    return TfidfModel(dict(df), n)


class EmbeddingTable:
    """token -> dense vector map; all vectors share one dimension."""

    def __init__(self, vocabulary: dict, dimension: int):
        self.vocabulary = vocabulary
        self.dimension = dimension

    def __contains__(self, token: str) -> bool:
        return token in self.vocabulary

    def get(self, token: str):
        return self.vocabulary.get(token)

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        """Text format: one line per token, token then D space-separated floats."""
        vocab: dict = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    continue
                token = parts[0].lower()
                vec = np.array([float(v) for v in parts[1:]])
                if dim is None:
                    dim = vec.size
                elif vec.size != dim:
                    raise ValueError(
                        f"line {lineno}: dimension {vec.size} != {dim}")
                vocab[token] = vec
        if dim is None:
            raise ValueError(f"embedding file {path} is empty")
        return cls(vocab, dim)


def embed_document(tokens: Sequence[str], table: EmbeddingTable,
                   tfidf: TfidfModel) -> np.ndarray:
    """TF-IDF-weighted average of token embeddings.

    Unknown tokens contribute a zero vector but their weight stays in the
    denominator; documents with no tokens (or zero total weight) map to the
    zero vector.
    """
    acc = np.zeros(table.dimension)
    total = 0.0
    for token, tf in sorted(Counter(tokens).items()):
        w = tfidf.weight(token, tf)
        total += w
        vec = table.get(token)
        if vec is not None:
            acc += w * vec
    if total <= 0.0:
        return np.zeros(table.dimension)
    return acc / total
