"""Pluggable sentence encoding: mean-pooled word vectors plus cosine similarity.

The default backend averages vectors loaded from a plain-text table (one
token per line followed by its components). Any object exposing
``encode(text) -> SentenceVector`` can stand in for it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from clarifier.exceptions import RecordError

_TOKEN = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class SentenceVector:
    """A dense sentence embedding; ``oov`` marks an all-unknown sentence."""

    values: np.ndarray
    oov: bool = False

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sentence vector has non-finite components")


class WordVectorTable:
    """token -> vector mapping with a single fixed dimension."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise ValueError("word vector table is empty")
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
        self._vectors = {t: np.asarray(v, dtype=float) for t, v in vectors.items()}
        self.dim = next(iter(self._vectors.values())).shape[0]

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def __getitem__(self, token: str) -> np.ndarray:
        return self._vectors[token]

    def __len__(self) -> int:
        return len(self._vectors)

    def tokens(self) -> list[str]:
        return list(self._vectors)


def load_vectors(path) -> WordVectorTable:
    """Read the common text layout: token then d space-separated reals per line."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            token, *components = parts
            if dim is None:
                dim = len(components)
                if dim == 0:
                    raise RecordError(str(path), line_no, "no vector components")
            if len(components) != dim:
                raise RecordError(
                    str(path), line_no, f"expected {dim} components, got {len(components)}"
                )
            try:
                vectors[token] = np.array([float(c) for c in components])
            except ValueError as exc:
                raise RecordError(str(path), line_no, "non-numeric component") from exc
    if not vectors:
        raise RecordError(str(path), 0, "empty vector file")
    return WordVectorTable(vectors)


def save_vectors(table: WordVectorTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token in table.tokens():
            components = " ".join(repr(float(x)) for x in table[token])
            fh.write(f"{token} {components}\n")


def embed(text: str, table: WordVectorTable) -> SentenceVector:
    """Mean of the vectors of in-vocabulary tokens.

    Unknown tokens are skipped; a sentence with no known token embeds to the
    zero vector, flagged via ``oov``.
    """
    if not text.strip():
        raise ValueError("cannot embed empty text")
    rows = [table[t] for t in tokenize(text) if t in table]
    if not rows:
        return SentenceVector(np.zeros(table.dim), oov=True)
    return SentenceVector(np.mean(rows, axis=0))


def cosine(a: SentenceVector, b: SentenceVector) -> float:
    """Standard cosine similarity; zero vectors compare as 0, not an error.

    The result is clamped to [-1, 1] so float rounding cannot leak out of
    the mathematical range.
    """
    norm_a = float(np.linalg.norm(a.values))
    norm_b = float(np.linalg.norm(b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(a.values, b.values) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))


class AveragingEncoder:
    """Default sentence encoder: word-vector averaging with a small memo cache."""

    def __init__(self, table: WordVectorTable, cache_size: int = 4096):
        self.table = table
        self._encode = lru_cache(maxsize=cache_size)(self._encode_uncached)

    def _encode_uncached(self, text: str) -> SentenceVector:
        return embed(text, self.table)

    def encode(self, text: str) -> SentenceVector:
        return self._encode(text)

    def similarity(self, a: str, b: str) -> float:
        return cosine(self.encode(a), self.encode(b))
