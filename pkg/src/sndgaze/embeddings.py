"""Word-embedding tables (JSON Lines) and the vector operations used for SND.

File format, one JSON object per line::

    {"dimension": 1024, "source": "gpt2-c"}          # optional header
    {"word": "buffer", "vector": [0.12, -0.5, ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateWordError,
    EmbeddingError,
    MissingTableError,
    NonFiniteVectorError,
    NotEmbeddedError,
    ZeroVectorError,
)

# Hidden sizes of the two language models the tables are exported from.
KNOWN_DIMENSIONS = {"gpt2": 1024, "codellama": 4096}


def expected_dimension_for(source_label: str) -> int | None:
    """Known dimensionality for a source label such as ``"gpt2-java"``."""
    label = source_label.lower().replace("_", "").replace("-", "")
    for prefix, dim in KNOWN_DIMENSIONS.items():
        if label.startswith(prefix):
            return dim
    return None


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Immutable word -> vector map backed by one float64 matrix."""

    words: tuple[str, ...]
    matrix: np.ndarray
    source_label: str = ""
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] != len(self.words):
            raise DimensionMismatchError(
                f"matrix shape {m.shape} does not match {len(self.words)} words"
            )
        if m.shape[1] < 1:
            raise DimensionMismatchError("dimension must be >= 1")
        if not np.all(np.isfinite(m)):
            bad = int(np.argwhere(~np.isfinite(m))[0, 0])
            raise NonFiniteVectorError(f"non-finite component in vector for {self.words[bad]!r}")
        index: dict[str, int] = {}
        for i, w in enumerate(self.words):
            if w in index:
                raise DuplicateWordError(f"duplicate word {w!r}")
            index[w] = i
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_mapping(cls, vectors: Mapping[str, Iterable[float]], source_label: str = "") -> "EmbeddingTable":
        words = list(vectors)
        rows = [np.asarray(list(vectors[w]), dtype=np.float64) for w in words]
        if rows:
            dims = {r.shape for r in rows}
            if len(dims) > 1:
                raise DimensionMismatchError(f"vectors have differing shapes {sorted(dims)}")
            matrix = np.vstack(rows)
        else:
            matrix = np.zeros((0, 1))
        return cls(tuple(words), matrix, source_label)

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    def index_of(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise NotEmbeddedError(f"word {word!r} has no embedding") from None

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self.index_of(word)]

    def subset(self, words: Iterable[str]) -> "EmbeddingTable":
        ws = list(words)
        idx = [self.index_of(w) for w in ws]
        return EmbeddingTable(tuple(ws), self.matrix[idx], self.source_label)

    def scaled(self, factor: float) -> "EmbeddingTable":
        return EmbeddingTable(self.words, self.matrix * factor, self.source_label)


def load_embedding_table(path: "str | Path", expected_dim: int | None = None) -> EmbeddingTable:
    """Read a JSONL embedding table and validate it.

    Raises a distinct `EmbeddingError` subclass for a missing file, rows of
    differing dimension (or not matching `expected_dim` / the header),
    non-finite components and duplicate words.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingTableError(f"embedding table not found: {p}")
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    header_dim: int | None = None
    source = ""
    dim: int | None = None
    with p.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingError(f"{p}:{lineno}: invalid JSON ({exc.msg})") from None
            if "word" not in rec:
                if words or header_dim is not None or "dimension" not in rec:
                    raise EmbeddingError(f"{p}:{lineno}: expected a word record")
                header_dim = int(rec["dimension"])
                source = str(rec.get("source", ""))
                continue
            word, vec = rec["word"], rec.get("vector")
            if not isinstance(word, str) or not word:
                raise EmbeddingError(f"{p}:{lineno}: word must be a non-empty string")
            if not isinstance(vec, list):
                raise EmbeddingError(f"{p}:{lineno}: vector must be a list")
            if word in seen:
                raise DuplicateWordError(f"{p}:{lineno}: duplicate word {word!r}")
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise DimensionMismatchError(
                    f"{p}:{lineno}: vector for {word!r} has length {len(vec)}, expected {dim}"
                )
            try:
                values = [float(v) for v in vec]
            except (TypeError, ValueError):
                raise EmbeddingError(f"{p}:{lineno}: non-numeric component") from None
            if not all(math.isfinite(v) for v in values):
                raise NonFiniteVectorError(f"{p}:{lineno}: non-finite component for {word!r}")
            seen.add(word)
            words.append(word)
            rows.append(values)
    if not words:
        raise EmbeddingError(f"{p}: no word records")
    assert dim is not None
    for want, what in ((header_dim, "header"), (expected_dim, "expected")):
        if want is not None and dim != want:
            raise DimensionMismatchError(f"{p}: dimension {dim} does not match {what} dimension {want}")
    return EmbeddingTable(tuple(words), np.asarray(rows, dtype=np.float64), source)


def write_embedding_table(table: EmbeddingTable, path: "str | Path") -> None:
    # json emits repr() floats, so float64 values round-trip exactly
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"dimension": table.dimension, "source": table.source_label}) + "\n")
        for w, row in zip(table.words, table.matrix):
            fh.write(json.dumps({"word": w, "vector": row.tolist()}, ensure_ascii=False) + "\n")


def _as_pair(v1, v2) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(v1, dtype=np.float64)
    b = np.asarray(v2, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionMismatchError(f"vector shapes differ: {a.shape} vs {b.shape}")
    return a, b


def row_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean distances between equally shaped 2-D arrays.

    Every exact distance in the package goes through here so that the same
    pair always yields the same bits.
    """
    diff = np.ascontiguousarray(a - b)
    return np.sqrt(np.sum(diff * diff, axis=1))


def euclidean_distance(v1, v2) -> float:
    a, b = _as_pair(v1, v2)
    return float(row_distances(a[None, :], b[None, :])[0])


def cosine_similarity(v1, v2) -> float:
    a, b = _as_pair(v1, v2)
    sa, sb = np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)
    if sa == 0.0 or sb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for a zero vector")
    # rescaling first keeps tiny or huge vectors away from under/overflow
    a, b = a / sa, b / sb
    return float(np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1.0, 1.0))


@dataclass(frozen=True)
class Coverage:
    n_vocab: int
    n_covered: int
    missing: tuple[str, ...]

    @property
    def n_missing(self) -> int:
        return len(self.missing)

    @property
    def fraction(self) -> float:
        return self.n_covered / self.n_vocab if self.n_vocab else 0.0

    def as_dict(self) -> dict:
        return {
            "n_vocab": self.n_vocab,
            "n_covered": self.n_covered,
            "n_missing": self.n_missing,
            "fraction": self.fraction,
        }


def coverage(vocab_words: Iterable[str], table: EmbeddingTable) -> Coverage:
    words = sorted(set(vocab_words))
    missing = tuple(w for w in words if w not in table)
    return Coverage(len(words), len(words) - len(missing), missing)
