"""Semantic neighborhood density measured as ARC.

A global distance threshold is estimated from sampled word pairs
(mean distance minus 1.5 standard deviations). A word's neighborhood is
every other word within that threshold, and its SND is the mean cosine
similarity to those neighbors. Words with an empty neighborhood get no
ARC and carry the low sentinel value -1 downstream.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import Vocabulary, Word
from .embeddings import Coverage, EmbeddingTable, coverage, row_distances
from .errors import InsufficientCoverageError, NotEmbeddedError, ZeroVectorError

log = logging.getLogger(__name__)

DEFAULT_N_PAIRS = 10_000
THRESHOLD_SD_MULTIPLIER = 1.5
MISSING_SND_VALUE = -1.0

# pair distances are computed in chunks of at most this many float64 cells
_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class ThresholdEstimate:
    tau: float
    mu_d: float
    sigma_d: float
    n_pairs_sampled: int
    seed: int
    exhaustive: bool = False
    sigma_ddof: int = 0


@dataclass(frozen=True)
class SndScore:
    word: Word
    arc: float | None
    neighborhood_size: int
    effective_value: float

    def __post_init__(self):
        if (self.arc is None) != (self.neighborhood_size == 0):
            raise ValueError("arc must be absent exactly when the neighborhood is empty")


@dataclass
class SndResult:
    scores: dict[Word, SndScore]
    threshold: ThresholdEstimate
    coverage: Coverage
    neighborhoods: dict[Word, frozenset[Word]] | None = field(default=None, repr=False)

    def effective(self) -> dict[Word, float]:
        return {w: s.effective_value for w, s in self.scores.items()}

    def metadata(self) -> dict:
        th = self.threshold
        return {
            "tau": th.tau,
            "mu_d": th.mu_d,
            "sigma_d": th.sigma_d,
            "n_pairs": th.n_pairs_sampled,
            "seed": th.seed,
            "exhaustive": th.exhaustive,
            "sigma_ddof": th.sigma_ddof,
            "coverage": self.coverage.as_dict(),
        }


def covered_words(table: EmbeddingTable, vocab_words: Iterable[Word]) -> list[Word]:
    return sorted(w for w in set(vocab_words) if w in table)


def _pair_distances(x: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    out = np.empty(len(i), dtype=np.float64)
    step = max(1, _CHUNK_CELLS // x.shape[1])
    for s in range(0, len(i), step):
        out[s:s + step] = row_distances(x[i[s:s + step]], x[j[s:s + step]])
    return out


def estimate_threshold(
    table: EmbeddingTable,
    vocab_words: Iterable[Word],
    n_pairs: int = DEFAULT_N_PAIRS,
    seed: int = 0,
    *,
    exhaustive: bool = False,
    sigma_ddof: int = 0,
) -> ThresholdEstimate:
    """Estimate the global neighborhood threshold ``tau = mu - 1.5 * sigma``.

    Pairs of distinct words are drawn uniformly, with replacement across
    draws, from a generator seeded with `seed`. With ``exhaustive=True``
    every unordered pair is used once and `n_pairs` is ignored.
    """
    words = covered_words(table, vocab_words)
    n = len(words)
    if n < 2:
        raise InsufficientCoverageError(f"need >= 2 embedded vocabulary words, have {n}")
    x = table.matrix[[table.index_of(w) for w in words]]
    if exhaustive:
        i, j = np.triu_indices(n, k=1)
    else:
        if n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=n_pairs)
        j = rng.integers(0, n - 1, size=n_pairs)
        j = j + (j >= i)
    d = _pair_distances(x, i, j)
    mu = float(np.mean(d))
    sigma = float(np.std(d, ddof=sigma_ddof)) if len(d) > sigma_ddof else 0.0
    tau = mu - THRESHOLD_SD_MULTIPLIER * sigma
    return ThresholdEstimate(tau, mu, sigma, int(len(d)), seed, exhaustive, sigma_ddof)


def _warn_nonpositive(tau: float) -> None:
    if tau <= 0:
        msg = f"distance threshold tau={tau!r} <= 0; neighborhoods contain only exact duplicates"
        warnings.warn(msg, stacklevel=3)


def neighborhood(w: Word, table: EmbeddingTable, vocab_words: Iterable[Word], tau: float) -> set[Word]:
    """Words other than `w` whose embedding lies within `tau` of it."""
    if w not in table:
        raise NotEmbeddedError(f"word {w!r} has no embedding")
    others = [y for y in covered_words(table, vocab_words) if y != w]
    if not others or tau < 0:
        return set()
    xw = table.vector(w)
    x = table.matrix[[table.index_of(y) for y in others]]
    d = row_distances(x, np.broadcast_to(xw, x.shape))
    return {y for y, dist in zip(others, d) if dist <= tau}


def arc_snd(w: Word, neighbors: Iterable[Word], table: EmbeddingTable) -> float | None:
    """Mean cosine similarity between `w` and its neighbors; None if there are none."""
    nb = sorted(set(neighbors))
    if not nb:
        return None
    xw = table.vector(w)
    nw = np.linalg.norm(xw)
    x = table.matrix[[table.index_of(y) for y in nb]]
    nx = np.linalg.norm(x, axis=1)
    if nw == 0.0 or np.any(nx == 0.0):
        raise ZeroVectorError(f"zero vector in the neighborhood of {w!r}")
    cos = (x @ xw) / (nx * nw)
    return float(np.clip(np.mean(cos), -1.0, 1.0))


def _neighbor_masks(x: np.ndarray, tau: float, block: int):
    """Yield (start, stop, mask) with mask[r, c] true when word c is a neighbor of word start+r.

    Squared distances come from the Gram expansion; entries within a
    rounding margin of the threshold are re-decided with exact distances.
    """
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    tau2 = tau * tau
    for s in range(0, n, block):
        e = min(n, s + block)
        if tau < 0:
            yield s, e, np.zeros((e - s, n), dtype=bool)
            continue
        norms = sq[s:e, None] + sq[None, :]
        d2 = norms - 2.0 * (x[s:e] @ x.T)
        margin = 1e-10 * norms + 1e-300
        mask = d2 < tau2 - margin
        rows, cols = np.nonzero(np.abs(d2 - tau2) <= margin)
        if len(rows):
            exact = _pair_distances(x, rows + s, cols)
            mask[rows, cols] = exact <= tau
        mask[np.arange(e - s), np.arange(s, e)] = False
        yield s, e, mask


def compute_all_snd(
    vocab: "Vocabulary | Iterable[Word]",
    table: EmbeddingTable,
    n_pairs: int = DEFAULT_N_PAIRS,
    seed: int = 0,
    *,
    exhaustive: bool = False,
    sigma_ddof: int = 0,
    keep_neighborhoods: bool = False,
) -> SndResult:
    """Threshold, neighborhoods and ARC for every embedded vocabulary word."""
    vocab_words = vocab.words if isinstance(vocab, Vocabulary) else list(vocab)
    cov = coverage(vocab_words, table)
    threshold = estimate_threshold(
        table, vocab_words, n_pairs, seed, exhaustive=exhaustive, sigma_ddof=sigma_ddof
    )
    _warn_nonpositive(threshold.tau)
    if cov.n_missing:
        log.info("%d of %d vocabulary words have no embedding", cov.n_missing, cov.n_vocab)

    words = covered_words(table, vocab_words)
    x = table.matrix[[table.index_of(w) for w in words]]
    n, d = x.shape
    norms = np.linalg.norm(x, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    xn = x / safe[:, None]
    block = max(1, min(n, _CHUNK_CELLS // max(n, d)))

    scores: dict[Word, SndScore] = {}
    hoods: dict[Word, frozenset[Word]] | None = {} if keep_neighborhoods else None
    for s, e, mask in _neighbor_masks(x, threshold.tau, block):
        counts = mask.sum(axis=1)
        cos = xn[s:e] @ xn.T
        sums = np.where(mask, cos, 0.0).sum(axis=1)
        for r in range(e - s):
            w = words[s + r]
            k = int(counts[r])
            if k and (norms[s + r] == 0 or np.any(norms[mask[r]] == 0)):
                raise ZeroVectorError(f"zero vector in the neighborhood of {w!r}")
            arc = float(np.clip(sums[r] / k, -1.0, 1.0)) if k else None
            scores[w] = SndScore(w, arc, k, arc if arc is not None else MISSING_SND_VALUE)
            if hoods is not None:
                hoods[w] = frozenset(words[c] for c in np.flatnonzero(mask[r]))
    return SndResult(scores, threshold, cov, hoods)


SND_HEADER = ("word", "arc", "neighborhood_size", "effective_value")


def write_snd_csv(result: SndResult, path: "str | Path", metadata_path: "str | Path | None" = None) -> Path:
    """Write the per-word CSV and its JSON metadata sidecar; returns the sidecar path."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SND_HEADER)
        for w in sorted(result.scores):
            sc = result.scores[w]
            writer.writerow([w, "" if sc.arc is None else repr(sc.arc), sc.neighborhood_size, repr(sc.effective_value)])
    meta = Path(metadata_path) if metadata_path else path.with_suffix(".json")
    meta.write_text(json.dumps(result.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return meta


def read_snd_csv(path: "str | Path") -> dict[Word, SndScore]:
    out: dict[Word, SndScore] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(SND_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            arc = float(row["arc"]) if row["arc"] else None
            eff = float(row["effective_value"])
            if not math.isfinite(eff):
                raise ValueError(f"{path}: non-finite effective_value for {row['word']!r}")
            out[row["word"]] = SndScore(row["word"], arc, int(row["neighborhood_size"]), eff)
    return out
