"""Seeded synthetic corpora, embeddings and fixation logs with planted effects.

Words in tight clusters end up with high ARC and scattered words with low
(or no) ARC. Token counts follow a Zipf law with ranks assigned
independently of cluster membership. Every fixation on a word that is both
clustered and below the median count gets ``gaze_effect_ms`` added.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Language, Vocabulary, write_vocabulary_csv
from .embeddings import EmbeddingTable, write_embedding_table
from .errors import SndGazeError
from .gaze import FixationEvent, write_fixations_csv

MIN_DURATION_MS = 20.0


class SynthSpecError(SndGazeError, ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    n_words: int = 240
    dimension: int = 24
    # (size, center_spread, within_spread) for each tight cluster
    cluster_plan: tuple[tuple[int, float, float], ...] = ((30, 1.0, 0.05),) * 4
    zipf_exponent: float = 1.1
    gaze_base_ms: float = 250.0
    gaze_effect_ms: float = 30.0
    noise_sd_ms: float = 30.0
    n_participants: int = 10
    seed: int = 0
    n_tokens: int = 20_000
    words_per_trial: int = 20
    occurrences_per_word: int = 5
    scatter_sd: float = 1.0
    skip_prob: float = 0.1
    refixation_prob: float = 0.1
    regression_prob: float = 0.05
    language: str = "C"
    source_label: str = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "cluster_plan", tuple(tuple(c) for c in self.cluster_plan))
        self.validate()

    def validate(self) -> None:
        if self.n_words < 4 or self.dimension < 1:
            raise SynthSpecError("need n_words >= 4 and dimension >= 1")
        for size, center, within in self.cluster_plan:
            if size < 1 or center < 0 or within < 0:
                raise SynthSpecError(f"invalid cluster entry {(size, center, within)}")
        if sum(c[0] for c in self.cluster_plan) > self.n_words:
            raise SynthSpecError("cluster sizes exceed n_words")
        if self.noise_sd_ms < 0 or self.scatter_sd < 0:
            raise SynthSpecError("spreads must be >= 0")
        if self.n_participants < 1 or self.words_per_trial < 1 or self.occurrences_per_word < 1:
            raise SynthSpecError("need at least one participant and one word per trial")
        if self.n_tokens < self.n_words:
            raise SynthSpecError("n_tokens must be >= n_words so every word occurs")
        for name in ("skip_prob", "refixation_prob", "regression_prob"):
            if not 0 <= getattr(self, name) < 1:
                raise SynthSpecError(f"{name} must lie in [0, 1)")
        Language.parse(self.language)

    @classmethod
    def from_json(cls, path: "str | Path") -> "SynthSpec":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cluster_plan"] = [list(c) for c in self.cluster_plan]
        return d


@dataclass
class SynthData:
    spec: SynthSpec
    table: EmbeddingTable
    vocabulary: Vocabulary
    events: list[FixationEvent]
    tight: frozenset[str]
    planted: frozenset[str]
    corpus_lines: list[str] = field(repr=False, default_factory=list)

    def write(self, out_dir: "str | Path") -> dict[str, Path]:
        """Write embeddings, vocabulary, fixations, a source corpus and the truth file."""
        out = Path(out_dir)
        (out / "corpus").mkdir(parents=True, exist_ok=True)
        ext = ".c" if Language.parse(self.spec.language) is Language.C else ".java"
        paths = {
            "embeddings": out / "embeddings.jsonl",
            "vocabulary": out / "vocabulary.csv",
            "fixations": out / "fixations.csv",
            "corpus": out / "corpus",
            "truth": out / "truth.json",
        }
        write_embedding_table(self.table, paths["embeddings"])
        write_vocabulary_csv(self.vocabulary, paths["vocabulary"])
        write_fixations_csv(self.events, paths["fixations"])
        (paths["corpus"] / f"synth{ext}").write_text("\n".join(self.corpus_lines) + "\n", encoding="utf-8")
        truth = {"spec": self.spec.to_dict(), "tight": sorted(self.tight), "planted": sorted(self.planted)}
        paths["truth"].write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return paths


def zipf_counts(n_words: int, n_tokens: int, exponent: float) -> np.ndarray:
    """Counts for ranks 1..n_words proportional to rank**-exponent, each >= 1."""
    weights = np.arange(1, n_words + 1, dtype=np.float64) ** -exponent
    counts = np.maximum(1, np.rint(n_tokens * weights / weights.sum())).astype(np.int64)
    return counts


def _embeddings(spec: SynthSpec, rng: np.random.Generator, order: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, d = spec.n_words, spec.dimension
    x = np.empty((n, d))
    tight = np.zeros(n, dtype=bool)
    pos = 0
    for size, center_spread, within in spec.cluster_plan:
        center = rng.normal(0.0, center_spread, size=d)
        idx = order[pos:pos + size]
        x[idx] = center + rng.normal(0.0, within, size=(size, d))
        tight[idx] = True
        pos += size
    rest = order[pos:]
    x[rest] = rng.normal(0.0, spec.scatter_sd, size=(len(rest), d))
    return x, tight


def _reading_pass(
    spec: SynthSpec,
    rng: np.random.Generator,
    aois: list[str],
    mean_ms: dict[str, float],
) -> list[tuple[str, int, float]]:
    def dur(word: str) -> float:
        return float(max(MIN_DURATION_MS, mean_ms[word] + rng.normal(0.0, spec.noise_sd_ms)))

    seq: list[tuple[str, int, float]] = []
    for k, word in enumerate(aois):
        if rng.random() < spec.skip_prob:
            continue
        n_fix = 2 if rng.random() < spec.refixation_prob else 1
        for _ in range(n_fix):
            seq.append((word, k, dur(word)))
        if k > 0 and rng.random() < spec.regression_prob:
            back = int(rng.integers(0, k))
            seq.append((aois[back], back, dur(aois[back])))
            if rng.random() < 0.5:
                seq.append((word, k, dur(word)))
    return seq


def generate(spec: SynthSpec) -> SynthData:
    """Build a complete synthetic dataset; identical specs give identical data."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.n_words
    width = max(4, len(str(n - 1)))
    words = [f"w{i:0{width}d}" for i in range(n)]

    x, tight_mask = _embeddings(spec, rng, rng.permutation(n))
    table = EmbeddingTable(tuple(words), x, spec.source_label)

    counts = zipf_counts(n, spec.n_tokens, spec.zipf_exponent)[rng.permutation(n)]
    vocab = Vocabulary.from_counts(dict(zip(words, counts.tolist())), spec.language)
    low_freq = counts < np.median(counts)
    planted_mask = tight_mask & low_freq

    stream = np.repeat(np.arange(n), counts)
    rng.shuffle(stream)
    lines = [" ".join(words[i] for i in stream[s:s + 12]) + ";" for s in range(0, len(stream), 12)]

    mean_ms = {w: spec.gaze_base_ms + spec.gaze_effect_ms * bool(p) for w, p in zip(words, planted_mask)}
    # each word appears occurrences_per_word times across the trials
    trial_order = np.concatenate([rng.permutation(n) for _ in range(spec.occurrences_per_word)])
    trials = [
        [words[i] for i in trial_order[s:s + spec.words_per_trial]]
        for s in range(0, len(trial_order), spec.words_per_trial)
    ]
    events: list[FixationEvent] = []
    for p in range(spec.n_participants):
        pid = f"p{p:02d}"
        for t, aois in enumerate(trials):
            for idx, (word, order, duration) in enumerate(_reading_pass(spec, rng, aois, mean_ms)):
                events.append(FixationEvent(pid, f"t{t:03d}", idx, word, order, duration))

    return SynthData(
        spec,
        table,
        vocab,
        events,
        frozenset(w for w, t in zip(words, tight_mask) if t),
        frozenset(w for w, p in zip(words, planted_mask) if p),
        lines,
    )
