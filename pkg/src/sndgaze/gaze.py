"""Fixation logs and the four word-level reading-time metrics.

For one participant reading one trial, every area of interest (one
occurrence of a word, identified by ``(word, aoi_order)``) gets

* SFD: the fixation duration when the AOI received exactly one fixation,
* FFD: the duration of its first fixation,
* GD: the summed first run of consecutive fixations on it,
* RPD: everything from its first fixation until gaze lands on an AOI later
  in reading order (or the trial ends).

Word-level values are means over all defined participant/occurrence values.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Word
from .errors import GazeIngestError

METRICS = ("sfd", "ffd", "gd", "rpd")
FIXATION_COLUMNS = ("participant", "trial", "index", "word", "aoi_order", "duration_ms")
GAZE_HEADER = ("word", "metric", "value_ms", "n_observations")


@dataclass(frozen=True, slots=True)
class FixationEvent:
    participant: str
    trial: str
    index: int
    word: Word
    aoi_order: int
    duration_ms: float

    def __post_init__(self):
        if not (math.isfinite(self.duration_ms) and self.duration_ms > 0):
            raise ValueError("duration_ms must be finite and > 0")

    @property
    def aoi(self) -> tuple[Word, int]:
        return (self.word, self.aoi_order)


@dataclass(frozen=True)
class TrialMetrics:
    sfd: float | None
    ffd: float | None
    gd: float | None
    rpd: float | None

    def get(self, metric: str) -> float | None:
        return getattr(self, metric)


@dataclass(frozen=True)
class WordGazeRecord:
    word: Word
    sfd_ms: float | None = None
    ffd_ms: float | None = None
    gd_ms: float | None = None
    rpd_ms: float | None = None
    n_observations: dict[str, int] = field(default_factory=dict)

    def value(self, metric: str) -> float | None:
        return getattr(self, f"{metric}_ms")


def ingest_fixations(path: "str | Path") -> list[FixationEvent]:
    """Read and validate a fixation CSV.

    Returns events sorted by (participant, trial, index). Row numbers in
    errors are file line numbers (the header is line 1).
    """
    events: list[tuple[FixationEvent, int]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in FIXATION_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise GazeIngestError(f"missing column(s): {', '.join(missing)}", row=1)
        for row_no, row in enumerate(reader, start=2):
            try:
                index = int(row["index"])
                aoi_order = int(row["aoi_order"])
                duration = float(row["duration_ms"])
            except (TypeError, ValueError):
                raise GazeIngestError("index, aoi_order and duration_ms must be numeric", row=row_no) from None
            if not (math.isfinite(duration) and duration > 0):
                raise GazeIngestError(f"duration_ms must be > 0, got {row['duration_ms']!r}", row=row_no)
            if index < 0 or aoi_order < 0:
                raise GazeIngestError("index and aoi_order must be >= 0", row=row_no)
            if not row["word"] or not row["participant"] or not row["trial"]:
                raise GazeIngestError("participant, trial and word must be non-empty", row=row_no)
            ev = FixationEvent(row["participant"], row["trial"], index, row["word"], aoi_order, duration)
            events.append((ev, row_no))

    events.sort(key=lambda er: (er[0].participant, er[0].trial, er[0].index))
    for (p, t), group in groupby(events, key=lambda er: (er[0].participant, er[0].trial)):
        aoi_words: dict[int, str] = {}
        for expected, (ev, row_no) in enumerate(group):
            if ev.index != expected:
                raise GazeIngestError(
                    f"participant {p!r} trial {t!r}: indices not consecutive from 0 "
                    f"(expected {expected}, found {ev.index})",
                    row=row_no,
                )
            known = aoi_words.setdefault(ev.aoi_order, ev.word)
            if known != ev.word:
                raise GazeIngestError(
                    f"participant {p!r} trial {t!r}: aoi_order {ev.aoi_order} "
                    f"names both {known!r} and {ev.word!r}",
                    row=row_no,
                )
    return [ev for ev, _ in events]


def group_trials(events: Iterable[FixationEvent]) -> dict[tuple[str, str], list[FixationEvent]]:
    out: dict[tuple[str, str], list[FixationEvent]] = defaultdict(list)
    for ev in events:
        out[(ev.participant, ev.trial)].append(ev)
    for seq in out.values():
        seq.sort(key=lambda e: e.index)
    return dict(sorted(out.items()))


def _next_progression(orders: Sequence[int]) -> list[int]:
    # nxt[s] = first t > s with orders[t] > orders[s], else len(orders)
    n = len(orders)
    nxt = [n] * n
    stack: list[int] = []
    for t, o in enumerate(orders):
        while stack and orders[stack[-1]] < o:
            nxt[stack.pop()] = t
        stack.append(t)
    return nxt


def trial_metrics(events: Sequence[FixationEvent]) -> dict[tuple[Word, int], TrialMetrics]:
    """SFD/FFD/GD/RPD for every AOI fixated in one (participant, trial).

    `events` must be ordered by index. Keys are ``(word, aoi_order)``.
    """
    if not events:
        return {}
    aois = [e.aoi for e in events]
    durs = [e.duration_ms for e in events]
    nxt = _next_progression([e.aoi_order for e in events])

    first: dict[tuple[Word, int], int] = {}
    count: dict[tuple[Word, int], int] = defaultdict(int)
    for i, a in enumerate(aois):
        first.setdefault(a, i)
        count[a] += 1

    out: dict[tuple[Word, int], TrialMetrics] = {}
    for a, s in first.items():
        run_end = s
        while run_end < len(aois) and aois[run_end] == a:
            run_end += 1
        gd = sum(durs[s:run_end])
        rpd = sum(durs[s:nxt[s]])
        ffd = durs[s]
        out[a] = TrialMetrics(sfd=ffd if count[a] == 1 else None, ffd=ffd, gd=gd, rpd=rpd)
    return out


@dataclass(frozen=True)
class Observation:
    participant: str
    trial: str
    word: Word
    aoi_order: int
    metrics: TrialMetrics


def participant_observations(events: Iterable[FixationEvent]) -> list[Observation]:
    """Per-occurrence metrics for every (participant, trial)."""
    obs: list[Observation] = []
    for (p, t), seq in group_trials(events).items():
        for (w, order), m in sorted(trial_metrics(seq).items(), key=lambda kv: kv[0][1]):
            obs.append(Observation(p, t, w, order, m))
    return obs


def aggregate_word_level(
    observations: Iterable["Observation | tuple[str, Word, TrialMetrics]"],
    rpd_aggregate: str = "mean",
) -> dict[Word, WordGazeRecord]:
    """Average defined per-participant values into one record per word.

    Undefined values are skipped, never zero-filled. With
    ``rpd_aggregate="sum"`` a participant's RPD values for a word are first
    summed over trials and occurrences, and those sums are averaged.
    """
    if rpd_aggregate not in ("mean", "sum"):
        raise ValueError("rpd_aggregate must be 'mean' or 'sum'")
    values: dict[Word, dict[str, list[float]]] = defaultdict(lambda: {m: [] for m in METRICS})
    rpd_sums: dict[Word, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for ob in observations:
        if isinstance(ob, Observation):
            participant, word, metrics = ob.participant, ob.word, ob.metrics
        else:
            participant, word, metrics = ob
        slot = values[word]
        for m in METRICS:
            v = metrics.get(m)
            if v is None:
                continue
            if m == "rpd" and rpd_aggregate == "sum":
                rpd_sums[word][participant].append(v)
            else:
                slot[m].append(v)
    for word, per_p in rpd_sums.items():
        values[word]["rpd"] = [math.fsum(per_p[p]) for p in sorted(per_p)]

    records: dict[Word, WordGazeRecord] = {}
    for word in sorted(values):
        slot = values[word]
        means = {m: (math.fsum(v) / len(v) if v else None) for m, v in slot.items()}
        if all(v is None for v in means.values()):
            continue
        records[word] = WordGazeRecord(
            word,
            sfd_ms=means["sfd"],
            ffd_ms=means["ffd"],
            gd_ms=means["gd"],
            rpd_ms=means["rpd"],
            n_observations={m: len(slot[m]) for m in METRICS},
        )
    return records


def compute_word_gaze(events: Iterable[FixationEvent], rpd_aggregate: str = "mean") -> dict[Word, WordGazeRecord]:
    return aggregate_word_level(participant_observations(events), rpd_aggregate)


def write_fixations_csv(events: Iterable[FixationEvent], path: "str | Path") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIXATION_COLUMNS)
        for e in events:
            writer.writerow([e.participant, e.trial, e.index, e.word, e.aoi_order, repr(e.duration_ms)])


def write_gaze_csv(records: dict[Word, WordGazeRecord], path: "str | Path") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GAZE_HEADER)
        for w in sorted(records):
            rec = records[w]
            for m in METRICS:
                v = rec.value(m)
                if v is not None:
                    writer.writerow([w, m, repr(v), rec.n_observations.get(m, 0)])


def read_gaze_csv(path: "str | Path") -> dict[Word, WordGazeRecord]:
    raw: dict[Word, dict[str, tuple[float, int]]] = defaultdict(dict)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(GAZE_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise GazeIngestError(f"missing column(s): {', '.join(sorted(missing))}", row=1)
        for row_no, row in enumerate(reader, start=2):
            metric = row["metric"].lower()
            if metric not in METRICS:
                raise GazeIngestError(f"unknown metric {row['metric']!r}", row=row_no)
            raw[row["word"]][metric] = (float(row["value_ms"]), int(row["n_observations"]))
    out: dict[Word, WordGazeRecord] = {}
    for w in sorted(raw):
        vals = raw[w]
        out[w] = WordGazeRecord(
            w,
            **{f"{m}_ms": vals[m][0] for m in vals},
            n_observations={m: (vals[m][1] if m in vals else 0) for m in METRICS},
        )
    return out
