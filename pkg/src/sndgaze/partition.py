"""High/low word groups from median and quartile splits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import Word
from .errors import DegenerateSplitError
from .gaze import METRICS, WordGazeRecord


@dataclass(frozen=True)
class GroupAssignment:
    scheme: str
    group1: frozenset[Word]
    group2: frozenset[Word]
    cutpoints: tuple[float, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.group1 & self.group2:
            raise ValueError("groups must be disjoint")

    @property
    def is_empty(self) -> bool:
        return not self.group1 or not self.group2

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "cutpoints": list(self.cutpoints),
            "group1": sorted(self.group1),
            "group2": sorted(self.group2),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GroupAssignment":
        return cls(d["scheme"], frozenset(d["group1"]), frozenset(d["group2"]), tuple(d.get("cutpoints", ())))


def write_assignments_json(assignments: Mapping[str, GroupAssignment], path: "str | Path") -> None:
    payload = {name: a.as_dict() for name, a in assignments.items()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def median_split(scores: Mapping[Word, float], scheme: str = "median") -> GroupAssignment:
    """group1 holds every word scoring at or above the median."""
    if len(scores) < 2:
        raise DegenerateSplitError("median split needs at least 2 scored words")
    values = np.fromiter(scores.values(), dtype=np.float64, count=len(scores))
    med = float(np.median(values))
    high = frozenset(w for w, s in scores.items() if s >= med)
    low = frozenset(scores) - high
    if not low:
        raise DegenerateSplitError(f"every score is >= the median {med!r}; low group is empty")
    return GroupAssignment(scheme, high, low, (med,))


def joint_group(hsnd: Iterable[Word], lf: Iterable[Word], vocab: Iterable[Word]) -> GroupAssignment:
    """High-SND and low-frequency words against everything else."""
    hsnd, lf, vocab = frozenset(hsnd), frozenset(lf), frozenset(vocab)
    if not (hsnd <= vocab and lf <= vocab):
        raise ValueError("hsnd and lf must be subsets of vocab")
    g1 = hsnd & lf
    notes = ("joint group is empty; comparisons are skipped",) if not g1 else ()
    return GroupAssignment("joint_hsnd_lf", g1, vocab - g1, (), notes)


def quartile_split(scores: Mapping[Word, float], scheme: str = "quartile") -> GroupAssignment:
    """Upper quartile (>= Q0.75) against lower quartile (<= Q0.25); the middle half is dropped.

    Quartiles use linear interpolation between order statistics.
    """
    if len(scores) < 4:
        raise DegenerateSplitError("quartile split needs at least 4 scored words")
    values = np.fromiter(scores.values(), dtype=np.float64, count=len(scores))
    q25, q75 = (float(q) for q in np.quantile(values, [0.25, 0.75], method="linear"))
    if q25 == q75:
        raise DegenerateSplitError(f"lower and upper quartiles coincide ({q25!r})")
    high = frozenset(w for w, s in scores.items() if s >= q75)
    low = frozenset(w for w, s in scores.items() if s <= q25)
    return GroupAssignment(scheme, high, low, (q25, q75))


def label_words_by_metric(
    gaze: Mapping[Word, WordGazeRecord],
    metric: str,
    split: str = "median",
    *,
    split_on: str = "metric",
    snd: Mapping[Word, float] | None = None,
) -> dict[Word, int]:
    """Binary labels (1 = high group) for one metric's prediction task.

    Words without a value for `metric` are excluded. By default groups come
    from splitting the metric itself; ``split_on="snd"`` instead splits the
    task's words on their SND values (requires `snd`).
    """
    metric = metric.lower()
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    scores = {w: rec.value(metric) for w, rec in gaze.items() if rec.value(metric) is not None}
    if split_on == "snd":
        if snd is None:
            raise ValueError("split_on='snd' needs snd scores")
        scores = {w: snd[w] for w in scores if w in snd}
    elif split_on != "metric":
        raise ValueError("split_on must be 'metric' or 'snd'")
    if split == "median":
        a = median_split(scores, "metric_median")
    elif split == "quartile":
        a = quartile_split(scores, "metric_quartile")
    else:
        raise ValueError("split must be 'median' or 'quartile'")
    labels = {w: 1 for w in a.group1}
    labels.update({w: 0 for w in a.group2})
    return dict(sorted(labels.items()))
