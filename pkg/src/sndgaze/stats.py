"""Model-free group comparisons of gaze metrics.

Each comparison winsorizes both samples, runs a one-sided permutation
test of the difference in means, reports Hedges' g, and adjusts the four
metric p-values of the comparison with Benjamini-Hochberg.
"""

from __future__ import annotations

import csv
import itertools
import math
import zlib
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Word
from .errors import StatsError
from .gaze import METRICS, WordGazeRecord
from .partition import GroupAssignment, joint_group, median_split

ALTERNATIVES = ("g1_greater", "g2_greater", "two_sided")
DEFAULT_SEED = 1234
DEFAULT_N_PERM = 10_000
MAX_EXHAUSTIVE = 2_000_000

# (label, alternative) in reporting order; for frequency the low group is
# expected to draw longer fixations
COMPARISONS = (
    ("V_HSND vs V_LSND", "g1_greater"),
    ("V_HF vs V_LF", "g2_greater"),
    ("V_HSND,LF vs V_Other", "g1_greater"),
)


def winsorize(sample, lower_pct: float = 5.0, upper_pct: float = 95.0, tails: str = "both") -> np.ndarray:
    """Clamp values outside the given percentiles (linear interpolation)."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        raise StatsError("cannot winsorize an empty sample")
    if not 0 <= lower_pct < upper_pct <= 100:
        raise ValueError("need 0 <= lower_pct < upper_pct <= 100")
    lo, hi = np.percentile(x, [lower_pct, upper_pct], method="linear")
    if tails == "both":
        return np.clip(x, lo, hi)
    if tails == "upper":
        return np.minimum(x, hi)
    if tails == "lower":
        return np.maximum(x, lo)
    raise ValueError("tails must be 'both', 'upper' or 'lower'")


def _extreme_count(t_perm: np.ndarray, t_obs: float, alternative: str, tol: float) -> int:
    if alternative == "g1_greater":
        return int(np.count_nonzero(t_perm >= t_obs - tol))
    if alternative == "g2_greater":
        return int(np.count_nonzero(t_perm <= t_obs + tol))
    return int(np.count_nonzero(np.abs(t_perm) >= abs(t_obs) - tol))


def permutation_test_means(
    s1,
    s2,
    n_perm: int = DEFAULT_N_PERM,
    alternative: str = "g1_greater",
    seed=DEFAULT_SEED,
    *,
    exhaustive: bool = False,
    batch: int = 1000,
) -> float:
    """p-value for ``mean(s1) - mean(s2)`` under random relabeling.

    Monte Carlo mode returns ``(1 + #extreme) / (1 + n_perm)``. Exhaustive
    mode enumerates every split of the pooled sample (the observed one
    included) and returns the exact fraction at least as extreme.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    a = np.asarray(s1, dtype=np.float64).ravel()
    b = np.asarray(s2, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise StatsError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    n1, n2 = a.size, b.size
    total = pooled.sum()

    def stat(sum1):
        return sum1 / n1 - (total - sum1) / n2

    t_obs = float(stat(pooled[:n1].sum()))
    # relabelings that tie the observed statistic count as extreme
    tol = 1e-12 * max(1.0, float(np.max(np.abs(pooled))))

    if exhaustive:
        n_comb = math.comb(n1 + n2, n1)
        if n_comb > MAX_EXHAUSTIVE:
            raise StatsError(f"{n_comb} relabelings is too many for exhaustive mode")
        sums = np.fromiter(
            (pooled[list(c)].sum() for c in itertools.combinations(range(n1 + n2), n1)),
            dtype=np.float64, count=n_comb,
        )
        return _extreme_count(stat(sums), t_obs, alternative, tol) / n_comb

    if n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    rng = np.random.default_rng(seed)
    base = np.arange(n1 + n2)
    hits = 0
    for start in range(0, n_perm, batch):
        m = min(batch, n_perm - start)
        idx = rng.permuted(np.broadcast_to(base, (m, base.size)), axis=1)[:, :n1]
        hits += _extreme_count(stat(pooled[idx].sum(axis=1)), t_obs, alternative, tol)
    return (1 + hits) / (1 + n_perm)


def hedges_g(s1, s2) -> float:
    """Absolute bias-corrected standardized mean difference (pooled sample SD)."""
    a = np.asarray(s1, dtype=np.float64).ravel()
    b = np.asarray(s2, dtype=np.float64).ravel()
    n1, n2 = a.size, b.size
    if n1 < 1 or n2 < 1 or n1 + n2 < 3:
        raise StatsError("Hedges' g needs n1, n2 >= 1 and n1 + n2 >= 3")
    ss1 = float(np.sum((a - a.mean()) ** 2))
    ss2 = float(np.sum((b - b.mean()) ** 2))
    pooled_var = (ss1 + ss2) / (n1 + n2 - 2)
    if not pooled_var > 0:
        raise StatsError("pooled variance is zero")
    correction = 1.0 - 3.0 / (4.0 * (n1 + n2) - 9.0)
    return float(abs(correction * (a.mean() - b.mean()) / math.sqrt(pooled_var)))


def bh_fdr(p_values: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg step-up adjusted p-values, in input order."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        return []
    if np.any(~np.isfinite(p)) or np.any(p <= 0) or np.any(p > 1):
        raise StatsError("p-values must lie in (0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    # scale by m/rank >= 1 so rounding can never push an adjusted value below its p
    ranked = p[order] * (m / np.arange(1, m + 1))
    ranked = np.minimum.accumulate(ranked[::-1])[::-1]
    adj = np.empty(m)
    adj[order] = np.minimum(ranked, 1.0)
    return adj.tolist()


@dataclass(frozen=True)
class StatsConfig:
    n_perm: int = DEFAULT_N_PERM
    seed: int = DEFAULT_SEED
    lower_pct: float = 5.0
    upper_pct: float = 95.0
    tails: str = "both"
    hedges_on: str = "winsorized"
    two_sided: bool = False


@dataclass(frozen=True)
class ComparisonResult:
    metric: str
    comparison: str
    n1: int
    n2: int
    mu1: float
    mu2: float
    hedges_g: float
    p: float
    p_fdr: float
    direction: str

    def __post_init__(self):
        if self.p_fdr < self.p:
            raise ValueError("p_fdr must be >= p")


MODEL_FREE_HEADER = tuple(f.name for f in fields(ComparisonResult))


def _metric_seed(seed: int, comparison: str, metric: str) -> list[int]:
    return [seed, zlib.crc32(comparison.encode("utf-8")), METRICS.index(metric)]


def compare_groups(
    gaze: Mapping[Word, WordGazeRecord],
    assignment: GroupAssignment,
    comparison: str,
    alternative: str = "g1_greater",
    config: StatsConfig | None = None,
) -> tuple[list[ComparisonResult], list[str]]:
    """Compare group1 against group2 on every gaze metric.

    Returns the result rows and notes about metrics that were skipped
    because a group had fewer than two observations.
    """
    cfg = config or StatsConfig()
    if cfg.two_sided:
        alternative = "two_sided"
    notes: list[str] = []
    pending = []
    for metric in METRICS:
        obs = []
        for group in (assignment.group1, assignment.group2):
            obs.append([gaze[w].value(metric) for w in sorted(group)
                        if w in gaze and gaze[w].value(metric) is not None])
        if min(len(obs[0]), len(obs[1])) < 2:
            notes.append(f"{comparison}/{metric}: skipped (n1={len(obs[0])}, n2={len(obs[1])})")
            continue
        w1 = winsorize(obs[0], cfg.lower_pct, cfg.upper_pct, cfg.tails)
        w2 = winsorize(obs[1], cfg.lower_pct, cfg.upper_pct, cfg.tails)
        p = permutation_test_means(w1, w2, cfg.n_perm, alternative, _metric_seed(cfg.seed, comparison, metric))
        g_in = (w1, w2) if cfg.hedges_on == "winsorized" else (obs[0], obs[1])
        try:
            g = hedges_g(*g_in)
        except StatsError as exc:
            notes.append(f"{comparison}/{metric}: hedges_g undefined ({exc})")
            g = 0.0
        mu1, mu2 = float(w1.mean()), float(w2.mean())
        pending.append((metric, len(w1), len(w2), mu1, mu2, g, p))

    adjusted = bh_fdr([row[-1] for row in pending])
    results = [
        ComparisonResult(m, comparison, n1, n2, mu1, mu2, g, p, max(q, p),
                         "g1_greater" if mu1 >= mu2 else "g2_greater")
        for (m, n1, n2, mu1, mu2, g, p), q in zip(pending, adjusted)
    ]
    return results, notes


def model_free_assignments(
    snd: Mapping[Word, float],
    tf: Mapping[Word, float],
    domain: Iterable[Word],
) -> dict[str, GroupAssignment]:
    """The three comparison partitions over `domain` (words with SND and TF)."""
    words = sorted(set(domain))
    snd_split = median_split({w: snd[w] for w in words}, "snd_median")
    tf_split = median_split({w: tf[w] for w in words}, "tf_median")
    joint = joint_group(snd_split.group1, tf_split.group2, words)
    return {
        COMPARISONS[0][0]: snd_split,
        COMPARISONS[1][0]: tf_split,
        COMPARISONS[2][0]: joint,
    }


def run_model_free(
    gaze: Mapping[Word, WordGazeRecord],
    snd: Mapping[Word, float],
    tf: Mapping[Word, float],
    config: StatsConfig | None = None,
    domain: Iterable[Word] | None = None,
) -> tuple[list[ComparisonResult], dict[str, GroupAssignment], list[str]]:
    """All three comparisons times four metrics.

    The default domain is every word with an SND value, a TF value and at
    least one gaze observation.
    """
    if domain is None:
        domain = [w for w in gaze if w in snd and w in tf]
    assignments = model_free_assignments(snd, tf, domain)
    rows: list[ComparisonResult] = []
    notes: list[str] = []
    for label, alternative in COMPARISONS:
        a = assignments[label]
        if a.is_empty:
            notes.append(f"{label}: a group is empty; comparison skipped")
            continue
        r, n = compare_groups(gaze, a, label, alternative, config)
        rows.extend(r)
        notes.extend(n)
    return rows, assignments, notes


def write_model_free_csv(rows: Iterable[ComparisonResult], path: "str | Path") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MODEL_FREE_HEADER)
        for r in rows:
            d = asdict(r)
            writer.writerow([repr(v) if isinstance(v, float) else v for v in d.values()])


def read_model_free_csv(path: "str | Path") -> list[ComparisonResult]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ComparisonResult(
                row["metric"], row["comparison"], int(row["n1"]), int(row["n2"]),
                float(row["mu1"]), float(row["mu2"]), float(row["hedges_g"]),
                float(row["p"]), float(row["p_fdr"]), row["direction"],
            ))
    return out
