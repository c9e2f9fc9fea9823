"""Binomial-logit GLM on (SND, TF), leave-one-word-out evaluation."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .corpus import Word
from .errors import SingleClassError, StatsError
from .gaze import WordGazeRecord
from .partition import label_words_by_metric

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-8
DEFAULT_COEF_CAP = 30.0
# keeps predicted probabilities strictly inside (0, 1)
_ETA_LIMIT = 35.0


@dataclass(frozen=True)
class GlmFit:
    """Coefficients on the standardized scale, intercept first."""

    coefficients: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float
    feature_mean: np.ndarray
    feature_sd: np.ndarray
    separated: bool = False

    @property
    def n_features(self) -> int:
        return len(self.feature_mean)

    @property
    def raw_coefficients(self) -> np.ndarray:
        """Coefficients on the original feature scale, intercept first."""
        slopes = self.coefficients[1:] / self.feature_sd
        intercept = self.coefficients[0] - float(slopes @ self.feature_mean)
        return np.concatenate([[intercept], slopes])

    def standardize(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.feature_mean) / self.feature_sd


def _log_likelihood(y: np.ndarray, eta: np.ndarray) -> float:
    # sum of y*eta - log(1 + e^eta), stable for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit_logistic(
    features,
    labels,
    *,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    coef_cap: float = DEFAULT_COEF_CAP,
) -> GlmFit:
    """Maximum-likelihood logistic regression by iteratively reweighted least squares.

    Features are z-scored internally. Iteration stops when the largest
    coefficient change drops below `tol`. If any coefficient would exceed
    `coef_cap` in magnitude the data are treated as (quasi-)separated: the
    coefficients are clipped, ``separated`` is set and ``converged`` is False.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels, dtype=np.float64).ravel()
    n, k = x.shape
    if len(y) != n:
        raise ValueError("features and labels differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if n < k + 1:
        raise StatsError(f"need at least {k + 1} rows for {k} features, got {n}")
    if y.min() == y.max():
        raise SingleClassError("labels contain a single class")

    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    z = np.column_stack([np.ones(n), (x - mean) / sd])

    beta = np.zeros(k + 1)
    ll = _log_likelihood(y, z @ beta)
    converged = separated = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = z @ beta
        p = expit(eta)
        w = p * (1.0 - p)
        grad = z.T @ (y - p)
        hess = (z * w[:, None]).T @ z
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        # step halving guards against overshooting on flat likelihoods
        for _ in range(30):
            cand = beta + step
            cand_ll = _log_likelihood(y, z @ cand)
            if cand_ll >= ll - 1e-12 * (1.0 + abs(ll)):
                break
            step = step / 2.0
        if np.max(np.abs(cand)) > coef_cap:
            beta = np.clip(cand, -coef_cap, coef_cap)
            ll = _log_likelihood(y, z @ beta)
            separated = True
            break
        delta = np.max(np.abs(cand - beta))
        beta, ll = cand, cand_ll
        if delta < tol:
            converged = True
            break
    return GlmFit(beta, converged, it, ll, mean, sd, separated)


def predict_proba(fit: GlmFit, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None] if fit.n_features == 1 else x[None, :]
    if x.shape[1] != fit.n_features:
        raise ValueError(f"expected {fit.n_features} features, got {x.shape[1]}")
    eta = fit.coefficients[0] + fit.standardize(x) @ fit.coefficients[1:]
    return expit(np.clip(eta, -_ETA_LIMIT, _ETA_LIMIT))


def predict(fit: GlmFit, feature_row) -> float:
    """Probability of the positive class for one feature row."""
    row = np.atleast_1d(np.asarray(feature_row, dtype=np.float64))
    if row.ndim != 1 or row.size != fit.n_features:
        raise ValueError(f"expected {fit.n_features} features, got {row.size}")
    return float(predict_proba(fit, row[None, :])[0])


@dataclass(frozen=True)
class LooResult:
    probabilities: np.ndarray
    skipped: tuple[int, ...] = ()
    separated_folds: int = 0
    word_ids: tuple = ()


def loo_cv(features, labels, word_ids: Sequence | None = None, **fit_kwargs) -> LooResult:
    """Out-of-sample probability for each row from a fit on all other rows.

    Folds whose training labels are a single class are skipped (NaN) and
    listed in ``skipped``.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels, dtype=np.float64).ravel()
    n = len(y)
    if n < 3:
        raise StatsError("leave-one-out needs at least 3 rows")
    ids = tuple(word_ids) if word_ids is not None else tuple(range(n))
    if len(ids) != n:
        raise ValueError("word_ids must match the number of rows")
    probs = np.full(n, np.nan)
    skipped: list[int] = []
    separated = 0
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        keep[i] = False
        try:
            fit = fit_logistic(x[keep], y[keep], **fit_kwargs)
        except (SingleClassError, StatsError):
            skipped.append(i)
        else:
            separated += fit.separated
            probs[i] = predict_proba(fit, x[i:i + 1])[0]
        keep[i] = True
    if skipped:
        warnings.warn(f"{len(skipped)} leave-one-out fold(s) skipped", stacklevel=2)
    return LooResult(probs, tuple(skipped), separated, ids)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float
    tn: int
    fp: int
    fn: int
    tp: int
    n: int
    flags: tuple[str, ...] = field(default=())

    @property
    def confusion(self) -> tuple[int, int, int, int]:
        return (self.tn, self.fp, self.fn, self.tp)


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC with average ranks for tied scores."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return math.nan
    ranks = rankdata(s, method="average")
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(probabilities, labels, threshold: float = 0.5) -> EvalReport:
    """Confusion matrix, threshold metrics and AUC.

    Rows with a NaN probability (skipped folds) are dropped and flagged.
    Zero denominators give 0 with a flag.
    """
    p = np.asarray(probabilities, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if len(p) != len(y):
        raise ValueError("probabilities and labels differ in length")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    flags: list[str] = []
    ok = ~np.isnan(p)
    if not ok.all():
        flags.append(f"dropped {int((~ok).sum())} rows without a prediction")
        p, y = p[ok], y[ok]
    if len(p) == 0:
        raise StatsError("nothing to evaluate")
    y = y.astype(int)
    pred = (p >= threshold).astype(int)
    tp = int(np.sum((pred == 1) & (y == 1)))
    tn = int(np.sum((pred == 0) & (y == 0)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    n = len(y)

    def ratio(num, den, name):
        if den == 0:
            flags.append(f"{name} undefined (zero denominator), reported as 0")
            return 0.0
        return num / den

    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    f1 = ratio(2 * precision * recall, precision + recall, "f1")
    auc = roc_auc(p, y)
    if math.isnan(auc):
        flags.append("roc_auc undefined (single class)")
    return EvalReport((tp + tn) / n, precision, recall, f1, auc, tn, fp, fn, tp, n, tuple(flags))


@dataclass(frozen=True)
class GlmConfig:
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    coef_cap: float = DEFAULT_COEF_CAP
    threshold: float = 0.5
    tf_raw: bool = False
    predictors: str = "snd_tf"
    split_on: str = "metric"

    def fit_kwargs(self) -> dict:
        return {"max_iter": self.max_iter, "tol": self.tol, "coef_cap": self.coef_cap}


@dataclass(frozen=True)
class ModelBasedResult:
    category: str
    model: str
    split: str
    report: EvalReport
    n_words: int
    skipped_folds: int = 0
    separated_folds: int = 0


def task_features(
    words: Iterable[Word],
    snd: Mapping[Word, float],
    tf: Mapping[Word, float],
    gaze: Mapping[Word, WordGazeRecord] | None = None,
    metric: str | None = None,
    config: GlmConfig | None = None,
) -> np.ndarray:
    cfg = config or GlmConfig()
    rows = []
    for w in words:
        if cfg.predictors == "metric":
            rows.append([gaze[w].value(metric)])
        else:
            t = tf[w] if cfg.tf_raw else math.log10(tf[w])
            rows.append([snd[w], t])
    return np.asarray(rows, dtype=np.float64)


def run_model_based(
    snd: Mapping[Word, float],
    tf: Mapping[Word, float],
    gaze: Mapping[Word, WordGazeRecord],
    metric: str,
    split: str = "median",
    config: GlmConfig | None = None,
) -> ModelBasedResult:
    """LOO-evaluated GLM predicting a word's high/low group for one metric."""
    cfg = config or GlmConfig()
    if cfg.predictors not in ("snd_tf", "metric"):
        raise ValueError("predictors must be 'snd_tf' or 'metric'")
    usable = {w: r for w, r in gaze.items() if w in snd and w in tf}
    labels = label_words_by_metric(usable, metric, split, split_on=cfg.split_on, snd=snd)
    words = list(labels)
    x = task_features(words, snd, tf, usable, metric, cfg)
    y = np.array([labels[w] for w in words])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        loo = loo_cv(x, y, words, **cfg.fit_kwargs())
    report = evaluate(loo.probabilities, y, cfg.threshold)
    return ModelBasedResult(metric, "GLM", split, report, len(words), len(loo.skipped), loo.separated_folds)


MODEL_BASED_HEADER = ("category", "model", "split", "accuracy", "precision", "recall",
                      "f1", "roc_auc", "tn", "fp", "fn", "tp")


def model_based_row(r: ModelBasedResult) -> dict:
    rep = asdict(r.report)
    row = {"category": r.category, "model": r.model, "split": r.split}
    row.update({k: rep[k] for k in MODEL_BASED_HEADER[3:]})
    return row


def write_model_based_csv(results: Iterable[ModelBasedResult], path: "str | Path") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MODEL_BASED_HEADER)
        for r in results:
            row = model_based_row(r)
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row.values()])
