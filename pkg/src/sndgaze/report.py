"""Pipeline orchestration and result-table emission.

`run_pipeline` goes corpus -> SND -> gaze -> model-free -> model-based and
writes one output bundle. Outputs are staged in a temporary directory and
moved into place only after every stage succeeded, so a failed run leaves
nothing behind. The manifest carries no timestamps, so identical configs
give byte-identical bundles.
"""

from __future__ import annotations

import csv
import json
import platform
import shutil
import tempfile
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy

from . import __version__
from .corpus import FilterConfig, Language, Vocabulary, read_vocabulary_csv, term_frequency, vocabulary_from_sources, write_vocabulary_csv
from .embeddings import load_embedding_table
from .errors import PipelineError, SndGazeError
from .gaze import METRICS, WordGazeRecord, compute_word_gaze, ingest_fixations, write_gaze_csv
from .glm import MODEL_BASED_HEADER, GlmConfig, ModelBasedResult, model_based_row, run_model_based
from .partition import GroupAssignment, write_assignments_json
from .snd import DEFAULT_N_PAIRS, SndResult, compute_all_snd, write_snd_csv
from .stats import COMPARISONS, MODEL_FREE_HEADER, ComparisonResult, StatsConfig, run_model_free

SPLITS = ("median", "quartile")
FORMATS = ("csv", "json", "markdown")
ANNOTATION_HEADER = ("word", "arc", "tf", "group_flags", "mean_ffd")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs. Relative paths resolve against `base_dir`."""

    embeddings: Path
    fixations: Path
    output_dir: Path
    corpus_dir: Path | None = None
    vocab_csv: Path | None = None
    language: str = "C"
    n_pairs: int = DEFAULT_N_PAIRS
    exhaustive_pairs: bool = False
    n_perm: int = 10_000
    seed: int = 1234
    include_keywords: bool = True
    include_literals: bool = True
    include_operators: bool = False
    include_punctuation: bool = False
    splits: tuple[str, ...] = SPLITS
    rpd_aggregate: str = "mean"
    tf_raw: bool = False
    formats: tuple[str, ...] = FORMATS

    def __post_init__(self):
        if (self.corpus_dir is None) == (self.vocab_csv is None):
            raise ValueError("give exactly one of corpus_dir or vocab_csv")
        Language.parse(self.language)
        if not set(self.splits) <= set(SPLITS):
            raise ValueError(f"splits must be drawn from {SPLITS}")
        if not set(self.formats) <= set(FORMATS):
            raise ValueError(f"formats must be drawn from {FORMATS}")

    @classmethod
    def from_dict(cls, d: Mapping, base_dir: "str | Path" = ".") -> "RunConfig":
        base = Path(base_dir)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        kw = dict(d)
        for key in ("embeddings", "fixations", "output_dir", "corpus_dir", "vocab_csv"):
            if kw.get(key) is not None:
                kw[key] = (base / kw[key]).resolve()
        for key in ("splits", "formats"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(**kw)

    @classmethod
    def from_json(cls, path: "str | Path") -> "RunConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")), path.parent)

    def filter(self) -> FilterConfig:
        return FilterConfig(True, self.include_keywords, self.include_literals,
                            self.include_operators, self.include_punctuation)

    def as_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Path):
                d[k] = str(v)
            elif isinstance(v, tuple):
                d[k] = list(v)
        return d


@dataclass
class ReportBundle:
    model_free: list[ComparisonResult] = field(default_factory=list)
    model_based: list[ModelBasedResult] = field(default_factory=list)
    assignments: dict[str, GroupAssignment] = field(default_factory=dict)
    annotations: list[dict] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)
    output_dir: Path | None = None


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except (SndGazeError, OSError, ValueError, KeyError) as exc:
        raise PipelineError(name, exc) from exc


def _check_inputs(cfg: RunConfig) -> None:
    # every input must exist before any computation starts
    checks = [("corpus", cfg.corpus_dir or cfg.vocab_csv), ("snd", cfg.embeddings), ("gaze", cfg.fixations)]
    for stage, path in checks:
        if not Path(path).exists():
            raise PipelineError(stage, FileNotFoundError(f"no such file or directory: {path}"))


def _annotations(snd: SndResult, tf: Mapping[str, float], gaze: Mapping[str, WordGazeRecord],
                 assignments: Mapping[str, GroupAssignment]) -> list[dict]:
    flag_names = {COMPARISONS[0][0]: ("HSND", "LSND"), COMPARISONS[1][0]: ("HF", "LF"),
                  COMPARISONS[2][0]: ("HSND_LF", None)}
    rows = []
    for w in sorted(set(snd.scores) | set(tf)):
        flags = []
        for label, (hi, lo) in flag_names.items():
            a = assignments.get(label)
            if a is None:
                continue
            if w in a.group1:
                flags.append(hi)
            elif lo and w in a.group2:
                flags.append(lo)
        sc = snd.scores.get(w)
        rec = gaze.get(w)
        rows.append({
            "word": w,
            "arc": sc.arc if sc else None,
            "tf": tf.get(w),
            "group_flags": "|".join(flags),
            "mean_ffd": rec.ffd_ms if rec else None,
        })
    return rows


def run_pipeline(config: RunConfig) -> ReportBundle:
    """Run every stage and write the bundle to ``config.output_dir``.

    Raises
    ------
    PipelineError
        Tagged with the failing stage; no partial output is left behind.
    """
    _check_inputs(config)
    out = Path(config.output_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".snd-gaze-", dir=out.parent))
    try:
        bundle = _run_stages(config, staging)
        emit_tables(bundle, staging, config.formats)
        (staging / "manifest.json").write_text(
            json.dumps(bundle.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if out.exists():
            shutil.rmtree(out)
        staging.rename(out)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    bundle.output_dir = out
    return bundle


def _run_stages(cfg: RunConfig, staging: Path) -> ReportBundle:
    lang = Language.parse(cfg.language)
    skipped: list[str] = []

    if cfg.corpus_dir is not None:
        vocab: Vocabulary = _stage("corpus", vocabulary_from_sources, cfg.corpus_dir, lang, cfg.filter())
    else:
        vocab = _stage("corpus", read_vocabulary_csv, cfg.vocab_csv, lang)
    tf = term_frequency(vocab)
    _stage("corpus", write_vocabulary_csv, vocab, staging / "vocabulary.csv")

    def snd_stage():
        table = load_embedding_table(cfg.embeddings)
        result = compute_all_snd(vocab, table, cfg.n_pairs, cfg.seed, exhaustive=cfg.exhaustive_pairs)
        write_snd_csv(result, staging / "snd.csv")
        return table, result

    table, snd = _stage("snd", snd_stage)
    snd_values = snd.effective()

    def gaze_stage():
        records = compute_word_gaze(ingest_fixations(cfg.fixations), cfg.rpd_aggregate)
        write_gaze_csv(records, staging / "gaze.csv")
        return records

    gaze = _stage("gaze", gaze_stage)

    stats_cfg = StatsConfig(n_perm=cfg.n_perm, seed=cfg.seed)
    model_free, assignments, notes = _stage("model-free", run_model_free, gaze, snd_values, tf, stats_cfg)
    skipped.extend(notes)
    _stage("model-free", write_assignments_json, assignments, staging / "assignments.json")

    glm_cfg = GlmConfig(tf_raw=cfg.tf_raw)
    model_based: list[ModelBasedResult] = []
    for metric in METRICS:
        for split in cfg.splits:
            try:
                model_based.append(run_model_based(snd_values, tf, gaze, metric, split, glm_cfg))
            except SndGazeError as exc:
                skipped.append(f"model-based {metric}/{split}: {type(exc).__name__}: {exc}")
            except ValueError as exc:
                raise PipelineError("model-based", exc) from exc

    manifest = {
        "config": {k: v for k, v in cfg.as_dict().items() if k != "output_dir"},
        "seed": cfg.seed,
        "versions": {
            "sndgaze": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "embedding_source": table.source_label,
        "embedding_dimension": table.dimension,
        "vocabulary": {"n_words": len(vocab), "total_tokens": vocab.total_tokens},
        "snd": snd.metadata(),
        "gaze": {"n_words": len(gaze)},
        "model_free": {"n_rows": len(model_free), "n_perm": cfg.n_perm,
                       "family": "4 metrics per comparison", "outputs": "model_free.*"},
        "model_based": {
            "n_rows": len(model_based),
            "outputs": "model_based.*",
            "tasks": [{"metric": r.category, "split": r.split, "n_words": r.n_words,
                       "skipped_folds": r.skipped_folds, "separated_folds": r.separated_folds,
                       "flags": list(r.report.flags)} for r in model_based],
        },
        "skipped_analyses": skipped,
    }
    return ReportBundle(model_free, model_based, assignments,
                        _annotations(snd, tf, gaze, assignments), manifest)


def _csv_value(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_value(row[k]) for k in header])


def _markdown(header, rows, bold_when=None) -> str:
    def cell(v):
        if isinstance(v, float):
            return f"{v:.3f}"
        return "" if v is None else str(v)

    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        cells = [cell(row[k]) for k in header]
        if bold_when is not None:
            for k in bold_when(row):
                i = header.index(k)
                cells[i] = f"**{cells[i]}**"
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _significant(row) -> tuple[str, ...]:
    return ("p", "p_fdr") if row["p_fdr"] < 0.05 else ()


def emit_tables(bundle: ReportBundle, out_dir: "str | Path", formats=FORMATS) -> dict[str, Path]:
    """Write the model-free, model-based and annotation tables.

    CSV and JSON keep full precision; markdown rounds to three decimals
    and bolds p and p_fdr of rows with p_fdr < 0.05.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mf = [asdict(r) for r in bundle.model_free]
    mb = [model_based_row(r) for r in bundle.model_based]
    written: dict[str, Path] = {}
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValueError(f"unknown format {fmt!r}")
        if fmt == "csv":
            _write_csv(out / "model_free.csv", MODEL_FREE_HEADER, mf)
            _write_csv(out / "model_based.csv", MODEL_BASED_HEADER, mb)
            _write_csv(out / "annotations.csv", ANNOTATION_HEADER, bundle.annotations)
            written.update({"model_free.csv": out / "model_free.csv", "model_based.csv": out / "model_based.csv",
                            "annotations.csv": out / "annotations.csv"})
        elif fmt == "json":
            for name, rows in (("model_free", mf), ("model_based", mb)):
                p = out / f"{name}.json"
                p.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
                written[p.name] = p
        else:
            p = out / "tables.md"
            p.write_text(
                "## Model-free comparisons\n\n" + _markdown(MODEL_FREE_HEADER, mf, _significant)
                + "\n## Model-based tasks\n\n" + _markdown(MODEL_BASED_HEADER, mb),
                encoding="utf-8",
            )
            written[p.name] = p
    return written


def read_bundle_tables(out_dir: "str | Path") -> tuple[list[dict], list[dict]]:
    """Model-free and model-based rows from the JSON tables of a bundle."""
    out = Path(out_dir)
    mf = json.loads((out / "model_free.json").read_text(encoding="utf-8"))
    mb = json.loads((out / "model_based.json").read_text(encoding="utf-8"))
    return mf, mb


def with_seed(config: RunConfig, seed: int) -> RunConfig:
    return replace(config, seed=seed)
