"""Command-line entry point ``snd-gaze``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .corpus import FilterConfig, read_tf_csv, read_vocabulary_csv, vocabulary_from_sources, write_vocabulary_csv
from .embeddings import coverage, load_embedding_table
from .errors import PipelineError, SndGazeError
from .gaze import compute_word_gaze, ingest_fixations, read_gaze_csv, write_gaze_csv
from .glm import GlmConfig, run_model_based, write_model_based_csv
from .report import RunConfig, run_pipeline, with_seed
from .snd import DEFAULT_N_PAIRS, compute_all_snd, read_snd_csv, write_snd_csv
from .stats import DEFAULT_N_PERM, DEFAULT_SEED, StatsConfig, run_model_free, write_model_free_csv
from .synth import SynthSpec, generate


def _tokenize(args) -> None:
    filt = FilterConfig(operators=args.include_operators, punctuation=args.include_punctuation)
    vocab = vocabulary_from_sources(args.src, args.lang, filt)
    write_vocabulary_csv(vocab, args.out)
    print(f"{len(vocab)} words, {vocab.total_tokens} tokens -> {args.out}")


def _embed_check(args) -> None:
    table = load_embedding_table(args.table, args.dim)
    info = {"words": len(table), "dimension": table.dimension, "source": table.source_label}
    if args.vocab:
        info["coverage"] = coverage(read_vocabulary_csv(args.vocab, "C").words, table).as_dict()
    print(json.dumps(info, indent=2, sort_keys=True))


def _snd(args) -> None:
    vocab = read_vocabulary_csv(args.vocab, args.lang)
    table = load_embedding_table(args.table)
    result = compute_all_snd(vocab, table, args.pairs, args.seed, exhaustive=args.exhaustive)
    meta = write_snd_csv(result, args.out)
    print(f"tau={result.threshold.tau!r}; {len(result.scores)} words -> {args.out} (+ {meta.name})")


def _gaze(args) -> None:
    records = compute_word_gaze(ingest_fixations(args.fixations), args.rpd_aggregate)
    write_gaze_csv(records, args.out)
    print(f"{len(records)} words -> {args.out}")


def _load_analysis_inputs(args):
    gaze = read_gaze_csv(args.gaze)
    snd = {w: s.effective_value for w, s in read_snd_csv(args.snd).items()}
    tf = read_tf_csv(args.tf)
    return gaze, snd, tf


def _model_free(args) -> None:
    gaze, snd, tf = _load_analysis_inputs(args)
    cfg = StatsConfig(n_perm=args.perms, seed=args.seed, two_sided=args.two_sided)
    rows, _, notes = run_model_free(gaze, snd, tf, cfg)
    write_model_free_csv(rows, args.out)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    print(f"{len(rows)} rows -> {args.out}")


def _model_based(args) -> None:
    gaze, snd, tf = _load_analysis_inputs(args)
    cfg = GlmConfig(tf_raw=args.tf_raw, predictors=args.predictors)
    metrics = [args.metric] if args.metric else ["sfd", "ffd", "gd", "rpd"]
    results = [run_model_based(snd, tf, gaze, m, args.split, cfg) for m in metrics]
    write_model_based_csv(results, args.out)
    print(f"{len(results)} rows -> {args.out}")


def _simulate(args) -> None:
    data = generate(SynthSpec.from_json(args.spec))
    paths = data.write(args.out_dir)
    print(f"{len(data.planted)} planted words; wrote {', '.join(sorted(p.name for p in paths.values()))}")


def _run(args) -> None:
    cfg = RunConfig.from_json(args.config)
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    bundle = run_pipeline(cfg)
    print(f"{len(bundle.model_free)} model-free rows, {len(bundle.model_based)} model-based rows -> {bundle.output_dir}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snd-gaze", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="build a vocabulary CSV from a source tree")
    p.add_argument("--lang", required=True, type=str.lower, choices=["c", "java"])
    p.add_argument("--src", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--include-operators", action="store_true")
    p.add_argument("--include-punctuation", action="store_true")
    p.set_defaults(func=_tokenize, stage="corpus")

    p = sub.add_parser("embed-check", help="validate an embedding table")
    p.add_argument("--table", required=True, type=Path)
    p.add_argument("--dim", type=int)
    p.add_argument("--vocab", type=Path, help="vocabulary CSV to report coverage against")
    p.set_defaults(func=_embed_check, stage="embeddings")

    p = sub.add_parser("snd", help="compute per-word SND")
    p.add_argument("--vocab", required=True, type=Path)
    p.add_argument("--table", required=True, type=Path)
    p.add_argument("--lang", default="c", type=str.lower, choices=["c", "java"])
    p.add_argument("--pairs", type=int, default=DEFAULT_N_PAIRS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_snd, stage="snd")

    p = sub.add_parser("gaze", help="word-level gaze metrics from a fixation log")
    p.add_argument("--fixations", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--rpd-aggregate", choices=["mean", "sum"], default="mean")
    p.set_defaults(func=_gaze, stage="gaze")

    p = sub.add_parser("analyze", help="model-free or model-based analysis")
    asub = p.add_subparsers(dest="analysis", required=True)
    for name in ("model-free", "model-based"):
        a = asub.add_parser(name)
        a.add_argument("--gaze", required=True, type=Path)
        a.add_argument("--snd", required=True, type=Path)
        a.add_argument("--tf", required=True, type=Path)
        a.add_argument("--out", required=True, type=Path)
        if name == "model-free":
            a.add_argument("--perms", type=int, default=DEFAULT_N_PERM)
            a.add_argument("--seed", type=int, default=DEFAULT_SEED)
            a.add_argument("--two-sided", action="store_true")
            a.set_defaults(func=_model_free, stage="model-free")
        else:
            a.add_argument("--split", choices=["median", "quartile"], default="median")
            a.add_argument("--metric", choices=["sfd", "ffd", "gd", "rpd"])
            a.add_argument("--tf-raw", action="store_true")
            a.add_argument("--predictors", choices=["snd_tf", "metric"], default="snd_tf")
            a.set_defaults(func=_model_based, stage="model-based")

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--spec", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.set_defaults(func=_simulate, stage="simulate")

    p = sub.add_parser("run", help="run the full pipeline from a JSON config")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_run, stage="config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SndGazeError, OSError, ValueError, KeyError) as exc:
        print(f"error: [{args.stage}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
