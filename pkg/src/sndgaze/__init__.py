"""Semantic neighborhood density, term frequency and eye-gaze analyses for source code."""

from __future__ import annotations

__version__ = "0.1.0"

from .corpus import (
    FilterConfig,
    Language,
    Token,
    TokenKind,
    Vocabulary,
    build_vocabulary,
    split_identifier,
    term_frequency,
    tokenize,
    vocabulary_from_sources,
)
from .embeddings import EmbeddingTable, coverage, cosine_similarity, euclidean_distance, load_embedding_table
from .errors import PipelineError, SndGazeError
from .gaze import FixationEvent, WordGazeRecord, compute_word_gaze, ingest_fixations, trial_metrics
from .glm import evaluate, fit_logistic, loo_cv, predict, roc_auc, run_model_based
from .partition import GroupAssignment, joint_group, label_words_by_metric, median_split, quartile_split
from .snd import SndResult, arc_snd, compute_all_snd, estimate_threshold, neighborhood
from .stats import bh_fdr, compare_groups, hedges_g, permutation_test_means, run_model_free, winsorize
from .synth import SynthSpec, generate
from .report import RunConfig, emit_tables, run_pipeline

__all__ = [
    "__version__",
    "FilterConfig", "Language", "Token", "TokenKind", "Vocabulary", "build_vocabulary",
    "split_identifier", "term_frequency", "tokenize", "vocabulary_from_sources",
    "EmbeddingTable", "coverage", "cosine_similarity", "euclidean_distance", "load_embedding_table",
    "PipelineError", "SndGazeError",
    "FixationEvent", "WordGazeRecord", "compute_word_gaze", "ingest_fixations", "trial_metrics",
    "evaluate", "fit_logistic", "loo_cv", "predict", "roc_auc", "run_model_based",
    "GroupAssignment", "joint_group", "label_words_by_metric", "median_split", "quartile_split",
    "SndResult", "arc_snd", "compute_all_snd", "estimate_threshold", "neighborhood",
    "bh_fdr", "compare_groups", "hedges_g", "permutation_test_means", "run_model_free", "winsorize",
    "SynthSpec", "generate",
    "RunConfig", "emit_tables", "run_pipeline",
]
