"""Acceptance suite: one test per criterion, each summarized as a PASS/FAIL line.

The summary is printed in the "acceptance criteria" section at the end of
the pytest run. Tolerances are the stated ones; nothing here is loosened.
"""

from __future__ import annotations

import random
import time

import numpy as np
import pytest

from oracles import brute_force_snd, walk_trial
from sndgaze.embeddings import EmbeddingTable
from sndgaze.gaze import FixationEvent, trial_metrics
from sndgaze.glm import evaluate, fit_logistic, loo_cv, predict_proba
from sndgaze.report import RunConfig, run_pipeline
from sndgaze.snd import compute_all_snd
from sndgaze.stats import COMPARISONS, bh_fdr, hedges_g, permutation_test_means
from sndgaze.synth import SynthSpec, generate
from scipy.special import expit


@pytest.fixture
def detail(record_property):
    def note(text: str) -> None:
        record_property("detail", text)
        print(text)
    return note


@pytest.mark.criterion("C1 BH-FDR reproduces the published adjusted p-values")
def test_c1_bh_fdr(detail):
    cases = [([0.015, 0.017, 0.021, 0.092], [0.028, 0.028, 0.028, 0.092]),
             ([0.005, 0.007, 0.006, 0.972], [0.009, 0.009, 0.009, 0.972])]
    got = [[round(x, 3) for x in bh_fdr(ps)] for ps, _ in cases]
    detail(f"adjusted={got}")
    assert got == [want for _, want in cases]


@pytest.mark.criterion("C2 gaze metrics equal a step-through simulator on 10,000 trials")
def test_c2_gaze_oracle(detail):
    rnd = random.Random(20240601)
    start = time.perf_counter()
    mismatches = 0
    for t in range(10_000):
        n_aoi = rnd.randint(1, 5)
        words = [rnd.choice("abcd") for _ in range(n_aoi)]
        seq = []
        for _ in range(rnd.randint(1, 10)):
            o = rnd.randrange(n_aoi)
            seq.append((words[o], o, float(rnd.randint(20, 800))))
        events = [FixationEvent("p", f"t{t}", i, w, o, d) for i, (w, o, d) in enumerate(seq)]
        got = {k: (m.sfd, m.ffd, m.gd, m.rpd) for k, m in trial_metrics(events).items()}
        mismatches += got != walk_trial(seq)
    elapsed = time.perf_counter() - start
    detail(f"mismatches={mismatches} runtime={elapsed:.2f}s")
    assert mismatches == 0 and elapsed < 10


@pytest.mark.criterion("C3 SND equals a brute-force oracle on 25 random tables")
def test_c3_snd_brute_force(detail):
    start = time.perf_counter()
    worst_arc = worst_tau = 0.0
    set_mismatch = 0
    for seed in range(25):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(2, 51)), int(rng.integers(1, 9))
        words = tuple(f"w{i}" for i in range(n))
        table = EmbeddingTable(words, rng.normal(size=(n, d)))
        tau, hoods, arc = brute_force_snd({w: table.vector(w).tolist() for w in words})
        res = compute_all_snd(words, table, exhaustive=True, keep_neighborhoods=True)
        worst_tau = max(worst_tau, abs(res.threshold.tau - tau))
        set_mismatch += {w: set(h) for w, h in res.neighborhoods.items()} != hoods
        for w, s in res.scores.items():
            if (s.arc is None) != (w not in arc):
                set_mismatch += 1
            elif s.arc is not None:
                worst_arc = max(worst_arc, abs(s.arc - arc[w]))
    elapsed = time.perf_counter() - start
    detail(f"set_mismatches={set_mismatch} max_arc_err={worst_arc:.1e} max_tau_err={worst_tau:.1e} "
           f"runtime={elapsed:.2f}s")
    assert set_mismatch == 0 and worst_arc <= 1e-12 and worst_tau <= 1e-12 and elapsed < 5


@pytest.mark.criterion("C4 SND is invariant to scaling every vector by c in {0.1, 7.3}")
def test_c4_scale_invariance(detail):
    worst = 0.0
    hood_mismatch = 0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        n, d = int(rng.integers(3, 80)), int(rng.integers(1, 16))
        table = EmbeddingTable(tuple(f"w{i}" for i in range(n)), rng.normal(size=(n, d)))
        exhaustive = seed % 2 == 0
        base = compute_all_snd(table.words, table, 2000, seed, exhaustive=exhaustive, keep_neighborhoods=True)
        for c in (0.1, 7.3):
            scaled = compute_all_snd(table.words, table.scaled(c), 2000, seed, exhaustive=exhaustive,
                                     keep_neighborhoods=True)
            hood_mismatch += scaled.neighborhoods != base.neighborhoods
            for w, s in base.scores.items():
                t = scaled.scores[w]
                if (s.arc is None) != (t.arc is None):
                    hood_mismatch += 1
                elif s.arc is not None:
                    worst = max(worst, abs(s.arc - t.arc))
    detail(f"neighborhood_mismatches={hood_mismatch} max_arc_diff={worst:.1e}")
    assert hood_mismatch == 0 and worst <= 1e-9


@pytest.mark.criterion("C5 permutation test is calibrated under the null; exhaustive {10,10,10} vs {0,0,0} = 1/20")
def test_c5_permutation_calibration(detail):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    ps = []
    for rep in range(200):
        s1 = rng.lognormal(5.5, 0.4, size=25)
        s2 = rng.lognormal(5.5, 0.4, size=25)
        ps.append(permutation_test_means(s1, s2, n_perm=2000, seed=rep))
    frac = float(np.mean(np.array(ps) < 0.05))
    exact = permutation_test_means([10, 10, 10], [0, 0, 0], exhaustive=True)
    elapsed = time.perf_counter() - start
    detail(f"fraction_p<0.05={frac:.3f} exhaustive_p={exact!r} runtime={elapsed:.1f}s")
    assert 0.01 <= frac <= 0.10 and exact == 0.05 and elapsed < 60


@pytest.mark.criterion("C6 Hedges' g: 0.8 exactly, 0 for identical samples, shift/scale invariant")
def test_c6_hedges_g(detail):
    g = hedges_g([1, 2, 3], [2, 3, 4])
    same = hedges_g([4.0, 7.0, 1.5], [4.0, 7.0, 1.5])
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(200):
        a, b = rng.normal(size=int(rng.integers(2, 20))), rng.normal(1, 2, size=int(rng.integers(2, 20)))
        ref = hedges_g(a, b)
        shift, scale = float(rng.uniform(-100, 100)), float(rng.uniform(0.1, 10))
        worst = max(worst, abs(hedges_g(a + shift, b + shift) - ref), abs(hedges_g(a * scale, b * scale) - ref))
    detail(f"g={g!r} identical={same!r} max_invariance_err={worst:.1e}")
    assert g == 0.8 and same == 0.0 and worst <= 1e-12


@pytest.mark.criterion("C7 GLM recovers (0.5, -1, 2); flags separation; shuffled LOO AUC near 0.5")
def test_c7_glm(detail):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    x = rng.normal(size=(2000, 2))
    y = (rng.random(2000) < expit(0.5 - 1.0 * x[:, 0] + 2.0 * x[:, 1])).astype(int)
    coef = fit_logistic(x, y).raw_coefficients
    err = float(np.max(np.abs(coef - [0.5, -1.0, 2.0])))

    xs = np.arange(40, dtype=float)
    ys = (xs >= 20).astype(int)
    sep_fit = fit_logistic(xs, ys)
    sep_auc = evaluate(predict_proba(sep_fit, xs), ys).roc_auc

    y_shuffled = rng.permutation(y)
    loo_auc = evaluate(loo_cv(x, y_shuffled).probabilities, y_shuffled).roc_auc
    elapsed = time.perf_counter() - start
    detail(f"coefficients={np.round(coef, 3).tolist()} max_err={err:.3f} separable_auc={sep_auc} "
           f"separated={sep_fit.separated} shuffled_loo_auc={loo_auc:.3f} runtime={elapsed:.1f}s")
    assert err <= 0.15 and sep_auc == 1.0 and sep_fit.separated
    assert 0.45 <= loo_auc <= 0.55 and elapsed < 30


@pytest.fixture(scope="module")
def synth_inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    spec = SynthSpec()
    generate(spec).write(root / "data")
    return root, spec


def pipeline_config(root, out):
    return RunConfig.from_dict({"embeddings": "data/embeddings.jsonl", "fixations": "data/fixations.csv",
                                "corpus_dir": "data/corpus", "output_dir": out}, root)


@pytest.mark.criterion("C8 planted +30 ms on HSND∩LF: joint g > 0.1, FDR p < 0.05 (SFD/FFD/GD); RPD/FFD AUC > 0.7")
def test_c8_planted_effect(synth_inputs, detail):
    root, spec = synth_inputs
    start = time.perf_counter()
    bundle = run_pipeline(pipeline_config(root, "bundle"))
    elapsed = time.perf_counter() - start
    joint = {r.metric: r for r in bundle.model_free if r.comparison == COMPARISONS[2][0]}
    auc = {(r.category, r.split): r.report.roc_auc for r in bundle.model_based}
    parts = [f"{m}:g={joint[m].hedges_g:.2f},p_fdr={joint[m].p_fdr:.4f}" for m in ("sfd", "ffd", "gd")]
    parts += [f"{m}/{s}_auc={auc[(m, s)]:.3f}" for m in ("rpd", "ffd") for s in ("quartile", "median")]
    detail(f"participants={spec.n_participants} effect={spec.gaze_effect_ms}ms " + " ".join(parts)
           + f" runtime={elapsed:.1f}s")
    assert all(joint[m].hedges_g > 0.1 and joint[m].p_fdr < 0.05 for m in ("sfd", "ffd", "gd"))
    # the planted set is about a fifth of the words, so the quartile split is the task it can separate
    assert auc[("rpd", "quartile")] > 0.7 and auc[("ffd", "quartile")] > 0.7
    assert elapsed < 120


@pytest.mark.criterion("C9 two full pipeline runs with the same config and seed are byte-identical")
def test_c9_determinism(synth_inputs, detail):
    root, _ = synth_inputs
    snaps = []
    for out in ("run_a", "run_b"):
        bundle = run_pipeline(pipeline_config(root, out))
        snaps.append({p.relative_to(bundle.output_dir).as_posix(): p.read_bytes()
                      for p in sorted(bundle.output_dir.rglob("*")) if p.is_file()})
    differing = sorted(k for k in snaps[0].keys() | snaps[1].keys() if snaps[0].get(k) != snaps[1].get(k))
    detail(f"files={len(snaps[0])} differing={differing}")
    assert not differing and len(snaps[0]) >= 10


@pytest.mark.criterion("C10 model-free tables from the released eye-tracking dataset")
@pytest.mark.skip(reason="optional: the released eye-tracking dataset is not vendored")
def test_c10_released_dataset():
    pass
