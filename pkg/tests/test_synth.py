from __future__ import annotations

import json

import numpy as np
import pytest

from sndgaze.corpus import term_frequency, vocabulary_from_sources
from sndgaze.gaze import compute_word_gaze, ingest_fixations
from sndgaze.snd import compute_all_snd
from sndgaze.stats import COMPARISONS, StatsConfig, run_model_free
from sndgaze.synth import MIN_DURATION_MS, SynthSpec, SynthSpecError, generate, zipf_counts

SMALL = dict(n_words=80, dimension=16, cluster_plan=((10, 1.0, 0.02),) * 2,
             n_tokens=3000, n_participants=3, occurrences_per_word=2)


def read_all(paths):
    return {k: p.read_bytes() for k, p in paths.items() if p.is_file()}


class TestSpec:
    @pytest.mark.parametrize("overrides", [
        dict(cluster_plan=((50, 1.0, 0.1), (40, 1.0, 0.1))),
        dict(n_words=2),
        dict(noise_sd_ms=-1.0),
        dict(cluster_plan=((5, 1.0, -0.1),)),
        dict(skip_prob=1.0),
        dict(n_tokens=10),
        dict(language="cobol"),
    ])
    def test_infeasible_specs_rejected(self, overrides):
        with pytest.raises(SynthSpecError if "language" not in overrides else ValueError):
            SynthSpec(**{**SMALL, **overrides})

    def test_json_round_trip(self, tmp_path):
        spec = SynthSpec(**SMALL)
        (tmp_path / "s.json").write_text(json.dumps(spec.to_dict()), encoding="utf-8")
        assert SynthSpec.from_json(tmp_path / "s.json") == spec


def test_zipf_counts():
    c = zipf_counts(100, 10_000, 1.1)
    assert c.min() >= 1 and np.all(np.diff(c) <= 0)
    assert c[0] / c[9] == pytest.approx(10 ** 1.1, rel=0.01)


class TestGenerate:
    def test_same_seed_byte_identical(self, tmp_path):
        spec = SynthSpec(**SMALL)
        a = read_all(generate(spec).write(tmp_path / "a"))
        b = read_all(generate(spec).write(tmp_path / "b"))
        assert a == b and set(a) == {"embeddings", "vocabulary", "fixations", "truth"}
        c = read_all(generate(SynthSpec(**{**SMALL, "seed": 1})).write(tmp_path / "c"))
        assert c["fixations"] != a["fixations"]

    def test_outputs_pass_ingestion(self, tmp_path):
        data = generate(SynthSpec(**SMALL))
        paths = data.write(tmp_path)
        events = ingest_fixations(paths["fixations"])
        assert events == sorted(data.events, key=lambda e: (e.participant, e.trial, e.index))
        assert min(e.duration_ms for e in events) >= MIN_DURATION_MS

    def test_corpus_reproduces_vocabulary(self, tmp_path):
        data = generate(SynthSpec(**SMALL))
        paths = data.write(tmp_path)
        assert vocabulary_from_sources(paths["corpus"], "C") == data.vocabulary

    def test_java_corpus(self, tmp_path):
        data = generate(SynthSpec(**{**SMALL, "language": "Java"}))
        paths = data.write(tmp_path)
        assert (paths["corpus"] / "synth.java").is_file()
        assert vocabulary_from_sources(paths["corpus"], "Java").counts == data.vocabulary.counts

    def test_planted_set_definition(self):
        data = generate(SynthSpec(**SMALL))
        counts = np.array(list(data.vocabulary.counts.values()))
        med = np.median(counts)
        expected = {w for w in data.tight if data.vocabulary.counts[w] < med}
        assert data.planted == expected and data.planted

    def test_noise_free_effect_is_exact(self):
        spec = SynthSpec(**{**SMALL, "noise_sd_ms": 0.0})
        data = generate(spec)
        for e in data.events:
            assert e.duration_ms == spec.gaze_base_ms + spec.gaze_effect_ms * (e.word in data.planted)

    def test_planted_mean_shift(self):
        data = generate(SynthSpec(**{**SMALL, "n_participants": 10}))
        planted = [e.duration_ms for e in data.events if e.word in data.planted]
        other = [e.duration_ms for e in data.events if e.word not in data.planted]
        se = np.sqrt(np.var(planted) / len(planted) + np.var(other) / len(other))
        assert abs(np.mean(planted) - np.mean(other) - 30.0) < 4 * se

    def test_every_word_is_read(self):
        data = generate(SynthSpec(**SMALL))
        assert {e.word for e in data.events} == set(data.table.words)

    @pytest.mark.parametrize("seed", range(5))
    def test_tight_words_outrank_scattered(self, seed):
        data = generate(SynthSpec(**{**SMALL, "seed": seed}))
        eff = compute_all_snd(data.vocabulary, data.table, exhaustive=True).effective()
        tight = [eff[w] for w in data.tight]
        scattered = [eff[w] for w in data.table.words if w not in data.tight]
        assert min(tight) > max(scattered)


def test_zero_effect_null_calibration():
    # joint-comparison p-values under no effect should not pile up near zero
    ps = []
    for seed in range(12):
        data = generate(SynthSpec(gaze_effect_ms=0.0, n_participants=3, occurrences_per_word=2, seed=seed))
        snd = compute_all_snd(data.vocabulary, data.table, exhaustive=True).effective()
        rows, _, _ = run_model_free(compute_word_gaze(data.events), snd, term_frequency(data.vocabulary),
                                    StatsConfig(n_perm=199, seed=seed))
        ps += [r.p for r in rows if r.comparison == COMPARISONS[2][0]]
    ps = np.array(ps)
    assert np.mean(ps < 0.05) <= 0.15
    assert 0.3 <= ps.mean() <= 0.7
