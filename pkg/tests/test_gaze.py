from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import walk_trial
from sndgaze.errors import GazeIngestError
from sndgaze.gaze import (
    FixationEvent,
    Observation,
    TrialMetrics,
    aggregate_word_level,
    compute_word_gaze,
    ingest_fixations,
    read_gaze_csv,
    trial_metrics,
    write_fixations_csv,
    write_gaze_csv,
)


def trial(*fixations, participant="p", name="t"):
    """Events from ``(word, aoi_order, duration)`` triples."""
    return [FixationEvent(participant, name, i, w, o, float(d)) for i, (w, o, d) in enumerate(fixations)]


def as_tuples(metrics):
    return {k: (m.sfd, m.ffd, m.gd, m.rpd) for k, m in metrics.items()}


class TestTrialMetrics:
    def test_single_forward_exit(self):
        m = trial_metrics(trial(("w", 0, 200), ("v", 1, 100)))
        assert as_tuples(m)[("w", 0)] == (200, 200, 200, 200)

    def test_refixation(self):
        m = trial_metrics(trial(("w", 0, 150), ("w", 0, 100), ("v", 1, 90)))
        assert as_tuples(m)[("w", 0)] == (None, 150, 250, 250)

    def test_regression_path(self):
        m = trial_metrics(trial(("w", 1, 100), ("u", 0, 80), ("w", 1, 120), ("v", 2, 90)))
        assert as_tuples(m)[("w", 1)] == (None, 100, 100, 300)

    def test_rpd_truncates_at_trial_end(self):
        m = trial_metrics(trial(("a", 0, 50), ("b", 2, 60), ("a", 0, 70)))
        assert m[("b", 2)].rpd == 130

    def test_repeated_word_occurrences_are_separate(self):
        m = trial_metrics(trial(("x", 0, 100), ("y", 1, 50), ("x", 2, 80)))
        assert set(m) == {("x", 0), ("y", 1), ("x", 2)}
        assert m[("x", 2)].sfd == 80

    def test_empty(self):
        assert trial_metrics([]) == {}

    def test_matches_step_through_oracle(self):
        rnd = random.Random(2024)
        for _ in range(2000):
            n_aoi = rnd.randint(1, 5)
            words = [rnd.choice("abc") for _ in range(n_aoi)]
            seq = []
            for _ in range(rnd.randint(1, 10)):
                o = rnd.randrange(n_aoi)
                seq.append((words[o], o, float(rnd.randint(1, 500))))
            assert as_tuples(trial_metrics(trial(*seq))) == walk_trial(seq)

    @given(st.lists(st.tuples(st.integers(0, 4), st.floats(1, 1000)), min_size=1, max_size=10))
    def test_metric_ordering(self, fixes):
        seq = [(f"w{o}", o, d) for o, d in fixes]
        for m in trial_metrics(trial(*seq)).values():
            assert m.rpd >= m.gd >= m.ffd > 0
            if m.sfd is not None:
                assert m.sfd == m.ffd == m.gd


class TestIngest:
    def write(self, path, rows, header="participant,trial,index,word,aoi_order,duration_ms"):
        path.write_text(header + "\n" + "".join(r + "\n" for r in rows), encoding="utf-8")
        return path

    def test_three_rows(self, tmp_path):
        p = self.write(tmp_path / "f.csv", ["p1,t1,0,a,0,200", "p1,t1,1,b,1,150", "p1,t1,2,a,0,90"])
        assert len(ingest_fixations(p)) == 3

    def test_shuffled_rows_reordered(self, tmp_path):
        p = self.write(tmp_path / "f.csv", ["p2,t1,1,b,1,150", "p1,t1,1,b,1,10", "p2,t1,0,a,0,200", "p1,t1,0,a,0,5"])
        evs = ingest_fixations(p)
        assert [(e.participant, e.index) for e in evs] == [("p1", 0), ("p1", 1), ("p2", 0), ("p2", 1)]

    @pytest.mark.parametrize("rows, row_no", [
        (["p,t,0,a,0,200", "p,t,1,b,1,0"], 3),
        (["p,t,0,a,0,200", "p,t,2,b,1,10"], 3),
        (["p,t,0,a,0,abc"], 2),
        (["p,t,0,a,0,10", "p,t,1,b,0,10"], 3),
        (["p,t,0,a,-1,10"], 2),
    ])
    def test_errors_carry_row_numbers(self, tmp_path, rows, row_no):
        p = self.write(tmp_path / "f.csv", rows)
        with pytest.raises(GazeIngestError) as err:
            ingest_fixations(p)
        assert err.value.row == row_no

    def test_missing_column(self, tmp_path):
        p = self.write(tmp_path / "f.csv", ["p,t,0,a,0"], header="participant,trial,index,word,aoi_order")
        with pytest.raises(GazeIngestError, match="duration_ms"):
            ingest_fixations(p)

    def test_round_trip(self, tmp_path):
        evs = trial(("a", 0, 200.5), ("b", 1, 1 / 3))
        write_fixations_csv(evs, tmp_path / "f.csv")
        assert ingest_fixations(tmp_path / "f.csv") == evs


class TestAggregate:
    def obs(self, participant, word, **metrics):
        full = {m: metrics.get(m) for m in ("sfd", "ffd", "gd", "rpd")}
        return Observation(participant, "t", word, 0, TrialMetrics(**full))

    def test_mean_of_defined_values(self):
        recs = aggregate_word_level([
            self.obs("p1", "w", ffd=200.0, sfd=200.0),
            self.obs("p2", "w", ffd=300.0),
            self.obs("p3", "w", ffd=250.0),
        ])
        w = recs["w"]
        assert w.ffd_ms == 250.0 and w.n_observations["ffd"] == 3
        assert w.sfd_ms == 200.0 and w.n_observations["sfd"] == 1
        assert w.gd_ms is None and w.n_observations["gd"] == 0

    def test_rpd_sum_mode(self):
        items = [
            self.obs("p1", "w", rpd=100.0), self.obs("p1", "w", rpd=300.0),
            self.obs("p2", "w", rpd=200.0),
        ]
        assert aggregate_word_level(items)["w"].rpd_ms == 200.0
        assert aggregate_word_level(items, rpd_aggregate="sum")["w"].rpd_ms == 300.0
        with pytest.raises(ValueError):
            aggregate_word_level(items, rpd_aggregate="median")

    @given(st.lists(st.tuples(st.sampled_from("pqr"), st.sampled_from("xy"), st.floats(1, 1000)), min_size=1),
           st.randoms())
    def test_permutation_invariant(self, items, rnd):
        obs = [self.obs(p, w, ffd=d, rpd=d) for p, w, d in items]
        shuffled = obs[:]
        rnd.shuffle(shuffled)
        for mode in ("mean", "sum"):
            assert aggregate_word_level(obs, mode) == aggregate_word_level(shuffled, mode)

    def test_gaze_csv_round_trip(self, tmp_path):
        evs = trial(("a", 0, 200), ("b", 1, 100), ("a", 0, 50), participant="p1")
        evs += trial(("a", 0, 120), ("b", 1, 80), participant="p2")
        recs = compute_word_gaze(evs)
        write_gaze_csv(recs, tmp_path / "g.csv")
        lines = (tmp_path / "g.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "word,metric,value_ms,n_observations"
        assert read_gaze_csv(tmp_path / "g.csv") == recs
