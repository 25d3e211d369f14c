import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogstate.errors import ConfigError
from cogstate.labeling import (
    STATES,
    combined_score,
    label_cohort,
    quartile_label,
    state_index,
    trials_csv,
)
from cogstate.recording import TaskRound

from conftest import make_recording


class TestCombinedScore:
    def test_best_case(self):
        assert combined_score(1.0, 0.0) == 1.0

    def test_worst_case(self):
        assert combined_score(0.0, 1.0) == 0.0

    def test_reported_level1_values(self):
        # performance 83.15%, TLX 47.70% -> (0.8315 + (1 - 0.4770)) / 2
        assert combined_score(0.8315, 0.4770) == pytest.approx(0.67725, abs=1e-12)

    def test_no_inversion_flag(self):
        assert combined_score(0.8, 0.6, invert_tlx=False) == pytest.approx(0.7)

    def test_range_validated(self):
        with pytest.raises(ConfigError):
            combined_score(1.2, 0.5)
        with pytest.raises(ConfigError):
            combined_score(0.5, -0.1)


class TestQuartileLabel:
    def test_uniform_grid_splits_quarters(self):
        scores = [(i - 1) / 7 for i in range(1, 9)]
        labels = quartile_label(scores)
        assert labels == ["low", "low"] + ["transition"] * 4 + ["high", "high"]

    def test_all_equal_all_transition(self):
        assert quartile_label([0.5] * 10) == ["transition"] * 10

    def test_boundary_equality_is_transition(self):
        # Q1 = 1.75, Q3 = 4.25 for 1..5; the ends are strict comparisons.
        scores = [1.0, 2.0, 3.0, 4.0, 5.0]
        q1, q3 = np.percentile(scores, [25, 75])
        labels = quartile_label(scores + [q1, q3])
        assert labels[-2] == "transition" and labels[-1] == "transition"

    def test_needs_four_scores(self):
        with pytest.raises(ConfigError):
            quartile_label([0.1, 0.2, 0.3])

    def test_matches_reference_recomputation(self):
        rng = np.random.default_rng(0)
        scores = rng.uniform(0, 1, size=270)
        labels = quartile_label(scores)
        # Independent sort-and-threshold reference.
        s = np.sort(scores)
        pos1, pos3 = 0.25 * 269, 0.75 * 269
        lo = s[int(pos1)] + (pos1 - int(pos1)) * (s[int(pos1) + 1] - s[int(pos1)])
        hi = s[int(pos3)] + (pos3 - int(pos3)) * (s[int(pos3) + 1] - s[int(pos3)])
        expected = [
            "low" if v < lo else "high" if v > hi else "transition" for v in scores
        ]
        assert labels == expected

    def test_class_count_bounds_under_distinct_scores(self):
        rng = np.random.default_rng(1)
        for n in (8, 41, 100):
            scores = rng.permutation(n) / n
            labels = quartile_label(scores)
            cap = int(np.ceil(n / 4))
            assert labels.count("low") <= cap
            assert labels.count("high") <= cap

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.integers(min_value=0, max_value=1000).map(lambda k: k / 1000.0),
            min_size=4,
            max_size=60,
        ),
        st.sampled_from(["exp", "affine", "cube"]),
    )
    def test_invariant_under_monotone_transform(self, scores, kind):
        transforms = {
            "exp": lambda v: np.expm1(2.0 * np.asarray(v)),
            "affine": lambda v: 3.0 * np.asarray(v) + 11.0,
            "cube": lambda v: np.asarray(v) ** 3,
        }
        base = quartile_label(scores)
        assert quartile_label(transforms[kind](scores)) == base

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(2)
        scores = rng.uniform(0, 1, size=40)
        labels = np.array(quartile_label(scores))
        perm = rng.permutation(40)
        assert quartile_label(scores[perm]) == labels[perm].tolist()


def test_state_order():
    assert STATES == ("low", "transition", "high")
    assert state_index("low") < state_index("transition") < state_index("high")
    with pytest.raises(ConfigError):
        state_index("medium")


def test_label_cohort_and_csv():
    recs = []
    rng = np.random.default_rng(3)
    for s in range(3):
        rounds = tuple(
            TaskRound(task, d, i * 2.0, i * 2.0 + 1.5,
                      float(rng.uniform(0.3, 0.9)), float(rng.uniform(0.2, 0.8)))
            for i, (task, d) in enumerate(
                (t, d) for t in ("nback", "arithmetic") for d in (1, 2)
            )
        )
        recs.append(
            make_recording(np.zeros((20, 5000)), fs=500.0, rounds=rounds,
                           subject_id=f"S{s}", gender="male")
        )
    trials = label_cohort(recs)
    assert len(trials) == 12
    assert all(t.state in STATES for t in trials)
    csv = trials_csv(trials)
    lines = csv.strip().split("\n")
    assert lines[0] == "subject_id,task,difficulty,performance,nasa_tlx,score,state"
    assert len(lines) == 13
