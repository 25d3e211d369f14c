import numpy as np
import pytest

from cogstate.connectivity import pcc
from cogstate.errors import ConfigError
from cogstate.labeling import label_cohort
from cogstate.synth import (
    CohortSpec,
    MixEntry,
    RoundPlan,
    SourceSpec,
    cohort_ground_truth,
    expected_pcc,
    generate_cohort,
    generate_subject,
    paper_shaped_spec,
    subject_states,
)


def shared_source_spec(seed=0, gain1=1.0, gain2=1.0, amp=1.0, noise=1.0, duration=40.0):
    return CohortSpec(
        n_subjects=1,
        n_male=1,
        fs=250.0,
        rounds=(RoundPlan("nback", 1, duration),),
        sources=(SourceSpec("s", (4.0, 16.0), amp),),
        mixing=(MixEntry("s", "Fp1", gain1), MixEntry("s", "Fpz", gain2)),
        modulated_sources=(),
        state_gain={"low": 1.0, "transition": 1.0, "high": 1.0},
        state_layouts=((0, 1, 0),),
        noise_uv=noise,
        background_amp_uv=0.0,
        background_band_hz=(6.0, 14.0),
        seed=seed,
    )


class TestExpectedPcc:
    def test_closed_form_values(self):
        assert expected_pcc(1.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(0.5)
        assert expected_pcc(1.0, 1.0, 1.0, 0.0, 0.0) == pytest.approx(1.0)

    def test_shared_unit_source_no_noise_gives_unit_pcc(self):
        spec = shared_source_spec(noise=0.0, duration=10.0)
        rec = generate_subject(spec, 0)
        r = pcc(rec.channel("Fp1"), rec.channel("Fpz"))
        assert r == pytest.approx(1.0, abs=1e-12)

    def test_equal_gain_unit_noise_gives_half(self):
        vals = [
            pcc(
                generate_subject(shared_source_spec(seed=s), 0).channel("Fp1"),
                generate_subject(shared_source_spec(seed=s), 0).channel("Fpz"),
            )
            for s in range(8)
        ]
        assert abs(float(np.mean(vals)) - 0.5) < 0.05

    def test_disjoint_channels_near_zero(self):
        misses = 0
        for s in range(20):
            rec = generate_subject(shared_source_spec(seed=100 + s), 0)
            r = pcc(rec.channel("O1"), rec.channel("O2"))  # noise-only channels
            if abs(r) >= 0.1:
                misses += 1
        assert misses <= 1  # 95% of trials within the bound

    def test_empirical_matches_closed_form_with_gains(self):
        spec = shared_source_spec(seed=5, gain1=0.8, gain2=0.6, amp=2.0, noise=1.5)
        rec = generate_subject(spec, 0)
        got = pcc(rec.channel("Fp1"), rec.channel("Fpz"))
        want = expected_pcc(0.8, 0.6, 4.0, 1.5**2, 1.5**2)
        assert abs(got - want) < 0.05


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        spec = paper_shaped_spec(7, n_subjects=2, round_duration_s=6.0, fs=250.0)
        a = generate_subject(spec, 0)
        b = generate_subject(spec, 0)
        assert np.array_equal(a.samples, b.samples)
        assert a.annotations == b.annotations

    def test_different_subjects_differ(self):
        spec = paper_shaped_spec(7, n_subjects=2, round_duration_s=6.0, fs=250.0)
        assert not np.array_equal(generate_subject(spec, 0).samples,
                                  generate_subject(spec, 1).samples)


class TestPaperShapedCohort:
    def test_cohort_shape(self):
        spec = paper_shaped_spec(0)
        assert spec.n_subjects == 30
        assert spec.n_male == 21
        assert spec.fs == 500.0
        assert len(spec.rounds) == 9
        tasks = {(r.task, r.difficulty) for r in spec.rounds}
        assert len(tasks) == 9
        genders = [spec.gender_of(i) for i in range(30)]
        assert genders.count("male") == 21 and genders.count("female") == 9
        total_s = sum(r.duration_s for r in spec.rounds)
        assert 600 <= total_s <= 780  # roughly 12 minutes

    def test_ground_truth_informative_channels(self):
        truth = cohort_ground_truth(paper_shaped_spec(1))
        assert set(truth.informative_channels) == {
            "Fp1", "Fpz", "Fp2", "F7", "F3", "Fz", "T7", "P7",
        }
        assert ("P7", "T7") in truth.strong_edges
        assert len(truth.states) == 30 * 9

    def test_planted_states_cover_layouts(self):
        spec = paper_shaped_spec(2, n_subjects=4, round_duration_s=5.0, fs=250.0)
        for idx in range(4):
            states = subject_states(spec, idx)
            lo, mid, hi = spec.state_layouts[idx]
            assert states.count("low") == lo
            assert states.count("transition") == mid
            assert states.count("high") == hi

    def test_labeling_recovers_planted_states(self):
        spec = paper_shaped_spec(3, n_subjects=8, round_duration_s=6.0, fs=250.0)
        recs, truth = generate_cohort(spec)
        trials = label_cohort(recs)
        hits = 0
        for rec in recs:
            for ri in range(len(rec.annotations)):
                planted = truth.state_of(rec.subject_id, ri)
                got = next(
                    t.state for t in trials
                    if t.subject_id == rec.subject_id
                    and t.task == rec.annotations[ri].task
                    and t.difficulty == rec.annotations[ri].difficulty
                )
                hits += got == planted
        assert hits / (8 * 9) >= 0.95

    def test_annotations_are_valid_rounds(self):
        spec = paper_shaped_spec(4, n_subjects=2, round_duration_s=5.0, fs=250.0)
        rec = generate_subject(spec, 1)
        assert len(rec.annotations) == 9
        for rnd in rec.annotations:
            assert 0.0 <= rnd.performance <= 1.0
            assert 0.0 <= rnd.nasa_tlx <= 1.0


class TestSpecValidation:
    def test_unknown_channel(self):
        with pytest.raises(ConfigError, match="unknown channel"):
            shared = shared_source_spec()
            CohortSpec(**{**shared.__dict__, "mixing": (MixEntry("s", "XX", 1.0),)})

    def test_unknown_source(self):
        with pytest.raises(ConfigError, match="unknown source"):
            shared = shared_source_spec()
            CohortSpec(**{**shared.__dict__, "mixing": (MixEntry("zzz", "Fp1", 1.0),)})

    def test_layout_must_cover_rounds(self):
        with pytest.raises(ConfigError, match="cover"):
            shared = shared_source_spec()
            CohortSpec(**{**shared.__dict__, "state_layouts": ((1, 1, 1),)})
