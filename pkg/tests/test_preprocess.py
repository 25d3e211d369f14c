import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogstate.errors import ConfigError, DegenerateSignalError, UnrecoverableChannelError
from cogstate.preprocess import (
    CorruptionReport,
    FilterSpec,
    apply_filter,
    baseline_correct,
    design_filter,
    detect_corruption,
    interpolate,
    normalize,
    normalize_recording,
    preset_filters,
)
from cogstate.recording import TaskRound

from conftest import make_recording

FS = 500.0


def sine(freq, seconds=10.0, fs=FS, amp=1.0):
    t = np.arange(int(seconds * fs)) / fs
    return amp * np.sin(2 * np.pi * freq * t)


def steady_amplitude(x, fs=FS, skip_s=40.0, span_s=40.0):
    """sqrt(2)*RMS over the signal center: the 0.1 Hz edge transients of
    the tiny reflect pad need tens of seconds to die out."""
    core = x[int(skip_s * fs) : int((skip_s + span_s) * fs)]
    return np.sqrt(2.0) * core.std()


class TestFilters:
    def test_bandpass_passes_10hz_within_5pct(self):
        bp, _ = preset_filters("default")
        out = apply_filter(design_filter(bp, FS), sine(10.0, 120.0))
        assert abs(steady_amplitude(out) - 1.0) < 0.05

    def test_bandpass_attenuates_80hz_by_40db(self):
        bp, _ = preset_filters("default")
        out = apply_filter(design_filter(bp, FS), sine(80.0, 120.0))
        assert steady_amplitude(out) < 10 ** (-40 / 20)

    def test_bandstop_kills_50hz_keeps_40hz(self):
        _, bs = preset_filters("default")
        coeffs = design_filter(bs, FS)
        assert steady_amplitude(apply_filter(coeffs, sine(50.0, 120.0))) < 10 ** (-30 / 20)
        assert abs(steady_amplitude(apply_filter(coeffs, sine(40.0, 120.0))) - 1.0) < 0.05

    def test_zero_phase_no_lag(self):
        bp, _ = preset_filters("default")
        clean = sine(10.0, 120.0)
        out = apply_filter(design_filter(bp, FS), clean)
        a = out[int(40 * FS) : int(80 * FS)]
        b = clean[int(40 * FS) : int(80 * FS)]
        corr = np.correlate(a, b, mode="full")
        lag = np.argmax(corr) - (len(b) - 1)
        assert lag == 0

    def test_cutoff_at_nyquist_rejected(self):
        with pytest.raises(ConfigError, match="Nyquist"):
            design_filter(FilterSpec("bandpass", 0.1, 250.0), FS)

    def test_order_must_be_even_positive(self):
        with pytest.raises(ConfigError):
            FilterSpec("bandpass", 0.1, 50.0, order=3)
        with pytest.raises(ConfigError):
            FilterSpec("bandpass", 0.1, 50.0, order=0)

    def test_presets(self):
        bp, bs = preset_filters("alg1")
        assert (bp.low_hz, bp.high_hz) == (0.1, 80.0)
        assert (bs.low_hz, bs.high_hz) == (49.0, 51.0)
        bp, bs = preset_filters("text-2022")
        assert (bp.high_hz, bs.low_hz, bs.high_hz) == (50.0, 46.0, 50.0)
        with pytest.raises(ConfigError):
            preset_filters("nope")

    def test_filter_preserves_shape_multichannel(self):
        coeffs = design_filter(FilterSpec("bandpass", 1.0, 30.0), FS)
        x = np.random.default_rng(0).normal(size=(20, 2000))
        assert apply_filter(coeffs, x).shape == (20, 2000)


class TestCorruption:
    def test_all_zero_channel_flagged_whole(self):
        samples = np.random.default_rng(0).normal(size=(20, 2000)) * 10
        samples[5] = 0.0
        rec = make_recording(samples)
        report = detect_corruption(rec, amp_limit=100.0, flat_window_s=1.0)
        assert report.whole_channel[5]
        assert not any(report.whole_channel[:5]) and not any(report.whole_channel[6:])

    def test_clean_sine_empty_report(self):
        rec = make_recording(np.vstack([sine(10, amp=50)] * 20)
                             + np.random.default_rng(1).normal(size=(20, 5000)))
        report = detect_corruption(rec, amp_limit=100.0, flat_window_s=1.0)
        assert report.is_empty

    def test_injected_spike_flagged_at_index(self):
        samples = np.vstack([sine(10, amp=50)] * 20)
        samples[3, 777] = 200.0
        rec = make_recording(samples)
        report = detect_corruption(rec, amp_limit=100.0)
        assert report.corrupt_mask(3)[777]
        assert report.corrupt_mask(3).sum() == 1
        assert not report.whole_channel[3]

    def test_flat_run_flagged(self):
        samples = np.random.default_rng(2).normal(size=(20, 5000)) * 10
        samples[7, 1000:1600] = 3.14  # 1.2 s flat at fs 500
        rec = make_recording(samples)
        report = detect_corruption(rec, flat_window_s=1.0)
        mask = report.corrupt_mask(7)
        assert mask[1000:1600].all()
        assert mask.sum() == 600

    def test_amp_limit_validated(self):
        rec = make_recording(np.zeros((20, 100)))
        with pytest.raises(ConfigError):
            detect_corruption(rec, amp_limit=0.0)


class TestInterpolate:
    def test_linear_midpoint(self, montage):
        samples = np.ones((20, 3))
        samples[:, 1] = 999.0
        samples[:, 0] = 1.0
        samples[:, 2] = 3.0
        rec = make_recording(samples)
        intervals = tuple(((1, 2),) for _ in range(20))
        report = CorruptionReport(rec.channels, 3, intervals, tuple([False] * 20))
        fixed = interpolate(rec, report, montage)
        assert np.allclose(fixed.samples[:, 1], 2.0)

    def test_whole_channel_replaced_by_neighbor_mean(self, montage):
        rng = np.random.default_rng(3)
        samples = rng.normal(size=(20, 500))
        rec = make_recording(samples)
        cz = rec.channels.index("Cz")
        intervals = tuple(() for _ in range(20))
        whole = tuple(i == cz for i in range(20))
        report = CorruptionReport(rec.channels, 500, intervals, whole)
        fixed = interpolate(rec, report, montage)
        neigh = [rec.channels.index(n) for n in montage.neighbors["Cz"]]
        assert np.allclose(fixed.samples[cz], samples[neigh].mean(axis=0))

    def test_unrecoverable_when_all_neighbors_corrupt(self, montage):
        rec = make_recording(np.random.default_rng(4).normal(size=(20, 100)))
        corrupt = {"Cz"} | set(montage.neighbors["Cz"])
        whole = tuple(name in corrupt for name in rec.channels)
        report = CorruptionReport(rec.channels, 100, tuple(() for _ in range(20)), whole)
        with pytest.raises(UnrecoverableChannelError):
            interpolate(rec, report, montage)

    def test_matches_reference_reimplementation(self, montage):
        rng = np.random.default_rng(5)
        samples = rng.normal(size=(20, 300)) * 20
        rec = make_recording(samples.copy())
        report = detect_corruption(
            make_recording(_corrupt(samples.copy(), rng)), amp_limit=100.0, flat_window_s=0.1
        )
        rec2 = make_recording(_corrupt(samples.copy(), rng2()))
        fixed = interpolate(rec2, report, montage)

        # Straightforward reference: same two rules, written independently.
        expected = rec2.samples.copy()
        for i in range(20):
            if report.whole_channel[i]:
                continue
            mask = report.corrupt_mask(i)
            idx = np.arange(300)
            if mask.any():
                expected[i, mask] = np.interp(idx[mask], idx[~mask], expected[i, ~mask])
        for i, name in enumerate(rec2.channels):
            if report.whole_channel[i]:
                rows = [
                    rec2.channels.index(n)
                    for n in montage.neighbors[name]
                    if not report.whole_channel[rec2.channels.index(n)]
                ]
                expected[i] = expected[rows].mean(axis=0)
        assert np.allclose(fixed.samples, expected, atol=1e-12)


def _corrupt(samples, rng):
    samples[2, 10:40] = 500.0
    samples[9] = 1.0  # constant channel -> whole-channel corrupt
    samples[14, 250:299] = -400.0
    return samples


def rng2():
    return np.random.default_rng(5)


class TestBaseline:
    def test_constant_channel_zeroed(self):
        rec = make_recording(np.full((20, 5000), 7.0))
        out = baseline_correct(rec, (3000.0, 5000.0))
        assert np.allclose(out.samples, 0.0)

    def test_sine_with_offset_over_whole_periods(self):
        fs = 500.0
        x = sine(10.0, seconds=10.0) + 3.0
        rec = make_recording(np.vstack([x] * 20), fs=fs)
        # Window covers 3..5 s: exactly 20 periods of the 10 Hz sine.
        out = baseline_correct(rec, (3000.0, 5000.0))
        assert abs(out.samples[0].mean() - sine(10.0, 10.0).mean()) < 1e-9

    def test_output_mean_over_window_is_zero(self):
        rng = np.random.default_rng(6)
        rec = make_recording(rng.normal(size=(20, 5000)) * 10)
        out = baseline_correct(rec, (3000.0, 5000.0))
        a, b = int(3.0 * 500), int(5.0 * 500)
        assert np.max(np.abs(out.samples[:, a:b].mean(axis=1))) < 1e-12

    def test_empty_or_outside_window(self):
        rec = make_recording(np.zeros((20, 1000)))
        with pytest.raises(ConfigError):
            baseline_correct(rec, (100.0, 100.0))
        with pytest.raises(ConfigError):
            baseline_correct(rec, (1000.0, 99999.0))


class TestNormalize:
    def test_trivial_cases(self):
        assert np.allclose(normalize(np.array([1.0, 2.0, 3.0])), [0.0, 0.5, 1.0])
        assert np.allclose(normalize(np.array([-1.0, 0.0, 3.0])), [0.0, 0.25, 1.0])

    def test_constant_is_degenerate(self):
        with pytest.raises(DegenerateSignalError):
            normalize(np.array([5.0, 5.0, 5.0]))

    def test_recording_variant_names_channel(self):
        samples = np.random.default_rng(7).normal(size=(20, 50))
        samples[11] = 2.0
        with pytest.raises(DegenerateSignalError, match="C4"):
            normalize_recording(make_recording(samples))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=2, max_size=50))
    def test_idempotent_on_unit_range(self, values):
        x = np.asarray(values)
        if x.max() == x.min():
            return
        once = normalize(x)
        assert np.allclose(normalize(once), once, atol=1e-12)
        assert once.min() == 0.0 and once.max() == 1.0


def test_full_pipeline_preserves_shape(montage):
    from cogstate.config import PipelineConfig
    from cogstate.pipeline import preprocess_full

    rng = np.random.default_rng(8)
    fs = 250.0
    n = int(8 * fs)
    samples = rng.normal(size=(20, n)) * 15 + np.vstack([sine(9, 8, fs, 20)] * 20)
    rounds = (TaskRound("nback", 1, 0.0, 8.0, 0.7, 0.3),)
    rec = make_recording(samples, fs=fs, rounds=rounds)
    config = PipelineConfig(baseline_ms=(3000.0, 5000.0), ica_fit_stride=2, ica_max_iter=80)
    out, log = preprocess_full(rec, montage, config)
    assert out.samples.shape == rec.samples.shape
    assert out.channels == rec.channels
    assert log.subject_id == rec.subject_id
