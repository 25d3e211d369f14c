import numpy as np
import pytest

from cogstate.errors import AllComponentsRejectedError, ConfigError, WhiteningError
from cogstate.ica import (
    decompose_recording,
    fast_ica,
    ocular_component_flags,
    reconstruct,
    reject_artifacts,
)
from cogstate.recording import TaskRound
from cogstate.synth import add_blinks

from conftest import make_recording


def two_sources(seed, n=4000, fs=500.0):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / fs
    s1 = rng.uniform(-1.0, 1.0, size=n)
    s2 = np.sin(2 * np.pi * 7.0 * t)
    return np.vstack([s1, s2])


def best_abs_corr(recovered, truth):
    """Max |corr| of each true source against any recovered component."""
    out = []
    for s in truth:
        cs = [abs(np.corrcoef(s, r)[0, 1]) for r in recovered]
        out.append(max(cs))
    return out


def test_planted_two_source_recovery():
    sources = two_sources(0)
    rng = np.random.default_rng(1)
    mixing = rng.uniform(-1, 1, size=(2, 2))
    while abs(np.linalg.det(mixing)) < 0.3:
        mixing = rng.uniform(-1, 1, size=(2, 2))
    mixed = mixing @ sources
    dec = fast_ica(mixed, seed=2)
    assert dec.converged
    corrs = best_abs_corr(dec.sources, sources)
    assert min(corrs) >= 0.95


def test_whitened_independent_inputs_give_signed_permutation():
    sources = two_sources(3)
    centered = sources - sources.mean(axis=1, keepdims=True)
    cov = np.cov(centered)
    evals, evecs = np.linalg.eigh(cov)
    white = (evecs / np.sqrt(evals)).T @ centered
    dec = fast_ica(white, seed=4)
    m = dec.unmixing @ dec.whitening
    # Each row/column should have one dominant +-1 entry.
    for row in np.abs(m):
        top = np.sort(row)[::-1]
        assert top[0] > 0.95 and top[1] < 0.25


def test_constant_channel_whitening_error():
    data = np.vstack([np.ones(100), np.random.default_rng(0).normal(size=100)])
    with pytest.raises(WhiteningError):
        fast_ica(data)


def test_needs_more_samples_than_channels():
    with pytest.raises(ConfigError):
        fast_ica(np.zeros((5, 5)))


def test_components_mutually_uncorrelated():
    rng = np.random.default_rng(5)
    data = rng.normal(size=(6, 3000))
    data[1] += 0.8 * data[0]
    data[4] -= 0.5 * data[2]
    dec = fast_ica(data, seed=6)
    c = np.corrcoef(dec.sources)
    off = c - np.diag(np.diag(c))
    assert np.max(np.abs(off)) < 1e-6


def test_unmixing_rows_unit_norm():
    dec = fast_ica(two_sources(7), seed=8)
    assert np.allclose(np.linalg.norm(dec.unmixing, axis=1), 1.0, atol=1e-10)


def _frontal_recording(seed=9, n=5000, with_blinks=False):
    rng = np.random.default_rng(seed)
    fs = 500.0
    channels = ("Fp1", "Fp2", "F3", "F4", "Cz", "Pz")
    base = rng.normal(size=(6, n)) * 8.0
    t = np.arange(n) / fs
    base[2] += 20 * np.sin(2 * np.pi * 9 * t)
    base[5] += 15 * np.sin(2 * np.pi * 5 * t + 0.5)
    rec = make_recording(base, fs=fs, channels=channels,
                         rounds=(TaskRound("nback", 1, 0.0, n / fs, 0.5, 0.5),))
    if with_blinks:
        return add_blinks(rec, seed=seed)
    return rec, None


def test_no_rejection_reconstruction_is_lossless():
    rec, _ = _frontal_recording()
    dec = decompose_recording(rec, seed=10)
    out = reconstruct(dec, rec, drop=())
    assert np.max(np.abs(out.samples - rec.samples)) < 1e-8


def test_clean_signal_passes_rejection_unchanged():
    rec, _ = _frontal_recording()
    dec = decompose_recording(rec, seed=11)
    flags = ocular_component_flags(dec, rec, corr_threshold=0.8)
    assert not any(f.rejected for f in flags)
    out = reject_artifacts(dec, rec, corr_threshold=0.8)
    assert np.max(np.abs(out.samples - rec.samples)) < 1e-8


def test_planted_blink_removed():
    rec, template = _frontal_recording(seed=12, with_blinks=True)
    dec = decompose_recording(rec, seed=13)
    out = reject_artifacts(dec, rec, corr_threshold=0.8)
    fp1 = out.channel("Fp1")
    corr = abs(np.corrcoef(fp1, template)[0, 1])
    assert corr < 0.2
    flags = ocular_component_flags(dec, rec, corr_threshold=0.8)
    assert any(f.rejected for f in flags)


def test_zero_threshold_rejects_everything():
    rec, _ = _frontal_recording(seed=14)
    dec = decompose_recording(rec, seed=15)
    with pytest.raises(AllComponentsRejectedError):
        reject_artifacts(dec, rec, corr_threshold=0.0)


def test_strided_fit_reconstruction_still_exact():
    rec, _ = _frontal_recording(seed=16)
    dec = decompose_recording(rec, fit_stride=4, seed=17)
    out = reconstruct(dec, rec, drop=())
    assert np.max(np.abs(out.samples - rec.samples)) < 1e-8
