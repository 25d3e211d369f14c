"""Five-band decomposition and Welch power spectral density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import ConfigError
from .preprocess import FilterSpec, design_filter, apply_filter
from .recording import Recording


@dataclass(frozen=True)
class BandDefinition:
    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.low_hz < self.high_hz:
            raise ConfigError(f"band {self.name}: need 0 <= low < high, got [{self.low_hz}, {self.high_hz}]")


# Half-open partition of the analysis range; adjacent bands share an edge.
DEFAULT_BANDS: tuple[BandDefinition, ...] = (
    BandDefinition("delta", 0.1, 4.0),
    BandDefinition("theta", 4.0, 8.0),
    BandDefinition("alpha", 8.0, 13.0),
    BandDefinition("beta", 13.0, 30.0),
    BandDefinition("gamma", 30.0, 50.0),
)


def band_decompose(
    rec: Recording, bands: tuple[BandDefinition, ...] = DEFAULT_BANDS, order: int = 4
) -> dict[str, Recording]:
    """Zero-phase band-pass the recording at every band's edges."""
    out: dict[str, Recording] = {}
    for band in bands:
        spec = FilterSpec("bandpass", band.low_hz, band.high_hz, order=order)
        coeffs = design_filter(spec, rec.sampling_rate)
        out[band.name] = rec.with_samples(apply_filter(coeffs, rec.samples))
    return out


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided Welch estimate; power rows align with ``channels``."""

    freqs_hz: np.ndarray           # (n_freqs,)
    power: np.ndarray              # (n_channels, n_freqs), uV^2/Hz
    channels: tuple[str, ...]
    segment_samples: int
    overlap: float
    window: str = "hann"

    def channel_power(self, name: str) -> np.ndarray:
        try:
            return self.power[self.channels.index(name)]
        except ValueError:
            raise ConfigError(f"PSD has no channel {name!r}") from None


def welch_psd(
    x: np.ndarray,
    fs: float,
    segment_s: float = 2.0,
    overlap: float = 0.5,
    channels: tuple[str, ...] | None = None,
) -> PsdEstimate:
    """Hann-windowed averaged periodogram (density scaling, one-sided).

    Accepts a single signal or a channel-major matrix. DC is kept
    (no detrending), so a constant signal shows up in the 0 Hz bin.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if not 0.0 <= overlap < 1.0:
        raise ConfigError(f"overlap must be in [0, 1), got {overlap}")
    nseg = int(round(segment_s * fs))
    if nseg < 8:
        raise ConfigError(f"segment of {segment_s} s gives {nseg} samples; need at least 8")
    if x.shape[-1] < nseg:
        raise ConfigError(
            f"signal of {x.shape[-1]} samples is shorter than one segment ({nseg})"
        )
    freqs, power = sps.welch(
        x,
        fs=fs,
        window="hann",
        nperseg=nseg,
        noverlap=int(round(overlap * nseg)),
        detrend=False,
        scaling="density",
        axis=-1,
    )
    if channels is None:
        channels = tuple(f"ch{i}" for i in range(x.shape[0]))
    return PsdEstimate(
        freqs_hz=freqs,
        power=power,
        channels=channels,
        segment_samples=nseg,
        overlap=overlap,
    )


def recording_psd(rec: Recording, segment_s: float = 2.0, overlap: float = 0.5) -> PsdEstimate:
    return welch_psd(rec.samples, rec.sampling_rate, segment_s, overlap, channels=rec.channels)


def band_power(psd: PsdEstimate, band: BandDefinition) -> np.ndarray:
    """Trapezoidal integral of the PSD over the band, per channel."""
    if band.low_hz < psd.freqs_hz[0] - 1e-9 or band.high_hz > psd.freqs_hz[-1] + 1e-9:
        raise ConfigError(
            f"band [{band.low_hz}, {band.high_hz}] Hz outside PSD grid "
            f"[{psd.freqs_hz[0]}, {psd.freqs_hz[-1]}] Hz"
        )
    sel = (psd.freqs_hz >= band.low_hz) & (psd.freqs_hz <= band.high_hz)
    if sel.sum() < 2:
        return np.zeros(psd.power.shape[0])
    return np.trapezoid(psd.power[:, sel], psd.freqs_hz[sel], axis=-1)


def psd_payload(psd: PsdEstimate) -> dict:
    """JSON-ready export consumed by the plotting component."""
    return {
        "schema": "cogstate.psd/v1",
        "channels": list(psd.channels),
        "freqs_hz": psd.freqs_hz.tolist(),
        "psd": psd.power.tolist(),
        "params": {
            "segment_samples": psd.segment_samples,
            "overlap": psd.overlap,
            "window": psd.window,
        },
    }
