"""Symmetric FastICA with tanh contrast, plus ocular-artifact rejection.

Components whose time course correlates strongly with the frontal
channels Fp1/Fp2 are treated as blink or eye-movement artifacts: they are
zeroed and the signal is rebuilt from the remaining components.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AllComponentsRejectedError, ConfigError, WhiteningError
from .recording import Recording

OCULAR_PROXY_CHANNELS = ("Fp1", "Fp2")
DEFAULT_REJECT_CORR = 0.8


@dataclass(frozen=True)
class ComponentFlag:
    index: int
    rejected: bool
    reason: str = ""


@dataclass(frozen=True)
class IcaDecomposition:
    """Whitening + unmixing transforms and the component time series.

    ``unmixing`` has orthonormal rows; applying ``unmixing @ whitening``
    to centered data yields mutually uncorrelated components. ``sources``
    are the components of the data the decomposition was fitted on.
    """

    channels: tuple[str, ...]
    mean: np.ndarray          # (C,)
    whitening: np.ndarray     # (n_components, C)
    dewhitening: np.ndarray   # (C, n_components), pseudo-inverse of whitening
    unmixing: np.ndarray      # (n_components, n_components)
    sources: np.ndarray       # (n_components, T_fit)
    converged: bool
    n_iter: int
    flags: tuple[ComponentFlag, ...] = ()

    @property
    def n_components(self) -> int:
        return self.unmixing.shape[0]

    def components_of(self, data: np.ndarray) -> np.ndarray:
        """Component time series of arbitrary data under the fitted transforms."""
        centered = np.asarray(data, dtype=np.float64) - self.mean[:, None]
        return self.unmixing @ (self.whitening @ centered)

    def with_flags(self, flags: tuple[ComponentFlag, ...]) -> "IcaDecomposition":
        return replace(self, flags=flags)


def _sym_orth(w: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(w)
    return u @ vt


def fast_ica(
    data: np.ndarray,
    n_components: int | None = None,
    max_iter: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
    channels: tuple[str, ...] | None = None,
) -> IcaDecomposition:
    """Symmetric fixed-point ICA with tanh contrast on whitened data.

    Converged when ``max_i |1 - |<w_new_i, w_old_i>||`` drops below
    ``tol``; the status is reported on the decomposition either way.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ConfigError(f"data must be 2-D (channels, time), got shape {data.shape}")
    n_chan, n_samp = data.shape
    if n_samp <= n_chan:
        raise ConfigError(f"need more samples than channels, got {data.shape}")
    if n_components is None:
        n_components = n_chan
    if not 1 <= n_components <= n_chan:
        raise ConfigError(f"n_components must be in [1, {n_chan}], got {n_components}")

    mean = data.mean(axis=1)
    centered = data - mean[:, None]
    cov = np.cov(centered)
    if n_chan == 1:
        cov = cov.reshape(1, 1)
    evals, evecs = np.linalg.eigh(cov)
    if evals[-1] <= 0 or evals[0] <= 1e-12 * evals[-1]:
        raise WhiteningError(
            "covariance is rank deficient (constant or linearly dependent channel)"
        )
    order = np.argsort(evals)[::-1][:n_components]
    evals, evecs = evals[order], evecs[:, order]
    whitening = (evecs / np.sqrt(evals)).T          # (n_components, C)
    dewhitening = evecs * np.sqrt(evals)            # (C, n_components)
    z = whitening @ centered

    rng = np.random.default_rng(seed)
    w = _sym_orth(rng.standard_normal((n_components, n_components)))
    converged = False
    n_iter = max_iter
    for it in range(1, max_iter + 1):
        g = np.tanh(w @ z)
        w_new = (g @ z.T) / n_samp - (1.0 - g**2).mean(axis=1)[:, None] * w
        w_new = _sym_orth(w_new)
        delta = np.max(np.abs(1.0 - np.abs(np.sum(w_new * w, axis=1))))
        w = w_new
        if delta < tol:
            converged = True
            n_iter = it
            break

    return IcaDecomposition(
        channels=channels if channels is not None else tuple(f"ch{i}" for i in range(n_chan)),
        mean=mean,
        whitening=whitening,
        dewhitening=dewhitening,
        unmixing=w,
        sources=w @ z,
        converged=converged,
        n_iter=n_iter,
    )


def decompose_recording(
    rec: Recording, fit_stride: int = 1, max_iter: int = 500, tol: float = 1e-6, seed: int = 0
) -> IcaDecomposition:
    """Fit ICA on a recording, optionally on every ``fit_stride``-th sample.

    The fitted transforms are sample-rate free, so fitting on a strided
    view and applying to the full signal is exact for reconstruction.
    """
    if fit_stride < 1:
        raise ConfigError(f"fit_stride must be >= 1, got {fit_stride}")
    return fast_ica(
        rec.samples[:, ::fit_stride],
        max_iter=max_iter,
        tol=tol,
        seed=seed,
        channels=rec.channels,
    )


def _abs_corr(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0.0:
        return 0.0
    return float(abs((xc @ yc) / denom))


def ocular_component_flags(
    dec: IcaDecomposition, rec: Recording, corr_threshold: float = DEFAULT_REJECT_CORR
) -> tuple[ComponentFlag, ...]:
    """Flag components correlating with Fp1/Fp2 beyond the threshold."""
    if dec.channels != rec.channels:
        raise ConfigError("decomposition was not computed from this recording's channels")
    comps = dec.components_of(rec.samples)
    flags = []
    for i in range(dec.n_components):
        worst = 0.0
        worst_name = OCULAR_PROXY_CHANNELS[0]
        for name in OCULAR_PROXY_CHANNELS:
            c = _abs_corr(comps[i], rec.channel(name))
            if c > worst:
                worst, worst_name = c, name
        if worst > corr_threshold:
            flags.append(ComponentFlag(i, True, f"|corr({worst_name})| = {worst:.3f}"))
        else:
            flags.append(ComponentFlag(i, False))
    return tuple(flags)


def reconstruct(dec: IcaDecomposition, rec: Recording, drop: tuple[int, ...] = ()) -> Recording:
    """Rebuild the recording from components, zeroing the ``drop`` set."""
    comps = dec.components_of(rec.samples)
    if drop:
        comps = comps.copy()
        comps[list(drop)] = 0.0
    rebuilt = dec.dewhitening @ (dec.unmixing.T @ comps) + dec.mean[:, None]
    return rec.with_samples(rebuilt)


def reject_artifacts(
    dec: IcaDecomposition, rec: Recording, corr_threshold: float = DEFAULT_REJECT_CORR
) -> Recording:
    """Zero ocular components and reconstruct the signal.

    Refuses to proceed if every component would be rejected.
    """
    flags = ocular_component_flags(dec, rec, corr_threshold)
    drop = tuple(f.index for f in flags if f.rejected)
    if len(drop) == dec.n_components:
        raise AllComponentsRejectedError(
            f"all {dec.n_components} components exceed |corr| > {corr_threshold} with "
            f"{'/'.join(OCULAR_PROXY_CHANNELS)}; refusing to emit an empty signal"
        )
    return reconstruct(dec, rec, drop)
