"""Synthetic EEG cohorts with planted connectivity and class structure.

Channels are sums of band-limited latent sources (unit variance, scaled
by per-channel gains) plus independent background noise. Two channels
sharing a source with gains g1, g2 then have expected correlation
``g1*g2*P / sqrt((g1^2*P + r1) * (g2^2*P + r2))`` where P is the source
power and r the per-channel rest variance. Cognitive state is planted
per round by modulating designated source gains and by drawing
performance/TLX so the labeling rule recovers the planted class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .montage import DEFAULT_MONTAGE, Montage
from .preprocess import FilterSpec, apply_filter, design_filter
from .recording import Recording, TaskRound
from .seeds import derive_seed

# Combined-score clusters per planted state; gaps keep quartile labeling exact.
SCORE_RANGES: dict[str, tuple[float, float]] = {
    "low": (0.10, 0.30),
    "transition": (0.45, 0.65),
    "high": (0.80, 0.95),
}


@dataclass(frozen=True)
class SourceSpec:
    name: str
    band_hz: tuple[float, float]
    amplitude_uv: float


@dataclass(frozen=True)
class MixEntry:
    source: str
    channel: str
    gain: float


@dataclass(frozen=True)
class RoundPlan:
    task: str
    difficulty: int
    duration_s: float


@dataclass(frozen=True)
class CohortSpec:
    """Full description of a synthetic cohort; everything derives from ``seed``."""

    n_subjects: int
    n_male: int
    fs: float
    rounds: tuple[RoundPlan, ...]
    sources: tuple[SourceSpec, ...]
    mixing: tuple[MixEntry, ...]
    modulated_sources: tuple[str, ...]
    state_gain: dict[str, float]
    state_layouts: tuple[tuple[int, int, int], ...]  # (low, transition, high) per subject
    noise_uv: float
    background_amp_uv: float
    background_band_hz: tuple[float, float]
    seed: int
    montage: Montage = field(default_factory=lambda: DEFAULT_MONTAGE)

    def __post_init__(self) -> None:
        if self.n_subjects < 1 or not 0 <= self.n_male <= self.n_subjects:
            raise ConfigError(f"bad cohort sizes: {self.n_subjects} subjects, {self.n_male} male")
        if len(self.state_layouts) != self.n_subjects:
            raise ConfigError("state_layouts must list one (low, transition, high) per subject")
        names = [s.name for s in self.sources]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate source names")
        for m in self.mixing:
            if m.source not in names:
                raise ConfigError(f"mix entry references unknown source {m.source!r}")
            if m.channel not in self.montage.names:
                raise ConfigError(f"mix entry references unknown channel {m.channel!r}")
            if not math.isfinite(m.gain):
                raise ConfigError(f"non-finite gain for {m.source}->{m.channel}")
        for s in self.modulated_sources:
            if s not in names:
                raise ConfigError(f"modulated source {s!r} not defined")
        for layout in self.state_layouts:
            if sum(layout) != len(self.rounds):
                raise ConfigError(
                    f"state layout {layout} does not cover {len(self.rounds)} rounds"
                )
        for state in ("low", "transition", "high"):
            if state not in self.state_gain:
                raise ConfigError(f"state_gain missing {state!r}")

    def subject_id(self, idx: int) -> str:
        return f"S{idx:02d}"

    def gender_of(self, idx: int) -> str:
        return "male" if idx < self.n_male else "female"


@dataclass(frozen=True)
class GroundTruth:
    """What was planted: informative channels, strong edges, true states."""

    informative_channels: tuple[str, ...]
    strong_edges: tuple[tuple[str, str], ...]
    states: dict[tuple[str, int], str]  # (subject_id, round_index) -> state

    def state_of(self, subject_id: str, round_index: int) -> str:
        return self.states[(subject_id, round_index)]


def expected_pcc(g1: float, g2: float, source_power: float, rest1: float, rest2: float) -> float:
    """Closed-form correlation of two channels sharing one source."""
    num = g1 * g2 * source_power
    den = math.sqrt((g1**2 * source_power + rest1) * (g2**2 * source_power + rest2))
    return num / den


def _band_noise(
    rng: np.random.Generator,
    shape: tuple[int, ...],
    band: tuple[float, float],
    fs: float,
    depth: float = 0.4,
) -> np.ndarray:
    """Unit-variance band-limited noise rows with amplitude bursts.

    Plain filtered Gaussian noise is rotationally non-identifiable for
    ICA, while amplitude-modulated (super-Gaussian) waveforms separate
    cleanly, as real EEG rhythms do. The envelope fluctuates fast enough
    to average out within an analysis epoch, keeping per-round variance a
    reliable signal, and it leaves total variance and band content
    intact, so the closed-form correlation expectations stay valid.

    Shared class-modulated sources use a shallow depth (stable per-epoch
    variance); per-channel backgrounds use a deep one so ICA pins them as
    distinct components instead of merging their channels' residuals into
    the shared sources.
    """
    spec = FilterSpec("bandpass", band[0], band[1], order=4)
    coeffs = design_filter(spec, fs)
    x = apply_filter(coeffs, rng.standard_normal(shape))
    if depth > 0:
        env_spec = FilterSpec("bandpass", 2.0, 10.0, order=2)
        wave = apply_filter(design_filter(env_spec, fs), rng.standard_normal(shape))
        wstd = wave.std(axis=-1, keepdims=True)
        wstd[wstd == 0] = 1.0
        x = x * np.exp(depth * wave / wstd)
    std = x.std(axis=-1, keepdims=True)
    std[std == 0] = 1.0
    return x / std


def subject_states(spec: CohortSpec, idx: int) -> tuple[str, ...]:
    """Planted per-round states for one subject (cheap, signal-free)."""
    n_low, n_mid, n_high = spec.state_layouts[idx]
    states = ["low"] * n_low + ["transition"] * n_mid + ["high"] * n_high
    rng = np.random.default_rng(derive_seed(spec.seed, "subject", idx, "states"))
    return tuple(states[j] for j in rng.permutation(len(states)))


def cohort_ground_truth(spec: CohortSpec) -> GroundTruth:
    # Channels co-driven by any shared source carry the planted
    # connectivity structure; their pairs are the planted strong edges.
    by_source: dict[str, list[str]] = {}
    for m in spec.mixing:
        by_source.setdefault(m.source, []).append(m.channel)
    informative: list[str] = []
    edges: set[tuple[str, str]] = set()
    for chans in by_source.values():
        if len(chans) < 2:
            continue
        informative.extend(c for c in chans if c not in informative)
        for i, a in enumerate(chans):
            for b in chans[i + 1 :]:
                edges.add((min(a, b), max(a, b)))
    states = {}
    for idx in range(spec.n_subjects):
        sid = spec.subject_id(idx)
        for round_index, state in enumerate(subject_states(spec, idx)):
            states[(sid, round_index)] = state
    return GroundTruth(
        informative_channels=tuple(n for n in spec.montage.names if n in informative),
        strong_edges=tuple(sorted(edges)),
        states=states,
    )


def generate_subject(spec: CohortSpec, idx: int) -> Recording:
    """One subject's recording: planted sources, background, annotations."""
    fs = spec.fs
    names = spec.montage.names
    chan_index = {n: i for i, n in enumerate(names)}
    states = subject_states(spec, idx)
    sig_rng = np.random.default_rng(derive_seed(spec.seed, "subject", idx, "signal"))
    score_rng = np.random.default_rng(derive_seed(spec.seed, "subject", idx, "scores"))

    blocks = []
    annotations = []
    t0 = 0.0
    for round_index, (plan, state) in enumerate(zip(spec.rounds, states)):
        n = int(round(plan.duration_s * fs))
        block = sig_rng.standard_normal((len(names), n)) * spec.noise_uv
        if spec.background_amp_uv > 0:
            block += spec.background_amp_uv * _band_noise(
                sig_rng, (len(names), n), spec.background_band_hz, fs, depth=0.8
            )
        for src in spec.sources:
            wave = _band_noise(sig_rng, (n,), src.band_hz, fs, depth=0.4)[None, :]
            mult = spec.state_gain[state] if src.name in spec.modulated_sources else 1.0
            amp = src.amplitude_uv * mult
            for m in spec.mixing:
                if m.source == src.name:
                    block[chan_index[m.channel]] += m.gain * amp * wave[0]
        blocks.append(block)

        lo, hi = SCORE_RANGES[state]
        s = score_rng.uniform(lo, hi)
        perf = float(np.clip(s + score_rng.uniform(-0.05, 0.05), 0.0, 1.0))
        tlx = float(np.clip(1.0 - (2.0 * s - perf), 0.0, 1.0))
        annotations.append(
            TaskRound(
                task=plan.task,
                difficulty=plan.difficulty,
                start_s=t0,
                end_s=t0 + plan.duration_s,
                performance=perf,
                nasa_tlx=tlx,
            )
        )
        t0 += plan.duration_s

    return Recording(
        subject_id=spec.subject_id(idx),
        gender=spec.gender_of(idx),
        sampling_rate=fs,
        channels=names,
        samples=np.concatenate(blocks, axis=1),
        annotations=tuple(annotations),
    )


def iter_cohort(spec: CohortSpec):
    """Yield subject recordings one at a time (bounded memory)."""
    for idx in range(spec.n_subjects):
        yield generate_subject(spec, idx)


def generate_cohort(spec: CohortSpec) -> tuple[list[Recording], GroundTruth]:
    return list(iter_cohort(spec)), cohort_ground_truth(spec)


def _default_layouts(n_subjects: int, n_rounds: int) -> tuple[tuple[int, int, int], ...]:
    """Per-subject class counts keeping cohort totals near 25/50/25 so the
    quartile cuts fall into the score-cluster gaps."""
    if n_rounds != 9:
        base = max(1, n_rounds // 4)
        return tuple((base, n_rounds - 2 * base, base) for _ in range(n_subjects))
    cycle = ((3, 4, 2), (2, 5, 2), (2, 4, 3), (2, 5, 2))
    return tuple(cycle[idx % 4] for idx in range(n_subjects))


def paper_shaped_spec(
    seed: int,
    n_subjects: int = 30,
    n_male: int | None = None,
    fs: float = 500.0,
    round_duration_s: float = 75.0,
) -> CohortSpec:
    """Cohort shaped like the study setup: 30 subjects (21 male / 9 female),
    3 tasks x 3 difficulties, roughly 12 minutes per subject at 500 Hz.

    The informative channel set is the reduced left-frontal 8-electrode
    preset; frontal source gains shift by -30% / +30% with planted state.
    """
    if n_male is None:
        n_male = 21 if n_subjects == 30 else max(1, round(0.7 * n_subjects))
    rounds = tuple(
        RoundPlan(task=task, difficulty=d, duration_s=round_duration_s)
        for task in ("nback", "arithmetic", "graphic")
        for d in (1, 2, 3)
    )
    sources = (
        SourceSpec("front_a", (4.0, 16.0), 30.0),
        SourceSpec("front_b", (10.0, 26.0), 25.0),
        SourceSpec("left_tp", (4.0, 16.0), 25.0),
    )
    # The ocular proxies Fp1/Fp2 get deliberately modest shared-source
    # gains: after band-pass filtering shrinks the broadband noise floor,
    # a strongly driven proxy channel would correlate with its source
    # component beyond the 0.8 rejection threshold and the (artifact-free)
    # neural source would be discarded. Non-proxy channels carry the bulk
    # of each source instead.
    mixing = (
        MixEntry("front_a", "Fp1", 0.45),
        MixEntry("front_a", "Fpz", 0.75),
        MixEntry("front_a", "Fp2", 0.45),
        MixEntry("front_a", "Fz", 0.60),
        MixEntry("front_b", "F7", 0.80),
        MixEntry("front_b", "F3", 0.85),
        MixEntry("front_b", "Fz", 0.70),
        MixEntry("front_b", "Fp1", 0.30),
        MixEntry("front_b", "Fpz", 0.30),
        MixEntry("front_b", "Fp2", 0.30),
        MixEntry("left_tp", "T7", 0.85),
        MixEntry("left_tp", "P7", 0.85),
        MixEntry("left_tp", "F7", 0.50),
    )
    return CohortSpec(
        n_subjects=n_subjects,
        n_male=n_male,
        fs=fs,
        rounds=rounds,
        sources=sources,
        mixing=mixing,
        modulated_sources=("front_a", "front_b"),
        state_gain={"low": 0.7, "transition": 1.0, "high": 1.3},
        state_layouts=_default_layouts(n_subjects, len(rounds)),
        noise_uv=12.0,
        background_amp_uv=12.0,
        background_band_hz=(6.0, 14.0),
        seed=seed,
    )


def default_paper_shaped_cohort(seed: int) -> tuple[list[Recording], GroundTruth]:
    return generate_cohort(paper_shaped_spec(seed))


def demo_spec(seed: int, n_subjects: int = 4, round_duration_s: float = 14.0, fs: float = 250.0) -> CohortSpec:
    """Small, fast cohort with the same planted structure (CLI default)."""
    return paper_shaped_spec(
        seed, n_subjects=n_subjects, n_male=(n_subjects + 1) // 2,
        fs=fs, round_duration_s=round_duration_s,
    )


def blink_template(n_samples: int, fs: float, seed: int, rate_hz: float = 0.25,
                   width_s: float = 0.15, amplitude_uv: float = 90.0) -> np.ndarray:
    """Train of smooth positive pulses mimicking eye blinks."""
    rng = np.random.default_rng(derive_seed(seed, "blinks"))
    n_blinks = max(1, int(round(n_samples / fs * rate_hz)))
    centers = rng.uniform(2 * width_s, n_samples / fs - 2 * width_s, size=n_blinks)
    t = np.arange(n_samples) / fs
    wave = np.zeros(n_samples)
    for c in centers:
        wave += np.exp(-0.5 * ((t - c) / (width_s / 2.0)) ** 2)
    return amplitude_uv * wave


def add_blinks(rec: Recording, seed: int, gains: dict[str, float] | None = None) -> tuple[Recording, np.ndarray]:
    """Inject a blink train into the frontal channels; returns the template."""
    if gains is None:
        gains = {"Fp1": 1.0, "Fp2": 0.9}
    template = blink_template(rec.n_samples, rec.sampling_rate, seed)
    samples = rec.samples.copy()
    for name, gain in gains.items():
        samples[rec.channels.index(name)] += gain * template
    return rec.with_samples(samples), template
