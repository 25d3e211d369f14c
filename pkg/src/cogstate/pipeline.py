"""End-to-end orchestration shared by the CLI and the experiment scripts.

Subjects stream through one at a time: each recording is cleaned, reduced
to per-round connectivity matrices plus a small decimated epoch block,
then discarded, so a full 30-subject cohort never sits in memory at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .connectivity import (
    AggregateMatrix,
    ChannelScore,
    ConnectivityMatrix,
    CorrelationEmbedding,
    EdgeSet,
    Provenance,
    REDUCED_SET_8,
    aggregate,
    aggregate_by_gender,
    build_embedding,
    difficulty_weights,
    rank_channels,
    round_connectivity,
    split_by_sign,
    top_k_edges,
)
from .errors import ConfigError
from .evaluate import EpochDataset
from .ica import decompose_recording, ocular_component_flags, reconstruct
from .labeling import LabeledTrial, label_rounds, state_index, trial_lookup
from .montage import DEFAULT_MONTAGE, Montage
from .preprocess import (
    FILTER_PRESETS,
    baseline_correct,
    detect_corruption,
    filter_recording,
    interpolate,
    normalize_recording,
    preset_filters,
)
from .recording import Recording, TaskRound, epoch_recording
from .seeds import derive_seed
from .spectral import PsdEstimate
from .synth import CohortSpec, demo_spec, paper_shaped_spec


def cohort_spec_for(config: PipelineConfig) -> CohortSpec:
    if config.cohort == "paper":
        return paper_shaped_spec(derive_seed(config.seed, "cohort"))
    return demo_spec(
        derive_seed(config.seed, "cohort"),
        n_subjects=config.demo_subjects,
        round_duration_s=config.demo_round_s,
        fs=config.demo_fs,
    )


@dataclass
class PreprocessLog:
    subject_id: str
    corrupt_samples: int
    whole_channels: tuple[str, ...]
    ica_converged: bool
    ica_iterations: int
    rejected_components: tuple[str, ...]


def preprocess_full(
    rec: Recording, montage: Montage, config: PipelineConfig
) -> tuple[Recording, PreprocessLog]:
    """Corruption -> interpolation -> band-pass -> band-stop -> baseline ->
    ICA artifact rejection.

    The output stays in calibrated microvolts. Min-max normalization is
    applied later, where the connectivity mapping begins: correlation is
    scale-invariant, while the classifier depends on comparable amplitude
    scales across subjects, which per-recording min-max would destroy.
    """
    report = detect_corruption(rec, config.amp_limit_uv, config.flat_window_s)
    cleaned = interpolate(rec, report, montage) if not report.is_empty else rec
    bp, bs = preset_filters(config.filter_preset, config.filter_order)
    cleaned = filter_recording(cleaned, bp)
    cleaned = filter_recording(cleaned, bs)
    cleaned = baseline_correct(cleaned, config.baseline_ms)
    dec = decompose_recording(
        cleaned,
        fit_stride=config.ica_fit_stride,
        max_iter=config.ica_max_iter,
        tol=config.ica_tol,
        seed=derive_seed(config.seed, "ica", rec.subject_id),
    )
    flags = ocular_component_flags(dec, cleaned, config.reject_corr)
    drop = tuple(f.index for f in flags if f.rejected)
    cleaned = reconstruct(dec, cleaned, drop)
    log = PreprocessLog(
        subject_id=rec.subject_id,
        corrupt_samples=sum(b - a for ch in report.intervals for a, b in ch),
        whole_channels=tuple(
            name for name, w in zip(rec.channels, report.whole_channel) if w
        ),
        ica_converged=dec.converged,
        ica_iterations=dec.n_iter,
        rejected_components=tuple(f.reason for f in flags if f.rejected),
    )
    return cleaned.with_samples(cleaned.samples, pipeline_stage="preprocessed"), log


def _evenly_spaced(n: int, k: int) -> list[int]:
    if k >= n:
        return list(range(n))
    return sorted(set(int(round(i)) for i in np.linspace(0, n - 1, k)))


@dataclass
class SubjectSummary:
    """Everything the cohort pass keeps per subject."""

    subject_id: str
    gender: str
    rounds: tuple[TaskRound, ...]
    matrices: list[ConnectivityMatrix]          # one per round, broadband
    epoch_x: np.ndarray                         # (n, 1, C, W_decimated)
    epoch_rounds: list[tuple[str, int]]         # (task, difficulty) per epoch
    fs_epochs: float
    log: PreprocessLog | None = None


def summarize_subject(
    processed: Recording, config: PipelineConfig, log: PreprocessLog | None = None
) -> SubjectSummary:
    """Round matrices plus a decimated epoch block for the classifier."""
    new_fs = processed.sampling_rate / config.decimate
    bp_high = FILTER_PRESETS[config.filter_preset]["bandpass"][1]
    if new_fs / 2.0 < bp_high:
        raise ConfigError(
            f"decimate={config.decimate} puts Nyquist at {new_fs / 2:.1f} Hz, below the "
            f"band-pass edge {bp_high} Hz; aliasing would corrupt the epochs"
        )
    # Min-max normalization precedes the activity-flow mapping; the
    # classifier epochs keep the calibrated microvolt scale.
    normalized = normalize_recording(processed)
    matrices = [
        round_connectivity(normalized, i) for i in range(len(normalized.annotations))
    ]
    epochs = epoch_recording(processed, config.window_s, config.overlap)
    by_round: dict[int, list] = {}
    for ep in epochs:
        by_round.setdefault(ep.round_index, []).append(ep)
    kept = []
    for round_index in sorted(by_round):
        group = by_round[round_index]
        if config.epochs_per_round is not None:
            group = [group[i] for i in _evenly_spaced(len(group), config.epochs_per_round)]
        kept.extend(group)
    x = np.stack([ep.samples[:, :: config.decimate] for ep in kept])[:, None, :, :]
    return SubjectSummary(
        subject_id=processed.subject_id,
        gender=processed.gender,
        rounds=processed.annotations,
        matrices=matrices,
        epoch_x=x,
        epoch_rounds=[(ep.round.task, ep.round.difficulty) for ep in kept],
        fs_epochs=new_fs,
        log=log,
    )


@dataclass
class ConnectivityAnalysis:
    channels: tuple[str, ...]
    task_weights: dict[str, list[float]]                 # task -> weights per difficulty
    subject_task_matrices: list[ConnectivityMatrix]      # difficulty-weighted
    embedding: CorrelationEmbedding
    overall: AggregateMatrix
    by_gender: dict[str, AggregateMatrix]
    positive: EdgeSet
    negative: EdgeSet
    top_edges: EdgeSet
    ranking: list[ChannelScore]
    selected: tuple[str, ...]


@dataclass
class CohortAccumulator:
    """Streams subject summaries; finalizes connectivity, labels, dataset."""

    config: PipelineConfig
    summaries: list[SubjectSummary] = field(default_factory=list)
    _psd_sum: np.ndarray | None = None
    _psd_grid: np.ndarray | None = None
    _psd_channels: tuple[str, ...] | None = None

    def add(self, summary: SubjectSummary, psd: PsdEstimate | None = None) -> None:
        self.summaries.append(summary)
        if psd is not None:
            if self._psd_sum is None:
                self._psd_sum = psd.power.copy()
                self._psd_grid = psd.freqs_hz.copy()
                self._psd_channels = psd.channels
            else:
                self._psd_sum += psd.power

    @property
    def genders(self) -> dict[str, str]:
        return {s.subject_id: s.gender for s in self.summaries}

    def mean_psd(self) -> PsdEstimate | None:
        if self._psd_sum is None:
            return None
        return PsdEstimate(
            freqs_hz=self._psd_grid,
            power=self._psd_sum / len(self.summaries),
            channels=self._psd_channels,
            segment_samples=0,
            overlap=0.0,
        )

    def annotation_rows(self) -> list[tuple[str, TaskRound]]:
        return [(s.subject_id, rnd) for s in self.summaries for rnd in s.rounds]

    def trials(self) -> list[LabeledTrial]:
        return label_rounds(self.annotation_rows(), self.config.invert_tlx)

    def connectivity_analysis(self) -> ConnectivityAnalysis:
        if not self.summaries:
            raise ConfigError("no subjects accumulated")
        channels = self.summaries[0].matrices[0].channels
        # Cohort-mean performance per (task, difficulty) feeds the weights.
        perf: dict[tuple[str, int], list[float]] = {}
        for sid, rnd in self.annotation_rows():
            perf.setdefault((rnd.task, rnd.difficulty), []).append(rnd.performance)
        tasks = sorted({t for t, _ in perf})
        task_weights: dict[str, list[float]] = {}
        for task in tasks:
            diffs = sorted(d for t, d in perf if t == task)
            means = [float(np.mean(perf[(task, d)])) for d in diffs]
            task_weights[task] = difficulty_weights(means).tolist()
        # Difficulty-weighted sum within (subject, task), then cohort sums.
        per_subject_task: list[ConnectivityMatrix] = []
        for s in self.summaries:
            groups: dict[str, dict[int, ConnectivityMatrix]] = {}
            for rnd, m in zip(s.rounds, s.matrices):
                groups.setdefault(rnd.task, {})[rnd.difficulty] = m
            for task in sorted(groups):
                by_diff = groups[task]
                diffs = sorted(by_diff)
                w = task_weights[task][: len(diffs)]
                combined = aggregate(
                    [by_diff[d] for d in diffs], mode="weighted", weights=w,
                    label=f"{s.subject_id}:{task}",
                )
                values = np.clip(combined.values, -1.0, 1.0).copy()
                np.fill_diagonal(values, 1.0)
                per_subject_task.append(
                    ConnectivityMatrix(
                        channels=channels,
                        values=values,
                        provenance=Provenance(subject_id=s.subject_id, task=task),
                    )
                )
        embedding = build_embedding(per_subject_task)
        overall = aggregate(per_subject_task, mode="overall_sum", label="overall")
        by_gender = aggregate_by_gender(per_subject_task, self.genders)
        positive, negative = split_by_sign(overall)
        top_edges = top_k_edges(overall, self.config.top_k)
        ranking = rank_channels(top_edges, channels=channels)
        selected = tuple(cs.name for cs in ranking[: self.config.n_select])
        return ConnectivityAnalysis(
            channels=channels,
            task_weights=task_weights,
            subject_task_matrices=per_subject_task,
            embedding=embedding,
            overall=overall,
            by_gender=by_gender,
            positive=positive,
            negative=negative,
            top_edges=top_edges,
            ranking=ranking,
            selected=selected,
        )

    def dataset(self, trials: list[LabeledTrial]) -> EpochDataset:
        lookup = trial_lookup(trials)
        xs, ys, sids = [], [], []
        for s in self.summaries:
            for i, (task, difficulty) in enumerate(s.epoch_rounds):
                trial = lookup[(s.subject_id, task, difficulty)]
                xs.append(s.epoch_x[i])
                ys.append(state_index(trial.state))
                sids.append(s.subject_id)
        return EpochDataset(
            x=np.stack(xs),
            y=np.asarray(ys, dtype=np.int64),
            subject_ids=tuple(sids),
            channels=self.summaries[0].matrices[0].channels,
            fs=self.summaries[0].fs_epochs,
        )


def resolve_electrodes(setting: str, analysis: ConnectivityAnalysis | None) -> tuple[str, ...]:
    """Map an electrode preset name to a channel tuple."""
    if setting == "all20":
        return DEFAULT_MONTAGE.names
    if setting == "paper8":
        return REDUCED_SET_8
    if setting.startswith("topk:"):
        n = int(setting.split(":", 1)[1])
        if analysis is None:
            raise ConfigError("topk electrode preset needs a connectivity analysis")
        return tuple(cs.name for cs in analysis.ranking[:n])
    raise ConfigError(f"unknown electrode preset {setting!r}")


def full_cohort_experiment(
    config: PipelineConfig,
    spec: CohortSpec | None = None,
    models: tuple[str, ...] = ("mha-eegnet",),
    verbose: bool = False,
) -> dict:
    """Whole pipeline on a synthetic cohort, in memory.

    Streams subjects through preprocessing, runs electrode selection,
    then cross-validates each model on both the selected channel subset
    and the full montage with one shared fold plan. Returns selection
    overlap with the planted ground truth plus all CV reports.
    """
    from .evaluate import evaluate_cv, make_fold_plan
    from .nn.model import spec_for
    from .nn.train import TrainConfig
    from .synth import cohort_ground_truth, iter_cohort

    if spec is None:
        spec = cohort_spec_for(config)
    truth = cohort_ground_truth(spec)
    acc = CohortAccumulator(config)
    for rec in iter_cohort(spec):
        processed, log = preprocess_full(rec, DEFAULT_MONTAGE, config)
        acc.add(summarize_subject(processed, config, log))
        if verbose:
            print(f"  preprocessed {processed.subject_id} "
                  f"(ica {'ok' if log.ica_converged else 'max-iter'})")
    analysis = acc.connectivity_analysis()
    selected = analysis.selected
    overlap = sorted(set(selected) & set(truth.informative_channels))

    trials = acc.trials()
    dataset = acc.dataset(trials)
    label_hits = _label_recovery(trials, truth)
    plan = make_fold_plan(dataset, config.folds, derive_seed(config.seed, "cv"), config.split)
    train_cfg = TrainConfig(
        batch_size=config.batch_size,
        epochs=config.train_epochs,
        learning_rate=config.learning_rate,
    )
    reports = {}
    for set_name, channels in (("selected", selected), ("all20", dataset.channels)):
        sliced = dataset.select_channels(channels)
        for model_name in models:
            mspec = spec_for(
                model_name, len(sliced.channels), sliced.x.shape[3], sliced.fs,
                seed=derive_seed(config.seed, "model", model_name),
            )
            report = evaluate_cv(mspec, sliced, plan, train_cfg, electrode_set=set_name)
            reports[(set_name, model_name)] = report
            if verbose:
                print(f"  {model_name} on {set_name}: "
                      f"top-1 {report.accuracy_top1:.4f}")
    return {
        "config": config,
        "truth": truth,
        "analysis": analysis,
        "selected": selected,
        "overlap": overlap,
        "label_recovery": label_hits,
        "dataset_epochs": dataset.n_epochs,
        "reports": reports,
    }


def _label_recovery(trials, truth) -> float:
    by_key = {}
    for (sid, ri), state in truth.states.items():
        by_key[(sid, ri)] = state
    # trials carry (task, difficulty); rebuild the round index by ordering
    hits, total = 0, 0
    grouped: dict[str, list] = {}
    for t in trials:
        grouped.setdefault(t.subject_id, []).append(t)
    for sid, ts in grouped.items():
        for ri, t in enumerate(ts):
            total += 1
            hits += by_key.get((sid, ri)) == t.state
    return hits / max(total, 1)
