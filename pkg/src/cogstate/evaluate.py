"""Stratified k-fold cross-validation and the six-metric evaluation.

Multi-class results are reduced one-vs-rest: each class yields binary
TP/FP/FN/TN counts, the six metrics are computed per class and
macro-averaged, then averaged over folds. Plain top-1 accuracy is also
reported separately as ``accuracy_top1``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .labeling import STATES
from .nn.model import ModelSpec, build_model, spec_for
from .nn.train import TrainConfig, accuracy_of, predict_probs, train
from .seeds import derive_seed

METRIC_NAMES = ("accuracy", "precision", "recall", "specificity", "npv", "f1")


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint train/test index pairs forming a partition of the dataset."""

    k: int
    seed: int
    split: str
    folds: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        covered: set[int] = set()
        total = 0
        for train_idx, test_idx in self.folds:
            if set(train_idx) & set(test_idx):
                raise ConfigError("fold has overlapping train and test indices")
            total += len(test_idx)
            covered.update(test_idx)
        if len(covered) != total:
            raise ConfigError("test sets are not pairwise disjoint")


def stratified_folds(labels: list | np.ndarray, k: int, seed: int) -> FoldPlan:
    """Within-class shuffle, then round-robin assignment to k folds."""
    labels = list(labels)
    if k < 2:
        raise ConfigError(f"need k >= 2 folds (k=1 leaves no train split), got {k}")
    rng = np.random.default_rng([seed, 11])
    test_sets: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(str(l) for l in labels)):
        members = [i for i, l in enumerate(labels) if str(l) == cls]
        if len(members) < k:
            raise ConfigError(f"class {cls!r} has {len(members)} members; needs at least k={k}")
        members = [members[j] for j in rng.permutation(len(members))]
        for pos, idx in enumerate(members):
            test_sets[pos % k].append(idx)
    all_idx = set(range(len(labels)))
    folds = tuple(
        (tuple(sorted(all_idx - set(test))), tuple(sorted(test))) for test in test_sets
    )
    return FoldPlan(k=k, seed=seed, split="epoch", folds=folds)


def stratified_subject_folds(
    subject_ids: list[str], labels: list | np.ndarray, k: int, seed: int
) -> FoldPlan:
    """Subject-granular folds: all epochs of a subject stay together.

    Subjects are characterized by their majority class, shuffled within
    class, and dealt round-robin, approximating stratification at the
    subject level.
    """
    if len(subject_ids) != len(labels):
        raise ConfigError("subject_ids and labels differ in length")
    if k < 2:
        raise ConfigError(f"need k >= 2 folds, got {k}")
    subjects = sorted(set(subject_ids))
    if len(subjects) < k:
        raise ConfigError(f"{len(subjects)} subjects cannot fill k={k} folds")
    majority: dict[str, str] = {}
    for subj in subjects:
        counts: dict[str, int] = {}
        for sid, lab in zip(subject_ids, labels):
            if sid == subj:
                counts[str(lab)] = counts.get(str(lab), 0) + 1
        majority[subj] = max(sorted(counts), key=lambda c: counts[c])
    rng = np.random.default_rng([seed, 13])
    fold_subjects: list[list[str]] = [[] for _ in range(k)]
    pos = 0
    for cls in sorted(set(majority.values())):
        members = [s for s in subjects if majority[s] == cls]
        members = [members[j] for j in rng.permutation(len(members))]
        for subj in members:
            fold_subjects[pos % k].append(subj)
            pos += 1
    by_subject: dict[str, list[int]] = {s: [] for s in subjects}
    for i, sid in enumerate(subject_ids):
        by_subject[sid].append(i)
    folds = []
    all_idx = set(range(len(subject_ids)))
    for group in fold_subjects:
        test = sorted(i for s in group for i in by_subject[s])
        folds.append((tuple(sorted(all_idx - set(test))), tuple(test)))
    return FoldPlan(k=k, seed=seed, split="subject", folds=tuple(folds))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with true classes as rows and predictions as columns."""

    counts: np.ndarray
    labels: tuple[str, ...] = STATES

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        n = len(self.labels)
        if c.shape != (n, n):
            raise ConfigError(f"confusion matrix shape {c.shape} does not match {n} labels")
        if np.any(c < 0):
            raise ConfigError("confusion matrix counts must be non-negative")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @staticmethod
    def from_predictions(
        y_true: np.ndarray, y_pred: np.ndarray, labels: tuple[str, ...] = STATES
    ) -> "ConfusionMatrix":
        n = len(labels)
        counts = np.zeros((n, n), dtype=np.int64)
        for t, p in zip(np.asarray(y_true), np.asarray(y_pred)):
            counts[int(t), int(p)] += 1
        return ConfusionMatrix(counts=counts, labels=labels)

    def ovr_counts(self, positive: int) -> tuple[int, int, int, int]:
        """One-vs-rest (TP, FP, FN, TN) for a class index."""
        c = self.counts
        tp = int(c[positive, positive])
        fp = int(c[:, positive].sum() - tp)
        fn = int(c[positive, :].sum() - tp)
        tn = int(c.sum() - tp - fp - fn)
        return tp, fp, fn, tn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    specificity: float
    npv: float
    f1: float
    degenerate: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> MetricSet:
    """The six binary metrics; division-by-zero cells yield 0 with a flag."""
    flags: list[str] = []

    def safe(num: float, den: float, name: str) -> float:
        if den == 0:
            flags.append(name)
            return 0.0
        return num / den

    accuracy = safe(tp + tn, tp + tn + fp + fn, "accuracy")
    precision = safe(tp, tp + fp, "precision")
    recall = safe(tp, tp + fn, "recall")
    specificity = safe(tn, tn + fp, "specificity")
    npv = safe(tn, tn + fn, "npv")
    f1 = safe(2.0 * precision * recall, precision + recall, "f1")
    return MetricSet(accuracy, precision, recall, specificity, npv, f1, tuple(flags))


def binary_metrics(cm: ConfusionMatrix, positive_class: int | str) -> MetricSet:
    """One-vs-rest reduction of a multi-class confusion matrix."""
    if cm.total == 0:
        raise ConfigError("confusion matrix is empty")
    if isinstance(positive_class, str):
        try:
            positive_class = cm.labels.index(positive_class)
        except ValueError:
            raise ConfigError(f"unknown class {positive_class!r}") from None
    if not 0 <= positive_class < len(cm.labels):
        raise ConfigError(f"class index {positive_class} out of range")
    return metrics_from_counts(*cm.ovr_counts(positive_class))


def macro_metrics(cm: ConfusionMatrix) -> MetricSet:
    """Per-class one-vs-rest metrics averaged over all classes."""
    per_class = [binary_metrics(cm, i) for i in range(len(cm.labels))]
    flags = tuple(
        f"{name}[{cm.labels[i]}]"
        for i, m in enumerate(per_class)
        for name in m.degenerate
    )
    values = {
        name: float(np.mean([getattr(m, name) for m in per_class])) for name in METRIC_NAMES
    }
    return MetricSet(degenerate=flags, **values)


@dataclass(frozen=True)
class FoldOutcome:
    fold: int
    confusion: ConfusionMatrix
    metrics: MetricSet
    accuracy_top1: float
    n_test: int


@dataclass(frozen=True)
class EvaluationReport:
    model: str
    electrode_set: str
    plan_split: str
    k: int
    seed: int
    folds: tuple[FoldOutcome, ...]
    aggregate: MetricSet
    accuracy_top1: float

    def payload(self) -> dict:
        return {
            "schema": "cogstate.report/v1",
            "model": self.model,
            "electrode_set": self.electrode_set,
            "plan_split": self.plan_split,
            "k": self.k,
            "seed": self.seed,
            "aggregate": {**self.aggregate.as_dict(), "accuracy_top1": self.accuracy_top1},
            "degenerate": list(self.aggregate.degenerate),
            "folds": [
                {
                    "fold": f.fold,
                    "confusion": f.confusion.counts.tolist(),
                    "labels": list(f.confusion.labels),
                    "metrics": f.metrics.as_dict(),
                    "accuracy_top1": f.accuracy_top1,
                    "n_test": f.n_test,
                }
                for f in self.folds
            ],
        }


def aggregate_fold_metrics(per_fold: list[MetricSet]) -> MetricSet:
    """Mean over folds for the first five metrics; F1 recombined from the
    averaged precision and recall."""
    means = {
        name: float(np.mean([getattr(m, name) for m in per_fold]))
        for name in ("accuracy", "precision", "recall", "specificity", "npv")
    }
    p, r = means["precision"], means["recall"]
    f1 = 0.0 if p + r == 0 else 2.0 * p * r / (p + r)
    flags = tuple(sorted({f"fold{i}:{name}" for i, m in enumerate(per_fold) for name in m.degenerate}))
    return MetricSet(f1=f1, degenerate=flags, **means)


@dataclass(frozen=True)
class EpochDataset:
    """Classifier-ready epochs: (N, 1, C, W) inputs with integer labels."""

    x: np.ndarray
    y: np.ndarray
    subject_ids: tuple[str, ...]
    channels: tuple[str, ...]
    fs: float
    labels: tuple[str, ...] = STATES

    def __post_init__(self) -> None:
        if self.x.ndim != 4 or self.x.shape[1] != 1:
            raise ConfigError(f"dataset x must be (N, 1, C, W), got {self.x.shape}")
        if self.x.shape[2] != len(self.channels):
            raise ConfigError("channel axis does not match channel names")
        if self.y.shape != (self.x.shape[0],) or len(self.subject_ids) != self.x.shape[0]:
            raise ConfigError("labels/subjects do not match epoch count")

    @property
    def n_epochs(self) -> int:
        return self.x.shape[0]

    def select_channels(self, names: tuple[str, ...] | list[str]) -> "EpochDataset":
        rows = []
        for n in names:
            if n not in self.channels:
                raise ConfigError(f"unknown channel {n!r}")
            rows.append(self.channels.index(n))
        return replace(self, x=self.x[:, :, rows, :], channels=tuple(names))

    def state_names(self) -> list[str]:
        return [self.labels[int(i)] for i in self.y]


def make_fold_plan(dataset: EpochDataset, k: int, seed: int, split: str) -> FoldPlan:
    if split == "epoch":
        return stratified_folds(dataset.state_names(), k, seed)
    if split == "subject":
        return stratified_subject_folds(list(dataset.subject_ids), dataset.state_names(), k, seed)
    raise ConfigError(f"split must be 'epoch' or 'subject', got {split!r}")


def evaluate_cv(
    model_spec: ModelSpec,
    dataset: EpochDataset,
    plan: FoldPlan,
    train_config: TrainConfig,
    electrode_set: str = "all",
) -> EvaluationReport:
    """Train and score the model on every fold of the plan.

    Each fold builds a fresh model and trains with RNG streams derived
    from (seed, fold index), so parallel or re-ordered fold execution
    reproduces the identical report.
    """
    n_total = sum(len(test) for _, test in plan.folds)
    if n_total != dataset.n_epochs:
        raise ConfigError(
            f"fold plan covers {n_total} samples but dataset has {dataset.n_epochs}"
        )
    outcomes = []
    for fold_idx, (train_idx, test_idx) in enumerate(plan.folds):
        fold_seed = derive_seed(plan.seed, "fold", fold_idx)
        spec = replace(model_spec, seed=derive_seed(fold_seed, "init"))
        model = build_model(spec)
        cfg = replace(train_config, seed=derive_seed(fold_seed, "train"))
        train(model, dataset.x[list(train_idx)], dataset.y[list(train_idx)], cfg)
        probs = predict_probs(model, dataset.x[list(test_idx)])
        y_test = dataset.y[list(test_idx)]
        cm = ConfusionMatrix.from_predictions(y_test, probs.argmax(axis=1), dataset.labels)
        outcomes.append(
            FoldOutcome(
                fold=fold_idx,
                confusion=cm,
                metrics=macro_metrics(cm),
                accuracy_top1=accuracy_of(probs, y_test),
                n_test=len(test_idx),
            )
        )
    return EvaluationReport(
        model=model_spec.name,
        electrode_set=electrode_set,
        plan_split=plan.split,
        k=plan.k,
        seed=plan.seed,
        folds=tuple(outcomes),
        aggregate=aggregate_fold_metrics([o.metrics for o in outcomes]),
        accuracy_top1=float(np.mean([o.accuracy_top1 for o in outcomes])),
    )


def compare_electrode_sets(
    dataset: EpochDataset,
    electrode_sets: dict[str, tuple[str, ...]],
    models: list[str],
    plan: FoldPlan,
    train_config: TrainConfig,
) -> list[EvaluationReport]:
    """Model x electrode-set grid sharing one fold plan.

    Because the plan, fold seeds, and model seeds do not depend on the
    electrode-set name, identical channel subsets give identical reports.
    """
    reports = []
    for set_name, channels in electrode_sets.items():
        sliced = dataset.select_channels(channels)
        for model_name in models:
            spec = spec_for(
                model_name,
                len(sliced.channels),
                sliced.x.shape[3],
                sliced.fs,
                seed=derive_seed(plan.seed, "model", model_name),
            )
            reports.append(
                evaluate_cv(spec, sliced, plan, train_config, electrode_set=set_name)
            )
    return reports


def comparison_csv(reports: list[EvaluationReport]) -> str:
    """Grid summary: one row per (electrode set, model) with the six metrics."""
    lines = ["electrode_set,model,accuracy,precision,recall,specificity,npv,f1,accuracy_top1"]
    for r in reports:
        m = r.aggregate
        lines.append(
            f"{r.electrode_set},{r.model},{m.accuracy!r},{m.precision!r},{m.recall!r},"
            f"{m.specificity!r},{m.npv!r},{m.f1!r},{r.accuracy_top1!r}"
        )
    return "\n".join(lines) + "\n"
