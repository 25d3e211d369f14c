"""Recordings, task-round annotations, epochs, and their on-disk formats.

A recording is stored as a CSV of samples (column ``t`` plus one column
per montage channel, microvolts) and a ``<name>.meta.json`` sidecar with
subject metadata and task-round annotations. Floats are written in
shortest round-trip form, so save -> load is bit-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError, DataFormatError
from .montage import Montage

TASKS = ("nback", "arithmetic", "graphic")
DIFFICULTIES = (1, 2, 3)
GENDERS = ("male", "female")


@dataclass(frozen=True)
class TaskRound:
    """One annotated task round with behavioural scores."""

    task: str
    difficulty: int
    start_s: float
    end_s: float
    performance: float
    nasa_tlx: float

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise DataFormatError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.difficulty not in DIFFICULTIES:
            raise DataFormatError(f"difficulty must be in {DIFFICULTIES}, got {self.difficulty}")
        if not self.start_s < self.end_s:
            raise DataFormatError(f"round must have start_s < end_s, got [{self.start_s}, {self.end_s}]")
        for name in ("performance", "nasa_tlx"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataFormatError(f"{name} must be in [0, 1], got {v}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Recording:
    """Channel-major multi-channel EEG time series with annotations.

    Immutable after construction; the sample array is marked read-only.
    """

    subject_id: str
    gender: str
    sampling_rate: float
    channels: tuple[str, ...]
    samples: np.ndarray  # shape (n_channels, n_samples), microvolts
    annotations: tuple[TaskRound, ...] = ()
    pipeline_stage: str | None = None

    def __post_init__(self) -> None:
        if self.gender not in GENDERS:
            raise DataFormatError(f"gender must be one of {GENDERS}, got {self.gender!r}")
        if not self.sampling_rate > 0:
            raise DataFormatError(f"sampling_rate must be > 0, got {self.sampling_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise DataFormatError(f"samples must be 2-D (channels, time), got shape {samples.shape}")
        if samples.shape[0] != len(self.channels):
            raise DataFormatError(
                f"{len(self.channels)} channel names but {samples.shape[0]} sample rows"
            )
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        duration = self.duration_s
        last_end = -math.inf
        for rnd in sorted(self.annotations, key=lambda r: r.start_s):
            if rnd.start_s < 0 or rnd.end_s > duration + 1e-9:
                raise DataFormatError(
                    f"round [{rnd.start_s}, {rnd.end_s}] s lies outside the recording "
                    f"(duration {duration:.6g} s)"
                )
            if rnd.start_s < last_end - 1e-12:
                raise DataFormatError(
                    f"round starting at {rnd.start_s} s overlaps the previous round"
                )
            last_end = rnd.end_s

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sampling_rate

    def channel(self, name: str) -> np.ndarray:
        try:
            idx = self.channels.index(name)
        except ValueError:
            raise ConfigError(f"recording has no channel {name!r}") from None
        return self.samples[idx]

    def with_samples(self, samples: np.ndarray, pipeline_stage: str | None = None) -> "Recording":
        """Copy of this recording with replaced sample data."""
        return replace(
            self,
            samples=np.array(samples, dtype=np.float64),
            pipeline_stage=pipeline_stage if pipeline_stage is not None else self.pipeline_stage,
        )

    def select_channels(self, names: list[str] | tuple[str, ...]) -> "Recording":
        """Copy restricted to the given channels, in the given order."""
        rows = [self.channels.index(n) if n in self.channels else -1 for n in names]
        for n, r in zip(names, rows):
            if r < 0:
                raise ConfigError(f"recording has no channel {n!r}")
        return replace(self, channels=tuple(names), samples=self.samples[rows].copy())

    def round_slice(self, rnd: TaskRound) -> np.ndarray:
        """Sample block covered by a task round (channels, time)."""
        a = int(round(rnd.start_s * self.sampling_rate))
        b = int(round(rnd.end_s * self.sampling_rate))
        return self.samples[:, a:b]


@dataclass(frozen=True)
class Epoch:
    """Fixed-length window cut from a single task round."""

    subject_id: str
    round_index: int
    round: TaskRound
    channels: tuple[str, ...]
    samples: np.ndarray  # shape (n_channels, window_samples)
    start_s: float
    label: str | None = None

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)


def epoch_recording(rec: Recording, window_s: float, overlap: float) -> list[Epoch]:
    """Cut fixed-length windows from every task round.

    Stride is ``window * (1 - overlap)``; partial tail windows are
    discarded and no epoch straddles a round boundary.
    """
    if not 0.0 <= overlap < 1.0:
        raise ConfigError(f"overlap must be in [0, 1), got {overlap}")
    window = int(round(window_s * rec.sampling_rate))
    if window < 2:
        raise ConfigError(f"window of {window_s} s gives {window} samples; need at least 2")
    stride = max(1, int(round(window * (1.0 - overlap))))
    epochs: list[Epoch] = []
    for round_index, rnd in enumerate(rec.annotations):
        start_idx = int(round(rnd.start_s * rec.sampling_rate))
        end_idx = int(round(rnd.end_s * rec.sampling_rate))
        length = end_idx - start_idx
        if window > length:
            raise ConfigError(
                f"window {window_s} s ({window} samples) is longer than round "
                f"{rnd.task}/difficulty {rnd.difficulty} ({length} samples)"
            )
        n_epochs = (length - window) // stride + 1
        for j in range(n_epochs):
            a = start_idx + j * stride
            epochs.append(
                Epoch(
                    subject_id=rec.subject_id,
                    round_index=round_index,
                    round=rnd,
                    channels=rec.channels,
                    samples=rec.samples[:, a : a + window],
                    start_s=a / rec.sampling_rate,
                )
            )
    return epochs


def _meta_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + ".meta.json")


def save_recording(rec: Recording, path: str | Path) -> None:
    """Write CSV + ``.meta.json`` sidecar. Floats keep full precision."""
    path = Path(path)
    t = np.arange(rec.n_samples, dtype=np.float64) / rec.sampling_rate
    frame = pd.DataFrame({"t": t})
    for i, name in enumerate(rec.channels):
        frame[name] = rec.samples[i]
    frame.to_csv(path, index=False)
    meta: dict = {
        "subject_id": rec.subject_id,
        "gender": rec.gender,
        "sampling_rate_hz": rec.sampling_rate,
        "rounds": [
            {
                "task": r.task,
                "difficulty": r.difficulty,
                "start_s": r.start_s,
                "end_s": r.end_s,
                "performance": r.performance,
                "nasa_tlx": r.nasa_tlx,
            }
            for r in rec.annotations
        ],
    }
    if rec.pipeline_stage is not None:
        meta["pipeline_stage"] = rec.pipeline_stage
    _meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _locate_bad_cell(path: Path, columns: list[str]) -> tuple[int, str]:
    """Find the first non-numeric cell (1-based data row, column name)."""
    with open(path) as fh:
        fh.readline()
        for row_no, line in enumerate(fh, start=1):
            for col_name, cell in zip(columns, line.rstrip("\n").split(",")):
                try:
                    float(cell)
                except ValueError:
                    return row_no, col_name
    return -1, "?"


def load_recording(path: str | Path, montage: Montage) -> Recording:
    """Parse a recording CSV + sidecar, validating against the montage."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"recording file {path} does not exist")
    meta_path = _meta_path(path)
    if not meta_path.exists():
        raise DataFormatError(f"sidecar {meta_path} does not exist")

    header = pd.read_csv(path, nrows=0).columns.tolist()
    if not header or header[0] != "t":
        raise DataFormatError(f"first CSV column must be 't', got {header[:1]}")
    for name in montage.names:
        if name not in header:
            raise DataFormatError(f"channel {name} absent from {path.name}")
    unknown = [c for c in header[1:] if c not in montage.names]
    if unknown:
        raise DataFormatError(f"unexpected columns {unknown} in {path.name}")

    try:
        frame = pd.read_csv(path, dtype=np.float64, float_precision="round_trip")
    except ValueError:
        row, col = _locate_bad_cell(path, header)
        raise DataFormatError(
            f"non-numeric sample at data row {row}, column {col!r} in {path.name}"
        ) from None

    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"sidecar {meta_path.name} is not valid JSON: {exc}") from None
    for key in ("subject_id", "gender", "sampling_rate_hz", "rounds"):
        if key not in meta:
            raise DataFormatError(f"sidecar {meta_path.name} missing field {key!r}")
    fs = float(meta["sampling_rate_hz"])
    if fs <= 0:
        raise DataFormatError(f"sampling_rate_hz must be > 0, got {fs}")

    t = frame["t"].to_numpy()
    if len(t) > 1:
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise DataFormatError(f"column 't' is not strictly increasing in {path.name}")
        if np.max(np.abs(dt - 1.0 / fs)) > 1e-6 / fs + 1e-9:
            raise DataFormatError(
                f"column 't' spacing deviates from 1/fs = {1.0 / fs:.6g} s in {path.name}"
            )

    samples = np.vstack([frame[name].to_numpy() for name in montage.names])
    rounds = tuple(
        TaskRound(
            task=r["task"],
            difficulty=int(r["difficulty"]),
            start_s=float(r["start_s"]),
            end_s=float(r["end_s"]),
            performance=float(r["performance"]),
            nasa_tlx=float(r["nasa_tlx"]),
        )
        for r in meta["rounds"]
    )
    return Recording(
        subject_id=str(meta["subject_id"]),
        gender=str(meta["gender"]),
        sampling_rate=fs,
        channels=montage.names,
        samples=samples,
        annotations=rounds,
        pipeline_stage=meta.get("pipeline_stage"),
    )
