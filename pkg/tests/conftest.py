import numpy as np
import pytest

from cogstate.montage import DEFAULT_MONTAGE
from cogstate.recording import Recording, TaskRound


@pytest.fixture
def montage():
    return DEFAULT_MONTAGE


def make_recording(
    samples: np.ndarray,
    fs: float = 500.0,
    rounds: tuple[TaskRound, ...] = (),
    subject_id: str = "S00",
    gender: str = "male",
    channels: tuple[str, ...] | None = None,
) -> Recording:
    if channels is None:
        channels = DEFAULT_MONTAGE.names[: samples.shape[0]]
    return Recording(
        subject_id=subject_id,
        gender=gender,
        sampling_rate=fs,
        channels=channels,
        samples=samples,
        annotations=rounds,
    )


@pytest.fixture
def sine_recording():
    """20-channel 10 s recording: per-channel sines at distinct frequencies."""
    fs = 500.0
    t = np.arange(int(10 * fs)) / fs
    rows = [np.sin(2 * np.pi * (5 + i) * t) * (10 + i) for i in range(20)]
    rounds = (TaskRound("nback", 1, 0.0, 10.0, 0.8, 0.4),)
    return make_recording(np.vstack(rows), fs=fs, rounds=rounds)
