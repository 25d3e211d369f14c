"""EEG functional-connectivity toolkit for cognitive-state evaluation.

Pipeline stages: synthetic cohort generation, signal cleaning (corruption
repair, filtering, baseline, ICA), five-band spectral analysis, Pearson
connectivity networks with electrode selection, quartile labeling, and
multi-class classification (MLP / EEGNet / attention-augmented EEGNet)
under stratified cross-validation.
"""

from .config import TOOLKIT_VERSION, PipelineConfig
from .montage import DEFAULT_MONTAGE, Montage, build_montage
from .recording import Epoch, Recording, TaskRound, epoch_recording, load_recording, save_recording

__version__ = TOOLKIT_VERSION

__all__ = [
    "DEFAULT_MONTAGE",
    "Epoch",
    "Montage",
    "PipelineConfig",
    "Recording",
    "TaskRound",
    "TOOLKIT_VERSION",
    "build_montage",
    "epoch_recording",
    "load_recording",
    "save_recording",
]
