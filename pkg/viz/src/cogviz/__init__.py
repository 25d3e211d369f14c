"""Figure rendering for cogstate pipeline artifacts."""

from .plots import (
    PlotJob,
    plot_boxplot,
    plot_chord,
    plot_curves,
    plot_headmap,
    plot_heatmap,
    plot_psd,
)
from .schemas import ArtifactError, load_artifact

__all__ = [
    "ArtifactError",
    "PlotJob",
    "load_artifact",
    "plot_boxplot",
    "plot_chord",
    "plot_curves",
    "plot_headmap",
    "plot_heatmap",
    "plot_psd",
]
