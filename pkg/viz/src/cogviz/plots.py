"""Matplotlib renderers for the pipeline's JSON artifacts.

All figures use the Agg backend with fixed style parameters and contain
no randomness, so re-rendering identical inputs is pixel-identical.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import ArtifactError, load_artifact

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "svg.hashsalt": "cogviz",
    "axes.titlesize": 11,
}

POSITIVE_COLOR = "#c0392b"
NEGATIVE_COLOR = "#2c5f9e"


@dataclass(frozen=True)
class PlotJob:
    artifact: str
    kind: str
    out: str
    options: dict = field(default_factory=dict)


def _save(fig, out: str | Path) -> None:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() not in (".png", ".svg"):
        raise ArtifactError(f"output must be .png or .svg, got {out.suffix!r}")
    fig.savefig(out, metadata={"Date": None} if out.suffix == ".svg" else None)
    plt.close(fig)


def _edge_channels(payload: dict) -> list[str]:
    names: list[str] = []
    for e in payload["edges"]:
        for n in (e["a"], e["b"]):
            if n not in names:
                names.append(n)
    return names


def plot_chord(edges_path: str | Path, out: str | Path) -> None:
    """Circular chord-style diagram of weighted channel associations."""
    payload = load_artifact(edges_path, "cogstate.edges/v1")
    edges = payload["edges"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.set_aspect("equal")
        ax.axis("off")
        title = f"connectivity chord ({payload.get('kind', 'edges')})"
        ax.set_title(title)
        if not edges:
            warnings.warn("empty edge set; rendering an empty chord diagram")
            ax.text(0, 0, "no edges", ha="center", va="center")
            ax.set_xlim(-1.3, 1.3)
            ax.set_ylim(-1.3, 1.3)
            _save(fig, out)
            return
        names = _edge_channels(payload)
        angle = {
            n: 2.0 * np.pi * i / len(names) - np.pi / 2 for i, n in enumerate(names)
        }
        max_w = max(abs(e["weight"]) for e in edges) or 1.0
        for e in sorted(edges, key=lambda e: abs(e["weight"])):
            a, b = angle[e["a"]], angle[e["b"]]
            p0 = np.array([np.cos(a), np.sin(a)])
            p1 = np.array([np.cos(b), np.sin(b)])
            mid = (p0 + p1) * 0.25  # pull the arc toward the center
            ts = np.linspace(0.0, 1.0, 40)[:, None]
            curve = ((1 - ts) ** 2) * p0 + 2 * ts * (1 - ts) * mid + (ts**2) * p1
            w = abs(e["weight"]) / max_w
            color = POSITIVE_COLOR if e["weight"] > 0 else NEGATIVE_COLOR
            ax.plot(curve[:, 0], curve[:, 1], color=color, lw=0.5 + 3.0 * w,
                    alpha=0.35 + 0.6 * w, solid_capstyle="round", zorder=1)
        for n in names:
            x, y = np.cos(angle[n]), np.sin(angle[n])
            ax.scatter([x], [y], s=160, color="#f4f4f4", edgecolor="#333",
                       zorder=2)
            ax.text(x * 1.14, y * 1.14, n, ha="center", va="center", zorder=3)
        ax.set_xlim(-1.3, 1.3)
        ax.set_ylim(-1.3, 1.3)
        _save(fig, out)


def plot_heatmap(matrix_path: str | Path, out: str | Path) -> None:
    """Channel-by-channel matrix heatmap with symmetric color scale."""
    payload = load_artifact(matrix_path, "cogstate.matrix/v1")
    values = np.asarray(payload["values"], dtype=float)
    channels = payload["channels"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 6))
        vmax = np.max(np.abs(values)) or 1.0
        im = ax.imshow(values, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
        ax.set_xticks(range(len(channels)), channels, rotation=90)
        ax.set_yticks(range(len(channels)), channels)
        ax.set_title("functional connectivity")
        fig.colorbar(im, ax=ax, shrink=0.85)
        fig.tight_layout()
        _save(fig, out)


def plot_headmap(edges_path: str | Path, montage_path: str | Path, out: str | Path) -> None:
    """Edges drawn between electrode positions on a schematic head."""
    payload = load_artifact(edges_path, "cogstate.edges/v1")
    montage = load_artifact(montage_path, "cogstate.montage/v1")
    coords = {c["name"]: (c["x"], c["y"]) for c in montage["channels"]}
    edges = payload["edges"]
    unknown = [e["a"] for e in edges if e["a"] not in coords] + [
        e["b"] for e in edges if e["b"] not in coords
    ]
    if unknown:
        raise ArtifactError(f"edge channels missing from montage: {sorted(set(unknown))}")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 6.4))
        ax.set_aspect("equal")
        ax.axis("off")
        ax.set_title(f"head map ({payload.get('kind', 'edges')})")
        head = plt.Circle((0, 0), 1.0, fill=False, color="#333", lw=1.5)
        ax.add_patch(head)
        ax.plot([-0.1, 0.0, 0.1], [0.995, 1.1, 0.995], color="#333", lw=1.5)  # nose
        for side in (-1.0, 1.0):
            ax.plot([side * 1.0, side * 1.07, side * 1.0], [0.12, 0.0, -0.12],
                    color="#333", lw=1.5)
        if not edges:
            warnings.warn("empty edge set; rendering electrodes only")
        else:
            max_w = max(abs(e["weight"]) for e in edges) or 1.0
            for e in sorted(edges, key=lambda e: abs(e["weight"])):
                (x0, y0), (x1, y1) = coords[e["a"]], coords[e["b"]]
                w = abs(e["weight"]) / max_w
                color = POSITIVE_COLOR if e["weight"] > 0 else NEGATIVE_COLOR
                ax.plot([x0, x1], [y0, y1], color=color, lw=0.5 + 3.5 * w,
                        alpha=0.4 + 0.55 * w, zorder=1)
        for name, (x, y) in coords.items():
            ax.scatter([x], [y], s=120, color="#fafafa", edgecolor="#444", zorder=2)
            ax.text(x, y, name, ha="center", va="center", fontsize=6.5, zorder=3)
        ax.set_xlim(-1.25, 1.25)
        ax.set_ylim(-1.25, 1.3)
        _save(fig, out)


def plot_psd(psd_path: str | Path, out: str | Path) -> None:
    """Per-channel power spectral density on a log power axis."""
    payload = load_artifact(psd_path, "cogstate.psd/v1")
    freqs = np.asarray(payload["freqs_hz"], dtype=float)
    power = np.asarray(payload["psd"], dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        cmap = plt.get_cmap("viridis")
        n = max(len(payload["channels"]), 1)
        for i, name in enumerate(payload["channels"]):
            ax.semilogy(freqs, np.maximum(power[i], 1e-12), lw=0.9,
                        color=cmap(i / max(n - 1, 1)), label=name)
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("power (uV^2/Hz)")
        ax.set_title("power spectral density")
        ax.set_xlim(0, min(60.0, float(freqs[-1])))
        ax.legend(ncol=4, fontsize=6, loc="upper right")
        fig.tight_layout()
        _save(fig, out)


def plot_curves(curves_path: str | Path, out: str | Path) -> None:
    """Training loss and accuracy per epoch (validation if present)."""
    payload = load_artifact(curves_path, "cogstate.curves/v1")
    rows = payload["curves"]
    epochs = [r["epoch"] for r in rows]
    with plt.rc_context(STYLE):
        fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.8))
        ax_loss.plot(epochs, [r["train_loss"] for r in rows], label="train", color="#2c5f9e")
        if rows and rows[0].get("val_loss") is not None:
            ax_loss.plot(epochs, [r["val_loss"] for r in rows], label="validation",
                         color="#c0392b")
        ax_loss.set_xlabel("epoch")
        ax_loss.set_ylabel("cross-entropy loss")
        ax_loss.legend()
        ax_acc.plot(epochs, [r["train_acc"] for r in rows], label="train", color="#2c5f9e")
        if rows and rows[0].get("val_acc") is not None:
            ax_acc.plot(epochs, [r["val_acc"] for r in rows], label="validation",
                        color="#c0392b")
        ax_acc.set_xlabel("epoch")
        ax_acc.set_ylabel("accuracy")
        ax_acc.set_ylim(0, 1.02)
        ax_acc.legend()
        fig.suptitle(f"training curves ({payload.get('model', '?')})")
        fig.tight_layout()
        _save(fig, out)


def plot_boxplot(report_paths: list[str | Path], out: str | Path) -> None:
    """Across folds: one box per (report, metric)."""
    if not report_paths:
        raise ArtifactError("at least one evaluation report is required")
    reports = [load_artifact(p, "cogstate.report/v1") for p in report_paths]
    metric_names = ("accuracy", "precision", "recall", "specificity", "npv", "f1")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(7, 1.9 * len(metric_names)), 4.5))
        width = 0.8 / len(reports)
        cmap = plt.get_cmap("tab10")
        for ri, rep in enumerate(reports):
            data = [
                [fold["metrics"][m] for fold in rep["folds"]] for m in metric_names
            ]
            positions = [i + (ri - (len(reports) - 1) / 2) * width for i in range(len(metric_names))]
            box = ax.boxplot(data, positions=positions, widths=width * 0.85,
                             patch_artist=True)
            for patch in box["boxes"]:
                patch.set_facecolor(cmap(ri % 10))
                patch.set_alpha(0.6)
            label = f"{rep.get('model', '?')}/{rep.get('electrode_set', '?')}"
            ax.plot([], [], color=cmap(ri % 10), lw=6, alpha=0.6, label=label)
        ax.set_xticks(range(len(metric_names)), metric_names)
        ax.set_ylabel("score")
        ax.set_ylim(0, 1.05)
        ax.set_title("cross-validation metrics per fold")
        ax.legend(fontsize=7)
        fig.tight_layout()
        _save(fig, out)
