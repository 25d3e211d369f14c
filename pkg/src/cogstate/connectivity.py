"""Pearson functional-connectivity matrices, aggregation, and ranking.

Channel pairs are canonicalized to lexicographic name order and every
sort breaks ties on the pair names, so results are deterministic across
runs regardless of input ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UndefinedCorrelationError
from .recording import Recording

# Reduced 8-electrode preset (left-frontal dominant), exposed on the CLI
# as ``paper8``.
REDUCED_SET_8: tuple[str, ...] = ("Fp1", "Fpz", "Fp2", "F7", "F3", "Fz", "T7", "P7")


def pcc(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation coefficient of two equal-length signals."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ConfigError(f"pcc needs two equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ConfigError("pcc needs at least 2 samples")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("correlation with a constant signal is undefined")
    xc = x - x.mean()
    yc = y - y.mean()
    den = np.sqrt((xc @ xc) * (yc @ yc))
    if den == 0.0:
        raise UndefinedCorrelationError("correlation with a constant signal is undefined")
    return float(np.clip((xc @ yc) / den, -1.0, 1.0))


@dataclass(frozen=True)
class Provenance:
    subject_id: str | None = None
    task: str | None = None
    difficulty: int | None = None
    band: str = "broadband"

    def as_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "task": self.task,
            "difficulty": self.difficulty,
            "band": self.band,
        }


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Symmetric C x C correlation matrix with exact unit diagonal."""

    channels: tuple[str, ...]
    values: np.ndarray
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        c = len(self.channels)
        if v.shape != (c, c):
            raise ConfigError(f"values shape {v.shape} does not match {c} channels")
        if not np.array_equal(v, v.T):
            raise ConfigError("connectivity matrix must be exactly symmetric")
        if not np.all(np.diag(v) == 1.0):
            raise ConfigError("connectivity matrix diagonal must be exactly 1")
        if np.any(np.abs(v) > 1.0):
            raise ConfigError("connectivity entries must lie in [-1, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def connectivity_matrix(
    data: np.ndarray,
    channels: tuple[str, ...] | None = None,
    provenance: Provenance | None = None,
) -> ConnectivityMatrix:
    """All-pairs Pearson correlation of a channel-major sample block."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ConfigError(f"need a 2-D (channels, time >= 2) block, got shape {data.shape}")
    if channels is None:
        channels = tuple(f"ch{i}" for i in range(data.shape[0]))
    for name, row in zip(channels, data):
        if np.all(row == row[0]):
            raise UndefinedCorrelationError(f"channel {name} is constant; correlation undefined")
    centered = data - data.mean(axis=1, keepdims=True)
    gram = centered @ centered.T
    diag = np.diag(gram).copy()
    # sqrt of the product (not product of sqrts) keeps proportional channels
    # at exactly +-1; the gram matrix is exactly symmetric, so values are too.
    values = np.clip(gram / np.sqrt(np.outer(diag, diag)), -1.0, 1.0)
    np.fill_diagonal(values, 1.0)
    return ConnectivityMatrix(
        channels=channels,
        values=values,
        provenance=provenance if provenance is not None else Provenance(),
    )


def round_connectivity(rec: Recording, round_index: int, band: str = "broadband") -> ConnectivityMatrix:
    """Connectivity of one task round's full signal block."""
    rnd = rec.annotations[round_index]
    return connectivity_matrix(
        rec.round_slice(rnd),
        channels=rec.channels,
        provenance=Provenance(rec.subject_id, rnd.task, rnd.difficulty, band),
    )


@dataclass(frozen=True, order=True)
class Edge:
    a: str
    b: str
    weight: float

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ConfigError(f"self-edge on {self.a}")
        if self.a > self.b:
            raise ConfigError(f"edge pair ({self.a}, {self.b}) not in canonical name order")

    @property
    def sign(self) -> str:
        return "positive" if self.weight > 0 else "negative"


def _make_edge(a: str, b: str, weight: float) -> Edge:
    if a > b:
        a, b = b, a
    return Edge(a=a, b=b, weight=float(weight))


def _upper_edges(channels: tuple[str, ...], values: np.ndarray) -> list[Edge]:
    n = len(channels)
    return [
        _make_edge(channels[i], channels[j], values[i, j])
        for i in range(n)
        for j in range(i + 1, n)
    ]


@dataclass(frozen=True)
class EdgeSet:
    """Deduplicated weighted channel pairs, sorted deterministically."""

    edges: tuple[Edge, ...]
    kind: str = "edges"

    def __post_init__(self) -> None:
        pairs = [(e.a, e.b) for e in self.edges]
        if len(set(pairs)) != len(pairs):
            raise ConfigError("duplicate channel pair in edge set")

    def __len__(self) -> int:
        return len(self.edges)

    def channel_names(self) -> tuple[str, ...]:
        seen: list[str] = []
        for e in self.edges:
            for name in (e.a, e.b):
                if name not in seen:
                    seen.append(name)
        return tuple(seen)


@dataclass(frozen=True)
class EmbeddingEntry:
    subject_id: str
    task: str
    edges: tuple[Edge, ...]  # descending weight, ties on pair names


@dataclass(frozen=True)
class CorrelationEmbedding:
    """Per (subject, task): every channel pair sorted by correlation."""

    channels: tuple[str, ...]
    entries: tuple[EmbeddingEntry, ...]


def build_embedding(matrices: list[ConnectivityMatrix]) -> CorrelationEmbedding:
    """Sorted upper-triangle edge lists, one entry per (subject, task)."""
    if not matrices:
        raise ConfigError("no matrices to embed")
    channels = matrices[0].channels
    entries = []
    seen: set[tuple] = set()
    for m in matrices:
        if m.channels != channels:
            raise ConfigError("matrices do not share a channel set")
        key = (m.provenance.subject_id, m.provenance.task)
        if key in seen:
            raise ConfigError(
                f"multiple matrices for subject/task {key}; combine difficulties first"
            )
        seen.add(key)
        edges = sorted(
            _upper_edges(channels, m.values), key=lambda e: (-e.weight, e.a, e.b)
        )
        entries.append(
            EmbeddingEntry(
                subject_id=m.provenance.subject_id or "?",
                task=m.provenance.task or "?",
                edges=tuple(edges),
            )
        )
    return CorrelationEmbedding(channels=channels, entries=tuple(entries))


def difficulty_weights(mean_performance: list[float] | np.ndarray) -> np.ndarray:
    """Normalized weights proportional to mean performance per level."""
    p = np.asarray(mean_performance, dtype=np.float64)
    if p.size == 0:
        raise ConfigError("no performance values")
    if np.any(p <= 0):
        raise ConfigError(f"performance values must be > 0, got {p.tolist()}")
    return p / p.sum()


@dataclass(frozen=True)
class AggregateMatrix:
    """Entrywise (weighted) sum of connectivity matrices; not clamped."""

    channels: tuple[str, ...]
    values: np.ndarray
    mode: str
    n_inputs: int
    label: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def _pairwise_sum(arrays: list[np.ndarray]) -> np.ndarray:
    # Tree reduction: the documented, order-stable summation scheme.
    while len(arrays) > 1:
        nxt = [arrays[i] + arrays[i + 1] for i in range(0, len(arrays) - 1, 2)]
        if len(arrays) % 2 == 1:
            nxt.append(arrays[-1])
        arrays = nxt
    return arrays[0]


def aggregate(
    matrices: list[ConnectivityMatrix],
    mode: str = "overall_sum",
    weights: np.ndarray | list[float] | None = None,
    label: str = "",
) -> AggregateMatrix:
    """Entrywise sum (``overall_sum``) or weighted sum (``weighted``)."""
    if not matrices:
        raise ConfigError("cannot aggregate an empty matrix list")
    channels = matrices[0].channels
    for m in matrices:
        if m.channels != channels:
            raise ConfigError("matrices do not share a channel set")
    if mode == "overall_sum":
        if weights is not None:
            raise ConfigError("overall_sum mode takes no weights")
        values = _pairwise_sum([m.values.copy() for m in matrices])
    elif mode == "weighted":
        if weights is None:
            raise ConfigError("weighted mode requires weights")
        w = np.asarray(weights, dtype=np.float64)
        if w.size != len(matrices):
            raise ConfigError(f"{w.size} weights for {len(matrices)} matrices")
        values = _pairwise_sum([wi * m.values for wi, m in zip(w, matrices)])
    else:
        raise ConfigError(f"unknown aggregation mode {mode!r}")
    return AggregateMatrix(
        channels=channels, values=values, mode=mode, n_inputs=len(matrices), label=label
    )


def aggregate_by_gender(
    matrices: list[ConnectivityMatrix], gender_of: dict[str, str]
) -> dict[str, AggregateMatrix]:
    """Per-cohort sums keyed by gender ('male'/'female')."""
    groups: dict[str, list[ConnectivityMatrix]] = {}
    for m in matrices:
        sid = m.provenance.subject_id
        if sid not in gender_of:
            raise ConfigError(f"no gender recorded for subject {sid!r}")
        groups.setdefault(gender_of[sid], []).append(m)
    return {
        gender: aggregate(ms, mode="overall_sum", label=f"cohort:{gender}")
        for gender, ms in sorted(groups.items())
    }


def split_by_sign(agg: AggregateMatrix) -> tuple[EdgeSet, EdgeSet]:
    """Positive and negative edge sets, each sorted by |weight| descending."""
    edges = _upper_edges(agg.channels, agg.values)
    key = lambda e: (-abs(e.weight), e.a, e.b)
    pos = sorted((e for e in edges if e.weight > 0), key=key)
    neg = sorted((e for e in edges if e.weight < 0), key=key)
    return EdgeSet(tuple(pos), kind="positive"), EdgeSet(tuple(neg), kind="negative")


def top_k_edges(agg: AggregateMatrix, k: int) -> EdgeSet:
    """The k largest-valued edges (signed), ties on pair names."""
    edges = _upper_edges(agg.channels, agg.values)
    if not 1 <= k <= len(edges):
        raise ConfigError(f"k must be in [1, {len(edges)}], got {k}")
    ranked = sorted(edges, key=lambda e: (-e.weight, e.a, e.b))
    return EdgeSet(tuple(ranked[:k]), kind=f"top{k}")


@dataclass(frozen=True)
class ChannelScore:
    name: str
    score: float


def rank_channels(
    edges: EdgeSet, channels: tuple[str, ...] | None = None
) -> list[ChannelScore]:
    """Weighted degree centrality: sum of |weight| over incident edges.

    Channels from ``channels`` that touch no edge are appended with
    score 0; ties are broken by name.
    """
    if len(edges) == 0:
        raise ConfigError("cannot rank channels of an empty edge set")
    scores: dict[str, float] = {name: 0.0 for name in (channels or ())}
    for e in edges.edges:
        scores[e.a] = scores.get(e.a, 0.0) + abs(e.weight)
        scores[e.b] = scores.get(e.b, 0.0) + abs(e.weight)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [ChannelScore(name, score) for name, score in ranked]


def matrix_payload(channels: tuple[str, ...], values: np.ndarray, provenance: dict) -> dict:
    return {
        "schema": "cogstate.matrix/v1",
        "channels": list(channels),
        "values": np.asarray(values).tolist(),
        "provenance": provenance,
    }


def edges_payload(es: EdgeSet, label: str = "") -> dict:
    return {
        "schema": "cogstate.edges/v1",
        "kind": es.kind,
        "label": label,
        "edges": [{"a": e.a, "b": e.b, "weight": e.weight} for e in es.edges],
    }
