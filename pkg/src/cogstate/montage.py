"""The 20-lead electrode montage.

Channel names follow the 10-20 convention: the letter prefix encodes the
lobe, the trailing digit's parity encodes the hemisphere (odd = left,
even = right), and a trailing 'z' marks the midline. Each channel carries
a fixed 2-D head-plane coordinate (unit-circle projection, nose up) used
for neighbor derivation and plotting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

CHANNEL_NAMES: tuple[str, ...] = (
    "Fp1", "Fpz", "Fp2",
    "F7", "F3", "Fz", "F4", "F8",
    "T7", "C3", "Cz", "C4", "T8",
    "P7", "P3", "Pz", "P4", "P8",
    "O1", "O2",
)

# Schematic flat-head coordinates (x: left -> right, y: back -> nose).
CHANNEL_COORDS: dict[str, tuple[float, float]] = {
    "Fp1": (-0.28, 0.72), "Fpz": (0.00, 0.78), "Fp2": (0.28, 0.72),
    "F7": (-0.80, 0.40), "F3": (-0.40, 0.40), "Fz": (0.00, 0.40),
    "F4": (0.40, 0.40), "F8": (0.80, 0.40),
    "T7": (-0.88, 0.00), "C3": (-0.44, 0.00), "Cz": (0.00, 0.00),
    "C4": (0.44, 0.00), "T8": (0.88, 0.00),
    "P7": (-0.80, -0.40), "P3": (-0.40, -0.40), "Pz": (0.00, -0.40),
    "P4": (0.40, -0.40), "P8": (0.80, -0.40),
    "O1": (-0.28, -0.72), "O2": (0.28, -0.72),
}

# Two channels are neighbors iff their coordinate distance is at most this.
NEIGHBOR_DISTANCE = 0.45

_LOBE_PREFIXES = (
    ("Fp", "prefrontal"),
    ("F", "frontal"),
    ("T", "temporal"),
    ("C", "central"),
    ("P", "parietal"),
    ("O", "occipital"),
)


def hemisphere_of(name: str) -> str:
    """Hemisphere from the name suffix: odd digit left, even right, 'z' midline."""
    tail = name[-1]
    if tail in ("z", "Z"):
        return "midline"
    if not tail.isdigit():
        raise ConfigError(f"channel name {name!r} has no digit or 'z' suffix")
    return "left" if int(tail) % 2 == 1 else "right"


def lobe_of(name: str) -> str:
    """Lobe from the letter prefix (Fp checked before F)."""
    for prefix, lobe in _LOBE_PREFIXES:
        if name.startswith(prefix):
            return lobe
    raise ConfigError(f"channel name {name!r} has an unknown lobe prefix")


@dataclass(frozen=True)
class Channel:
    name: str
    x: float
    y: float
    hemisphere: str
    lobe: str


@dataclass(frozen=True)
class Montage:
    """Ordered set of 20 electrode descriptors with symmetric neighbor lists."""

    channels: tuple[Channel, ...]
    neighbors: dict[str, tuple[str, ...]]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(ch.name for ch in self.channels)

    @property
    def size(self) -> int:
        return len(self.channels)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigError(f"unknown channel {name!r}") from None

    def coordinates(self) -> dict[str, tuple[float, float]]:
        return {ch.name: (ch.x, ch.y) for ch in self.channels}


def build_montage() -> Montage:
    """Construct the fixed 20-lead montage.

    Deterministic: names, coordinates, and the neighbor threshold are
    constants, so every call returns an identical montage.
    """
    channels = tuple(
        Channel(
            name=name,
            x=CHANNEL_COORDS[name][0],
            y=CHANNEL_COORDS[name][1],
            hemisphere=hemisphere_of(name),
            lobe=lobe_of(name),
        )
        for name in CHANNEL_NAMES
    )
    neighbors: dict[str, tuple[str, ...]] = {}
    for ch in channels:
        near = []
        for other in channels:
            if other.name == ch.name:
                continue
            if math.dist((ch.x, ch.y), (other.x, other.y)) <= NEIGHBOR_DISTANCE:
                near.append(other.name)
        neighbors[ch.name] = tuple(near)
    return Montage(channels=channels, neighbors=neighbors)


DEFAULT_MONTAGE = build_montage()
