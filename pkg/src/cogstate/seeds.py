"""Deterministic seed fan-out from one global seed via labeled derivation."""

from __future__ import annotations

import hashlib


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from a global seed and a label path."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
