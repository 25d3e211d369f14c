"""Artifact loading and schema validation.

The renderer is coupled only to the documented ``cogstate.*`` JSON
schemas; a mismatch names the pipeline command that produces the
expected artifact.
"""

from __future__ import annotations

import json
from pathlib import Path


class ArtifactError(ValueError):
    """Missing artifact or schema mismatch."""


# schema -> producing CLI command
PRODUCERS = {
    "cogstate.edges/v1": "cogstate connect",
    "cogstate.matrix/v1": "cogstate connect",
    "cogstate.psd/v1": "cogstate preprocess",
    "cogstate.curves/v1": "cogstate train",
    "cogstate.report/v1": "cogstate evaluate",
    "cogstate.montage/v1": "cogstate report",
    "cogstate.ranking/v1": "cogstate select",
}


def load_artifact(path: str | Path, expected_schema: str) -> dict:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(
            f"artifact {path} does not exist; produce it with "
            f"`{PRODUCERS.get(expected_schema, 'the cogstate pipeline')}`"
        )
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"artifact {path} is not valid JSON: {exc}") from None
    schema = payload.get("schema")
    if schema != expected_schema:
        raise ArtifactError(
            f"artifact {path} has schema {schema!r}, expected {expected_schema!r} "
            f"(produced by `{PRODUCERS.get(expected_schema, '?')}`)"
        )
    return payload
