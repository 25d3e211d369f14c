"""Stamped artifact writing: plain files in a run directory.

Every JSON artifact carries a ``stamp`` (config hash + toolkit version)
unless stamping is disabled; stamps contain nothing time-dependent, so
re-runs with identical inputs are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

from .config import TOOLKIT_VERSION, PipelineConfig
from .errors import DataFormatError


def stamp_of(config: PipelineConfig) -> dict:
    return {"config_hash": config.config_hash(), "toolkit_version": TOOLKIT_VERSION}


def write_json(path: str | Path, payload: dict, config: PipelineConfig) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if config.stamp:
        body["stamp"] = stamp_of(config)
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def write_text(path: str | Path, text: str, config: PipelineConfig, comment: str = "#") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if config.stamp:
        s = stamp_of(config)
        text = f"{comment} config_hash={s['config_hash']} toolkit_version={s['toolkit_version']}\n" + text
    path.write_text(text)


def read_json(path: str | Path, expected_schema: str, producer: str) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(
            f"artifact {path} does not exist; run `cogstate {producer}` first"
        )
    payload = json.loads(path.read_text())
    schema = payload.get("schema")
    if schema != expected_schema:
        raise DataFormatError(
            f"artifact {path} has schema {schema!r}, expected {expected_schema!r} "
            f"(produced by `cogstate {producer}`)"
        )
    return payload


def require(path: str | Path, producer: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise DataFormatError(
            f"artifact {path} does not exist; run `cogstate {producer}` first"
        )
    return path
