"""Pipeline configuration: one dataclass validated up front, hashed for
artifact stamping."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace

from .errors import ConfigError
from .preprocess import FILTER_PRESETS

TOOLKIT_VERSION = "0.1.0"

ELECTRODE_PRESET_NAMES = ("all20", "paper8")
MODEL_NAMES = ("mlp", "eegnet", "mha-eegnet")
SPLIT_MODES = ("subject", "epoch")
COHORT_NAMES = ("demo", "paper")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the pipeline; defaults give the desk-scale demo run."""

    seed: int = 0
    out_dir: str = "runs/default"
    cohort: str = "demo"
    demo_subjects: int = 4
    demo_round_s: float = 14.0
    demo_fs: float = 250.0

    filter_preset: str = "default"
    filter_order: int = 4
    amp_limit_uv: float = 100.0
    flat_window_s: float = 1.0
    baseline_ms: tuple[float, float] = (3000.0, 5000.0)
    ica_fit_stride: int = 4
    ica_max_iter: int = 200
    ica_tol: float = 1e-4
    reject_corr: float = 0.8
    invert_tlx: bool = True

    window_s: float = 2.0
    overlap: float = 0.5
    decimate: int = 2
    epochs_per_round: int | None = 3

    top_k: int = 20
    n_select: int = 8
    electrodes: str = "all20"

    model: str = "mha-eegnet"
    folds: int = 10
    split: str = "subject"
    train_epochs: int = 20
    batch_size: int = 10
    learning_rate: float = 1e-3

    stamp: bool = True

    def __post_init__(self) -> None:
        if self.cohort not in COHORT_NAMES:
            raise ConfigError(f"cohort must be one of {COHORT_NAMES}, got {self.cohort!r}")
        if self.filter_preset not in FILTER_PRESETS:
            raise ConfigError(
                f"filter preset must be one of {sorted(FILTER_PRESETS)}, got {self.filter_preset!r}"
            )
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"model must be one of {MODEL_NAMES}, got {self.model!r}")
        if self.split not in SPLIT_MODES:
            raise ConfigError(f"split must be one of {SPLIT_MODES}, got {self.split!r}")
        if not 0.0 <= self.overlap < 1.0:
            raise ConfigError(f"overlap must be in [0, 1), got {self.overlap}")
        if self.decimate < 1:
            raise ConfigError(f"decimate must be >= 1, got {self.decimate}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if not (self.electrodes in ELECTRODE_PRESET_NAMES or self.electrodes.startswith("topk:")):
            raise ConfigError(
                f"electrodes must be one of {ELECTRODE_PRESET_NAMES} or 'topk:<n>', "
                f"got {self.electrodes!r}"
            )
        if self.electrodes.startswith("topk:"):
            try:
                n = int(self.electrodes.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad electrode preset {self.electrodes!r}") from None
            if n < 1:
                raise ConfigError("topk electrode count must be >= 1")

    # ``out_dir`` and ``stamp`` affect where/how artifacts are written,
    # not what is computed; they stay out of the semantic hash.
    _NON_SEMANTIC = ("out_dir", "stamp")

    def semantic_dict(self) -> dict:
        d = asdict(self)
        for key in self._NON_SEMANTIC:
            d.pop(key)
        d["baseline_ms"] = list(self.baseline_ms)
        return d

    def config_hash(self) -> str:
        canonical = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        if "baseline_ms" in kwargs and isinstance(kwargs["baseline_ms"], list):
            kwargs["baseline_ms"] = tuple(kwargs["baseline_ms"])
        return replace(self, **kwargs)

    @staticmethod
    def from_dict(raw: dict) -> "PipelineConfig":
        known = set(PipelineConfig.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "baseline_ms" in raw and isinstance(raw["baseline_ms"], list):
            raw = {**raw, "baseline_ms": tuple(raw["baseline_ms"])}
        return PipelineConfig(**raw)

    @staticmethod
    def from_json_file(path) -> "PipelineConfig":
        try:
            raw = json.loads(open(path).read())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} does not exist") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        return PipelineConfig.from_dict(raw)
