"""Model specifications, deterministic building, and serialization.

A ``ModelSpec`` is a JSON-able layer list with explicit dimensions, so
parameter counts have a closed form and building is mechanical. The
same spec + seed always builds bit-identical initial weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .attention import MultiHeadAttention
from .layers import (
    AvgPool2d,
    BatchNorm2d,
    Conv2d,
    Dense,
    DepthwiseConv2d,
    Dropout,
    Elu,
    Flatten,
    Layer,
    MeanPoolSequence,
    Softmax,
    ToSequence,
)


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    args: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSpec:
    """Layer-by-layer model description with a deterministic init seed."""

    name: str
    input_channels: int
    input_samples: int
    n_classes: int
    seed: int
    layers: tuple[LayerSpec, ...]

    def parameter_count(self) -> int:
        """Closed-form trainable parameter count."""
        total = 0
        for ls in self.layers:
            a = ls.args
            if ls.kind == "dense":
                total += a["in_features"] * a["out_features"] + a["out_features"]
            elif ls.kind == "conv2d":
                kh, kw = a["kernel"]
                total += a["out_channels"] * a["in_channels"] * kh * kw
                if a.get("bias", False):
                    total += a["out_channels"]
            elif ls.kind == "depthwise":
                kh, kw = a["kernel"]
                total += a["in_channels"] * a["depth_mult"] * kh * kw
            elif ls.kind == "batchnorm":
                total += 2 * a["channels"]
            elif ls.kind == "attention":
                d = a["d_model"]
                total += 4 * (d * d + d)
        return total

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "cogstate.model/v1",
                "name": self.name,
                "input_channels": self.input_channels,
                "input_samples": self.input_samples,
                "n_classes": self.n_classes,
                "seed": self.seed,
                "layers": [{"kind": ls.kind, "args": ls.args} for ls in self.layers],
            },
            indent=2,
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "ModelSpec":
        raw = json.loads(text)
        return ModelSpec(
            name=raw["name"],
            input_channels=int(raw["input_channels"]),
            input_samples=int(raw["input_samples"]),
            n_classes=int(raw["n_classes"]),
            seed=int(raw["seed"]),
            layers=tuple(LayerSpec(l["kind"], dict(l["args"])) for l in raw["layers"]),
        )


class Sequential:
    """Ordered layer stack ending in a softmax."""

    def __init__(self, spec: ModelSpec, layers: list[Layer]):
        self.spec = spec
        self.layers = layers
        names = [n for layer in layers for n in layer.params()]
        if len(names) != len(set(names)):
            raise ConfigError("duplicate parameter names in model")

    def forward(self, x: np.ndarray, training: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        expected = (1, self.spec.input_channels, self.spec.input_samples)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ConfigError(
                f"model {self.spec.name} expects batches of shape (B, {expected[0]}, "
                f"{expected[1]}, {expected[2]}), got {x.shape}"
            )
        for layer in self.layers:
            x = layer.forward(x, training=training, rng=rng)
        return x

    def backward_from_logits(self, dlogits: np.ndarray) -> np.ndarray:
        """Backpropagate a gradient w.r.t. logits (softmax fused with CCE)."""
        if not isinstance(self.layers[-1], Softmax):
            raise ConfigError("model does not end in softmax; cannot fuse CCE gradient")
        g = dlogits
        for layer in reversed(self.layers[:-1]):
            g = layer.backward(g)
        return g

    def params(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for layer in self.layers:
            out.update(layer.params())
        return out

    def grads(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for layer in self.layers:
            out.update(layer.grads())
        return out

    def zero_grads(self) -> None:
        for g in self.grads().values():
            g[...] = 0.0


def build_model(spec: ModelSpec) -> Sequential:
    rng = np.random.default_rng(spec.seed)
    layers: list[Layer] = []
    counter: dict[str, int] = {}

    def fresh(kind: str) -> str:
        counter[kind] = counter.get(kind, 0) + 1
        return f"{kind}{counter[kind]}"

    for ls in spec.layers:
        a = ls.args
        name = fresh(ls.kind)
        if ls.kind == "dense":
            layers.append(Dense(name, a["in_features"], a["out_features"], rng))
        elif ls.kind == "conv2d":
            layers.append(
                Conv2d(name, a["in_channels"], a["out_channels"], tuple(a["kernel"]),
                       tuple(a["padding"]), rng, bias=a.get("bias", False))
            )
        elif ls.kind == "depthwise":
            layers.append(
                DepthwiseConv2d(name, a["in_channels"], a["depth_mult"], tuple(a["kernel"]),
                                tuple(a["padding"]), rng)
            )
        elif ls.kind == "batchnorm":
            layers.append(BatchNorm2d(name, a["channels"]))
        elif ls.kind == "elu":
            layers.append(Elu(name, a.get("alpha", 1.0)))
        elif ls.kind == "avgpool":
            layers.append(AvgPool2d(name, tuple(a["pool"])))
        elif ls.kind == "dropout":
            layers.append(Dropout(name, a["rate"]))
        elif ls.kind == "flatten":
            layers.append(Flatten(name))
        elif ls.kind == "to_sequence":
            layers.append(ToSequence(name))
        elif ls.kind == "attention":
            layers.append(MultiHeadAttention(name, a["d_model"], a["n_heads"], rng))
        elif ls.kind == "mean_pool_sequence":
            layers.append(MeanPoolSequence(name))
        elif ls.kind == "softmax":
            layers.append(Softmax(name))
        else:
            raise ConfigError(f"unknown layer kind {ls.kind!r}")
    model = Sequential(spec, layers)
    built = sum(p.size for p in model.params().values())
    declared = spec.parameter_count()
    if built != declared:
        raise ConfigError(
            f"built parameter count {built} != closed-form count {declared} for {spec.name}"
        )
    return model


def _temporal_kernel(fs: float) -> int:
    """Half the sampling rate, forced odd for symmetric same-padding."""
    k = max(3, int(round(fs / 2.0)))
    return k + 1 if k % 2 == 0 else k


def mlp_spec(
    n_channels: int,
    n_samples: int,
    n_classes: int = 3,
    hidden: tuple[int, ...] = (64, 32),
    dropout: float = 0.25,
    seed: int = 0,
) -> ModelSpec:
    """Baseline multi-layer perceptron on flattened epochs."""
    layers = [LayerSpec("flatten")]
    in_dim = n_channels * n_samples
    for width in hidden:
        layers.append(LayerSpec("dense", {"in_features": in_dim, "out_features": width}))
        layers.append(LayerSpec("elu"))
        layers.append(LayerSpec("dropout", {"rate": dropout}))
        in_dim = width
    layers.append(LayerSpec("dense", {"in_features": in_dim, "out_features": n_classes}))
    layers.append(LayerSpec("softmax"))
    return ModelSpec("mlp", n_channels, n_samples, n_classes, seed, tuple(layers))


def _eegnet_front(
    n_channels: int,
    n_samples: int,
    fs: float,
    f1: int,
    depth: int,
    f2: int,
    dropout: float,
) -> tuple[list[LayerSpec], int]:
    """Temporal conv -> depthwise spatial conv -> separable conv stack.

    Returns the layer list and the output sequence length.
    """
    k1 = _temporal_kernel(fs)
    sep_k = 15
    layers = [
        LayerSpec("conv2d", {
            "in_channels": 1, "out_channels": f1,
            "kernel": [1, k1], "padding": [0, (k1 - 1) // 2], "bias": False,
        }),
        LayerSpec("batchnorm", {"channels": f1}),
        LayerSpec("depthwise", {
            "in_channels": f1, "depth_mult": depth,
            "kernel": [n_channels, 1], "padding": [0, 0],
        }),
        LayerSpec("batchnorm", {"channels": f1 * depth}),
        LayerSpec("elu"),
        LayerSpec("avgpool", {"pool": [1, 4]}),
        LayerSpec("dropout", {"rate": dropout}),
        LayerSpec("depthwise", {
            "in_channels": f1 * depth, "depth_mult": 1,
            "kernel": [1, sep_k], "padding": [0, (sep_k - 1) // 2],
        }),
        LayerSpec("conv2d", {
            "in_channels": f1 * depth, "out_channels": f2,
            "kernel": [1, 1], "padding": [0, 0], "bias": False,
        }),
        LayerSpec("batchnorm", {"channels": f2}),
        LayerSpec("elu"),
        LayerSpec("avgpool", {"pool": [1, 8]}),
        LayerSpec("dropout", {"rate": dropout}),
    ]
    out_len = (n_samples // 4) // 8
    if out_len < 1:
        raise ConfigError(f"epoch of {n_samples} samples too short for the conv stack")
    return layers, out_len


def eegnet_spec(
    n_channels: int,
    n_samples: int,
    fs: float,
    n_classes: int = 3,
    f1: int = 8,
    depth: int = 2,
    f2: int = 16,
    dropout: float = 0.25,
    seed: int = 0,
) -> ModelSpec:
    """Compact convolutional EEG classifier."""
    layers, out_len = _eegnet_front(n_channels, n_samples, fs, f1, depth, f2, dropout)
    layers += [
        LayerSpec("flatten"),
        LayerSpec("dense", {"in_features": f2 * out_len, "out_features": n_classes}),
        LayerSpec("softmax"),
    ]
    return ModelSpec("eegnet", n_channels, n_samples, n_classes, seed, tuple(layers))


def mha_eegnet_spec(
    n_channels: int,
    n_samples: int,
    fs: float,
    n_classes: int = 3,
    f1: int = 8,
    depth: int = 2,
    f2: int = 16,
    n_heads: int = 4,
    dropout: float = 0.25,
    seed: int = 0,
) -> ModelSpec:
    """EEGNet front-end with multi-head attention after the separable block."""
    layers, _ = _eegnet_front(n_channels, n_samples, fs, f1, depth, f2, dropout)
    layers += [
        LayerSpec("to_sequence"),
        LayerSpec("attention", {"d_model": f2, "n_heads": n_heads}),
        LayerSpec("mean_pool_sequence"),
        LayerSpec("dense", {"in_features": f2, "out_features": n_classes}),
        LayerSpec("softmax"),
    ]
    return ModelSpec("mha-eegnet", n_channels, n_samples, n_classes, seed, tuple(layers))


MODEL_BUILDERS = {
    "mlp": mlp_spec,
    "eegnet": eegnet_spec,
    "mha-eegnet": mha_eegnet_spec,
}


def spec_for(model_name: str, n_channels: int, n_samples: int, fs: float, seed: int = 0) -> ModelSpec:
    if model_name == "mlp":
        return mlp_spec(n_channels, n_samples, seed=seed)
    if model_name == "eegnet":
        return eegnet_spec(n_channels, n_samples, fs, seed=seed)
    if model_name == "mha-eegnet":
        return mha_eegnet_spec(n_channels, n_samples, fs, seed=seed)
    raise ConfigError(f"unknown model {model_name!r}, expected one of {sorted(MODEL_BUILDERS)}")


def save_parameters(params: dict[str, np.ndarray], blob_path: str | Path, index_path: str | Path) -> None:
    """Flat little-endian float64 blob plus a JSON name/shape/offset index."""
    index = []
    offset = 0
    chunks = []
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name], dtype="<f8")
        index.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
        chunks.append(arr.ravel())
    Path(blob_path).write_bytes(np.concatenate(chunks).astype("<f8").tobytes())
    Path(index_path).write_text(
        json.dumps({"schema": "cogstate.params/v1", "total": offset, "tensors": index},
                   indent=2, sort_keys=True) + "\n"
    )


def load_parameters(blob_path: str | Path, index_path: str | Path) -> dict[str, np.ndarray]:
    index = json.loads(Path(index_path).read_text())
    flat = np.frombuffer(Path(blob_path).read_bytes(), dtype="<f8")
    if flat.size != index["total"]:
        raise ConfigError(
            f"parameter blob holds {flat.size} values, index expects {index['total']}"
        )
    out = {}
    for entry in index["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        out[entry["name"]] = flat[entry["offset"] : entry["offset"] + size].reshape(shape).astype(np.float64)
    return out


def set_parameters(model: Sequential, params: dict[str, np.ndarray]) -> None:
    own = model.params()
    if set(own) != set(params):
        missing = set(own) ^ set(params)
        raise ConfigError(f"parameter name mismatch: {sorted(missing)}")
    for name, arr in params.items():
        if own[name].shape != arr.shape:
            raise ConfigError(f"shape mismatch for {name}: {own[name].shape} vs {arr.shape}")
        own[name][...] = arr
