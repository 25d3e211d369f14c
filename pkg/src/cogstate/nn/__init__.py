"""Minimal from-scratch neural-network engine (float64 numpy)."""

from .attention import MultiHeadAttention
from .gradcheck import numerical_gradient, relative_error
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
    ShapeError,
    Softmax,
    ToSequence,
    softmax,
)
from .losses import cce_loss
from .model import (
    LayerSpec,
    ModelSpec,
    Sequential,
    build_model,
    eegnet_spec,
    load_parameters,
    mha_eegnet_spec,
    mlp_spec,
    save_parameters,
    set_parameters,
    spec_for,
)
from .optim import Adam
from .train import TrainConfig, TrainResult, accuracy_of, predict_probs, train

__all__ = [
    "Adam",
    "AvgPool2d",
    "BatchNorm2d",
    "Conv2d",
    "Dense",
    "DepthwiseConv2d",
    "Dropout",
    "Elu",
    "Flatten",
    "Layer",
    "LayerSpec",
    "MeanPoolSequence",
    "ModelSpec",
    "MultiHeadAttention",
    "Sequential",
    "ShapeError",
    "Softmax",
    "ToSequence",
    "TrainConfig",
    "TrainResult",
    "accuracy_of",
    "build_model",
    "cce_loss",
    "eegnet_spec",
    "load_parameters",
    "mha_eegnet_spec",
    "mlp_spec",
    "numerical_gradient",
    "predict_probs",
    "relative_error",
    "save_parameters",
    "set_parameters",
    "softmax",
    "spec_for",
    "train",
]
