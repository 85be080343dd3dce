from .layers import (
    Conv2D,
    Dense,
    DepthwiseConv2D,
    Flatten,
    Layer,
    MaxPool2D,
    Param,
    ReLU,
    Residual,
    Sequential,
    load_params_state,
    params_state,
)
from .losses import binary_ce_with_logits, sigmoid, smooth_l1, softmax, softmax_cross_entropy
from .optim import Adam

__all__ = [
    "Adam",
    "Conv2D",
    "Dense",
    "DepthwiseConv2D",
    "Flatten",
    "Layer",
    "MaxPool2D",
    "Param",
    "ReLU",
    "Residual",
    "Sequential",
    "binary_ce_with_logits",
    "load_params_state",
    "params_state",
    "sigmoid",
    "smooth_l1",
    "softmax",
    "softmax_cross_entropy",
]
