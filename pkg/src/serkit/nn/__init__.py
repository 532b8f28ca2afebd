"""Dense-tensor network engine with manual backpropagation.

Hot sequence kernels run on a compiled extension when it is importable;
a pure-numpy implementation with identical semantics is the fallback.
Set SERKIT_KERNELS=python or SERKIT_KERNELS=compiled to force one.
"""

from ._backend import available_backends, backend_name
from .checkpoint import load_checkpoint, save_checkpoint
from .config import TrainConfig
from .layers import (
    AttentionPool,
    BatchNorm,
    BLSTM,
    Conv1D,
    Dense,
    Dropout,
    Flatten,
    GlobalMaxPool,
    LastStepConcat,
    Layer,
    LSTM,
    MaxPool1D,
    ReLU,
    Reshape,
    Sequential,
    Tanh,
)
from .optim import Adam, SGD, make_optimizer
from .ops import softmax, softmax_cross_entropy

__all__ = [
    "AttentionPool", "BatchNorm", "BLSTM", "Conv1D", "Dense", "Dropout",
    "Flatten", "GlobalMaxPool", "LastStepConcat", "Layer", "LSTM",
    "MaxPool1D", "ReLU", "Reshape", "Sequential", "Tanh",
    "Adam", "SGD", "make_optimizer", "TrainConfig",
    "load_checkpoint", "save_checkpoint",
    "softmax", "softmax_cross_entropy",
    "available_backends", "backend_name",
]
