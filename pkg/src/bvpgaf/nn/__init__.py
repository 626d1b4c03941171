"""Small NumPy CNN engine for window and GAF-image classification."""

from .layers import Conv1D, Conv2D, Dense, GlobalAvgPool, MaxPool1D, MaxPool2D, ReLU, softmax, softmax_cross_entropy
from .model import (
    NUM_CLASSES,
    AdamState,
    ConvBlock,
    Model,
    ModelConfig,
    Variant,
    adam_step,
    build_model,
    forward,
    loss_and_grad,
)
from .serialize import load_weights, save_weights
from .train import Dataset, SplitMode, TrainConfig, TrainReport, evaluate, split_indices, train

__all__ = [
    "AdamState", "Conv1D", "Conv2D", "ConvBlock", "Dataset", "Dense", "GlobalAvgPool", "MaxPool1D", "MaxPool2D",
    "Model", "ModelConfig", "NUM_CLASSES", "ReLU", "SplitMode", "TrainConfig", "TrainReport", "Variant",
    "adam_step", "build_model", "evaluate", "forward", "load_weights", "loss_and_grad", "save_weights",
    "softmax", "softmax_cross_entropy", "split_indices", "train",
]
