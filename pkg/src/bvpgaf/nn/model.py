"""Model configuration, sequential container and the Adam optimiser."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from ..errors import DivergenceError, ParameterError, ShapeError
from .layers import (
    Conv1D,
    Conv2D,
    Dense,
    GlobalAvgPool,
    Layer,
    MaxPool1D,
    MaxPool2D,
    ReLU,
    softmax,
    softmax_cross_entropy,
)

NUM_CLASSES = 4


class Variant(str, Enum):
    RAW_1D = "raw1d"
    GAF_2D = "gaf2d"


@dataclass(frozen=True)
class ConvBlock:
    filters: int
    kernel: int
    pool: int = 1  # 1 = no pooling after this block


def _default_blocks(variant: Variant) -> tuple[ConvBlock, ...]:
    if variant is Variant.RAW_1D:
        return (ConvBlock(32, 8, 4), ConvBlock(64, 8, 1))
    return (ConvBlock(16, 3, 2), ConvBlock(32, 3, 2))


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of a small CNN.

    ``input_size`` is the window length for :attr:`Variant.RAW_1D` and the
    image side for :attr:`Variant.GAF_2D`. Conv blocks are followed by
    global average pooling, the optional hidden ``dense`` layers and a
    4-way output layer.
    """

    variant: Variant
    input_size: int
    blocks: tuple[ConvBlock, ...] = ()
    dense: tuple[int, ...] = ()
    num_classes: int = NUM_CLASSES
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.blocks:
            object.__setattr__(self, "blocks", _default_blocks(self.variant))
        object.__setattr__(self, "blocks", tuple(b if isinstance(b, ConvBlock) else ConvBlock(**b) for b in self.blocks))
        object.__setattr__(self, "dense", tuple(int(d) for d in self.dense))
        if self.num_classes != NUM_CLASSES:
            raise ParameterError(f"output layer must have {NUM_CLASSES} units")

    @property
    def input_shape(self) -> tuple[int, ...]:
        if self.variant is Variant.RAW_1D:
            return (self.input_size,)
        return (self.input_size, self.input_size)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        d["blocks"] = [asdict(b) for b in self.blocks]
        d["dense"] = list(self.dense)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(Variant(d["variant"]), int(d["input_size"]), tuple(ConvBlock(**b) for b in d["blocks"]),
                   tuple(d.get("dense", ())), int(d.get("num_classes", NUM_CLASSES)), int(d.get("seed", 0)))


class Model:
    """A sequential stack of layers built from a :class:`ModelConfig`."""

    def __init__(self, config: ModelConfig, layers: list[Layer]):
        self.config = config
        self.layers = layers

    def named_params(self) -> list[tuple[str, np.ndarray]]:
        """Trainable tensors in declaration order (layer index, then W, b)."""
        out = []
        for i, layer in enumerate(self.layers):
            for k in sorted(layer.params):
                out.append((f"{i}.{layer.name}.{k}", layer.params[k]))
        return out

    def named_grads(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            for k in sorted(layer.params):
                out.append((f"{i}.{layer.name}.{k}", layer.grads[k]))
        return out

    def set_params(self, tensors: list[np.ndarray]) -> None:
        slots = [(layer, k) for layer in self.layers for k in sorted(layer.params)]
        if len(tensors) != len(slots):
            raise ShapeError(f"expected {len(slots)} tensors, got {len(tensors)}")
        for (layer, k), t in zip(slots, tensors):
            if layer.params[k].shape != t.shape:
                raise ShapeError(f"tensor shape {t.shape} does not match {layer.params[k].shape}")
            layer.params[k] = np.array(t, dtype=np.float64)

    def _adapt(self, batch: np.ndarray) -> np.ndarray:
        x = np.asarray(batch, dtype=np.float64)
        expected = self.config.input_shape
        if x.ndim != len(expected) + 1 or x.shape[1:] != expected:
            raise ShapeError(f"{self.config.variant.value} model expects input (batch, "
                             f"{', '.join(map(str, expected))}), got {x.shape}")
        return x[:, None]

    def forward(self, batch: np.ndarray) -> np.ndarray:
        x = self._adapt(batch)
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def predict_proba(self, batch: np.ndarray) -> np.ndarray:
        return softmax(self.forward(batch))

    def predict(self, batch: np.ndarray, batch_size: int = 256) -> np.ndarray:
        out = [self.forward(batch[i : i + batch_size]).argmax(axis=1) for i in range(0, len(batch), batch_size)]
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def build_model(config: ModelConfig, init: bool = True) -> Model:
    """Instantiate the layer stack; He-uniform weights seeded by ``config.seed``.

    With ``init=False`` every weight stays zero.
    """
    shape: tuple[int, ...] = (1,) + config.input_shape
    layers: list[Layer] = []
    two_d = config.variant is Variant.GAF_2D

    def add(layer):
        nonlocal shape
        shape = layer.output_shape(shape)
        layers.append(layer)

    for block in config.blocks:
        add(Conv2D(shape[0], block.filters, block.kernel) if two_d else Conv1D(shape[0], block.filters, block.kernel))
        add(ReLU())
        if block.pool > 1:
            add(MaxPool2D(block.pool) if two_d else MaxPool1D(block.pool))
    add(GlobalAvgPool())
    for width in config.dense:
        add(Dense(shape[0], width))
        add(ReLU())
    add(Dense(shape[0], config.num_classes))
    if init:
        rng = np.random.default_rng(config.seed)
        for layer in layers:
            layer.init(rng)
    return Model(config, layers)


def forward(model: Model, batch: np.ndarray) -> np.ndarray:
    """Logits of shape ``(batch, 4)``."""
    return model.forward(batch)


def loss_and_grad(model: Model, batch: np.ndarray, labels: np.ndarray,
                  batch_index: int | None = None) -> tuple[float, list[np.ndarray]]:
    """Mean softmax cross-entropy and the gradient of every trainable tensor."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= model.config.num_classes:
        raise ParameterError("labels must be class indices 0..3")
    logits = model.forward(batch)
    loss, dlogits = softmax_cross_entropy(logits, labels)
    if not np.isfinite(loss):
        raise DivergenceError(f"non-finite loss in batch {batch_index}", batch_index=batch_index)
    model.backward(dlogits)
    return loss, [g.copy() for _, g in model.named_grads()]


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState,
              lr: float | None = None) -> AdamState:
    """One bias-corrected Adam update applied to ``params`` in place."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if len(grads) != len(params) or any(g.shape != p.shape for g, p in zip(grads, params)):
        raise ShapeError("gradient shapes do not match parameters")
    lr = state.lr if lr is None else lr
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return state
