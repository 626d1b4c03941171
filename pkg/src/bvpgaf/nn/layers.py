"""Layers with hand-written backward passes (float64, NumPy only).

Layout is channels-first: 1-D activations are ``(batch, channels, length)``
and 2-D activations ``(batch, channels, height, width)``. Every layer
caches what its backward pass needs during ``forward``; call ``forward``
and ``backward`` in matching pairs.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError


class Layer:
    """Base layer: no parameters, identity shape."""

    name = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def output_shape(self, shape: tuple[int, ...]) -> tuple[int, ...]:
        return shape

    def init(self, rng: np.random.Generator) -> None:
        pass

    def config(self) -> dict:
        return {"type": self.name}


def he_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Conv1D(Layer):
    name = "conv1d"

    def __init__(self, in_channels: int, filters: int, kernel: int, stride: int = 1):
        super().__init__()
        self.in_channels, self.filters, self.kernel, self.stride = in_channels, filters, kernel, stride
        self.params = {
            "W": np.zeros((filters, in_channels, kernel)),
            "b": np.zeros(filters),
        }

    def init(self, rng):
        self.params["W"] = he_uniform(rng, self.params["W"].shape, self.in_channels * self.kernel)
        self.params["b"] = np.zeros(self.filters)

    def output_shape(self, shape):
        c, length = shape
        if c != self.in_channels:
            raise ShapeError(f"conv1d expects {self.in_channels} channels, got {c}")
        if length < self.kernel:
            raise ShapeError(f"conv1d kernel {self.kernel} longer than input length {length}")
        return (self.filters, (length - self.kernel) // self.stride + 1)

    def forward(self, x):
        cols = sliding_window_view(x, self.kernel, axis=2)[:, :, :: self.stride]  # (B, C, Lo, K)
        self._x_shape = x.shape
        self._cols = cols
        out = np.tensordot(cols, self.params["W"], axes=([1, 3], [1, 2]))  # (B, Lo, F)
        out += self.params["b"]
        return out.transpose(0, 2, 1)

    def backward(self, grad):
        W = self.params["W"]
        self.grads["W"] = np.tensordot(grad, self._cols, axes=([0, 2], [0, 2]))  # (F, C, K)
        self.grads["b"] = grad.sum(axis=(0, 2))
        dcols = np.tensordot(grad, W, axes=([1], [0]))  # (B, Lo, C, K)
        dx = np.zeros(self._x_shape)
        lo = grad.shape[2]
        s = self.stride
        for k in range(self.kernel):
            dx[:, :, k : k + s * (lo - 1) + 1 : s] += dcols[:, :, :, k].transpose(0, 2, 1)
        return dx

    def config(self):
        return {"type": self.name, "in_channels": self.in_channels, "filters": self.filters,
                "kernel": self.kernel, "stride": self.stride}


class Conv2D(Layer):
    name = "conv2d"

    def __init__(self, in_channels: int, filters: int, kernel: int | tuple[int, int]):
        super().__init__()
        kh, kw = (kernel, kernel) if isinstance(kernel, int) else tuple(kernel)
        self.in_channels, self.filters, self.kernel = in_channels, filters, (kh, kw)
        self.params = {
            "W": np.zeros((filters, in_channels, kh, kw)),
            "b": np.zeros(filters),
        }

    def init(self, rng):
        kh, kw = self.kernel
        self.params["W"] = he_uniform(rng, self.params["W"].shape, self.in_channels * kh * kw)
        self.params["b"] = np.zeros(self.filters)

    def output_shape(self, shape):
        c, h, w = shape
        kh, kw = self.kernel
        if c != self.in_channels:
            raise ShapeError(f"conv2d expects {self.in_channels} channels, got {c}")
        if h < kh or w < kw:
            raise ShapeError(f"conv2d kernel {self.kernel} larger than input {h}x{w}")
        return (self.filters, h - kh + 1, w - kw + 1)

    def forward(self, x):
        cols = sliding_window_view(x, self.kernel, axis=(2, 3))  # (B, C, Ho, Wo, kh, kw)
        self._x_shape = x.shape
        self._cols = cols
        out = np.tensordot(cols, self.params["W"], axes=([1, 4, 5], [1, 2, 3]))  # (B, Ho, Wo, F)
        out += self.params["b"]
        return out.transpose(0, 3, 1, 2)

    def backward(self, grad):
        W = self.params["W"]
        self.grads["W"] = np.tensordot(grad, self._cols, axes=([0, 2, 3], [0, 2, 3]))
        self.grads["b"] = grad.sum(axis=(0, 2, 3))
        dcols = np.tensordot(grad, W, axes=([1], [0]))  # (B, Ho, Wo, C, kh, kw)
        dx = np.zeros(self._x_shape)
        ho, wo = grad.shape[2], grad.shape[3]
        kh, kw = self.kernel
        for i in range(kh):
            for j in range(kw):
                dx[:, :, i : i + ho, j : j + wo] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        return dx

    def config(self):
        return {"type": self.name, "in_channels": self.in_channels, "filters": self.filters,
                "kernel": list(self.kernel)}


class ReLU(Layer):
    name = "relu"

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad):
        return grad * self._mask


class MaxPool1D(Layer):
    """Non-overlapping max pooling; a trailing remainder is dropped."""

    name = "maxpool1d"

    def __init__(self, size: int):
        super().__init__()
        self.size = size

    def output_shape(self, shape):
        c, length = shape
        if length < self.size:
            raise ShapeError(f"maxpool1d size {self.size} larger than input length {length}")
        return (c, length // self.size)

    def forward(self, x):
        b, c, length = x.shape
        lo = length // self.size
        win = x[:, :, : lo * self.size].reshape(b, c, lo, self.size)
        self._arg = win.argmax(axis=3)
        self._x_shape = x.shape
        return np.take_along_axis(win, self._arg[..., None], axis=3)[..., 0]

    def backward(self, grad):
        b, c, length = self._x_shape
        lo = grad.shape[2]
        dwin = np.zeros((b, c, lo, self.size))
        np.put_along_axis(dwin, self._arg[..., None], grad[..., None], axis=3)
        dx = np.zeros(self._x_shape)
        dx[:, :, : lo * self.size] = dwin.reshape(b, c, lo * self.size)
        return dx

    def config(self):
        return {"type": self.name, "size": self.size}


class MaxPool2D(Layer):
    """Non-overlapping ``size x size`` max pooling; remainders are dropped."""

    name = "maxpool2d"

    def __init__(self, size: int):
        super().__init__()
        self.size = size

    def output_shape(self, shape):
        c, h, w = shape
        if h < self.size or w < self.size:
            raise ShapeError(f"maxpool2d size {self.size} larger than input {h}x{w}")
        return (c, h // self.size, w // self.size)

    def forward(self, x):
        b, c, h, w = x.shape
        p = self.size
        ho, wo = h // p, w // p
        win = x[:, :, : ho * p, : wo * p].reshape(b, c, ho, p, wo, p).transpose(0, 1, 2, 4, 3, 5)
        win = win.reshape(b, c, ho, wo, p * p)
        self._arg = win.argmax(axis=4)
        self._x_shape = x.shape
        return np.take_along_axis(win, self._arg[..., None], axis=4)[..., 0]

    def backward(self, grad):
        b, c, h, w = self._x_shape
        p = self.size
        ho, wo = grad.shape[2], grad.shape[3]
        dwin = np.zeros((b, c, ho, wo, p * p))
        np.put_along_axis(dwin, self._arg[..., None], grad[..., None], axis=4)
        dwin = dwin.reshape(b, c, ho, wo, p, p).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, ho * p, wo * p)
        dx = np.zeros(self._x_shape)
        dx[:, :, : ho * p, : wo * p] = dwin
        return dx

    def config(self):
        return {"type": self.name, "size": self.size}


class GlobalAvgPool(Layer):
    """Mean over every spatial axis: ``(B, C, ...) -> (B, C)``."""

    name = "gap"

    def output_shape(self, shape):
        return (shape[0],)

    def forward(self, x):
        self._x_shape = x.shape
        return x.reshape(x.shape[0], x.shape[1], -1).mean(axis=2)

    def backward(self, grad):
        spatial = int(np.prod(self._x_shape[2:]))
        g = grad.reshape(grad.shape + (1,) * (len(self._x_shape) - 2)) / spatial
        return np.broadcast_to(g, self._x_shape).copy()


class Dense(Layer):
    name = "dense"

    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.in_features, self.out_features = in_features, out_features
        self.params = {
            "W": np.zeros((in_features, out_features)),
            "b": np.zeros(out_features),
        }

    def init(self, rng):
        self.params["W"] = he_uniform(rng, self.params["W"].shape, self.in_features)
        self.params["b"] = np.zeros(self.out_features)

    def output_shape(self, shape):
        if shape != (self.in_features,):
            raise ShapeError(f"dense expects ({self.in_features},), got {shape}")
        return (self.out_features,)

    def forward(self, x):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, grad):
        self.grads["W"] = self._x.T @ grad
        self.grads["b"] = grad.sum(axis=0)
        return grad @ self.params["W"].T

    def config(self):
        return {"type": self.name, "in_features": self.in_features, "out_features": self.out_features}


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to ``logits``."""
    b = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(log_norm - z[np.arange(b), labels]))
    grad = softmax(logits)
    grad[np.arange(b), labels] -= 1.0
    return loss, grad / b
