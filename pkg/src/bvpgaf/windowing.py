"""Sliding-window segmentation and min-max rescaling of labelled series."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import EmptyWindowSetError, ParameterError
from .ingest import Condition, TimeSeries


@dataclass(frozen=True)
class WindowSpec:
    """Window length ``p`` and stride ``j``, both in samples."""

    window_len: int
    stride: int

    def __post_init__(self):
        if int(self.window_len) != self.window_len or int(self.stride) != self.stride:
            raise ParameterError("window length and stride must be integers")
        if self.window_len < 2:
            raise ParameterError(f"window length must be >= 2, got {self.window_len}")
        if self.stride < 1:
            raise ParameterError(f"stride must be >= 1, got {self.stride}")

    @property
    def effective_length(self) -> float:
        return effective_length(self)

    @property
    def tag(self) -> str:
        return f"p{self.window_len}_j{self.stride}"


def effective_length(spec: WindowSpec) -> float:
    """Stride over window length; smaller means more overlap between windows."""
    return spec.stride / spec.window_len


def window_count(n: int, spec: WindowSpec) -> int:
    if n < spec.window_len:
        return 0
    return (n - spec.window_len) // spec.stride + 1


@dataclass(frozen=True, eq=False)
class WindowSet:
    """Stacked windows with one condition label and source group per row.

    ``sources`` is the index of the originating series in the list passed
    to :func:`segment`; ``groups`` is its participant id (or the source
    index as a string when the series carries none).
    """

    windows: np.ndarray
    labels: tuple[Condition, ...]
    spec: WindowSpec
    sources: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    groups: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.windows.ndim != 2 or self.windows.shape[1] != self.spec.window_len:
            raise ParameterError(f"windows must have shape (count, {self.spec.window_len})")
        if len(self.labels) != self.windows.shape[0]:
            raise ParameterError("one label per window required")

    def __len__(self):
        return self.windows.shape[0]

    @property
    def label_indices(self) -> np.ndarray:
        return np.array([c.index for c in self.labels], dtype=np.int64)


def segment(series: Sequence[TimeSeries], spec: WindowSpec) -> WindowSet:
    """Cut every series into windows ``x[i*j : i*j + p]``.

    Trailing partial windows are dropped and no window spans two series.
    A series shorter than ``p`` contributes nothing and is reported in
    ``WindowSet.warnings`` (and through :mod:`warnings`).
    """
    p, j = spec.window_len, spec.stride
    blocks, labels, sources, groups, notes = [], [], [], [], []
    for k, s in enumerate(series):
        if s.condition is None:
            raise ParameterError(f"series {k} has no condition label")
        count = window_count(len(s), spec)
        if count == 0:
            msg = f"series {k} ({len(s)} samples) shorter than window length {p}; skipped"
            notes.append(msg)
            warnings.warn(msg, stacklevel=2)
            continue
        view = np.lib.stride_tricks.sliding_window_view(s.samples, p)[::j]
        blocks.append(np.array(view[:count]))
        labels.extend([s.condition] * count)
        sources.extend([k] * count)
        groups.extend([s.participant if s.participant is not None else str(k)] * count)
    if not blocks:
        raise EmptyWindowSetError(f"no series is at least {p} samples long; window set would be empty")
    return WindowSet(
        np.vstack(blocks),
        tuple(labels),
        spec,
        np.asarray(sources, dtype=np.int64),
        tuple(groups),
        tuple(notes),
    )


class RescaleMode(str, Enum):
    NEG_ONE_ONE = "neg_one_one"
    ZERO_ONE = "zero_one"

    @property
    def bounds(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self is RescaleMode.NEG_ONE_ONE else (0.0, 1.0)


@dataclass(frozen=True, eq=False)
class RescaledWindow:
    values: np.ndarray
    mode: RescaleMode
    degenerate: bool = False

    def __len__(self):
        return self.values.size


def rescale(window, mode: RescaleMode = RescaleMode.NEG_ONE_ONE, lo=None, hi=None) -> RescaledWindow:
    """Min-max rescale into ``[-1, 1]`` or ``[0, 1]``.

    ``lo``/``hi`` override the window's own extremes (used for per-series
    scaling). A constant window maps to the range midpoint and is flagged
    degenerate.
    """
    x = np.asarray(window, dtype=np.float64).ravel()
    if x.size == 0:
        raise ParameterError("cannot rescale an empty window")
    mode = RescaleMode(mode)
    lo = x.min() if lo is None else lo
    hi = x.max() if hi is None else hi
    a, b = mode.bounds
    span = hi - lo
    if span <= 0:
        return RescaledWindow(np.full(x.size, (a + b) / 2), mode, degenerate=True)
    if mode is RescaleMode.NEG_ONE_ONE:
        out = ((x - hi) + (x - lo)) / span
    else:
        out = (x - lo) / span
    np.clip(out, a, b, out=out)
    return RescaledWindow(out, mode)


def rescale_set(ws: WindowSet, mode: RescaleMode = RescaleMode.NEG_ONE_ONE,
                scope: str = "window") -> tuple[np.ndarray, np.ndarray]:
    """Rescale every row of ``ws``.

    ``scope="window"`` uses each window's own extremes; ``scope="series"``
    uses the extremes over all windows cut from the same source series.
    Returns ``(values, degenerate_mask)``.
    """
    if scope not in ("window", "series"):
        raise ParameterError(f"unknown rescale scope {scope!r}")
    out = np.empty_like(ws.windows)
    degenerate = np.zeros(len(ws), dtype=bool)
    extremes = {}
    if scope == "series":
        for src in np.unique(ws.sources):
            rows = ws.windows[ws.sources == src]
            extremes[int(src)] = (rows.min(), rows.max())
    for i, row in enumerate(ws.windows):
        lo, hi = extremes.get(int(ws.sources[i]), (None, None)) if scope == "series" else (None, None)
        r = rescale(row, mode, lo, hi)
        out[i] = r.values
        degenerate[i] = r.degenerate
    return out, degenerate
