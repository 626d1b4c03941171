"""Gramian Angular Field encoding of rescaled windows.

A window rescaled to ``[-1, 1]`` is read as the cosines of polar angles
``phi = arccos(x)``. The summation field is ``cos(phi_a + phi_b)`` and the
difference field is ``sin(phi_a - phi_b)``. Both are computed here from
outer products of ``x`` and ``sqrt(1 - x**2)`` (elementwise square root),
which avoids evaluating any trigonometric function on the S x S grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ParameterError
from .windowing import RescaledWindow, RescaleMode, WindowSet, WindowSpec, rescale_set

CLAMP_TOL = 1e-9


class GafKind(str, Enum):
    GASF = "gasf"
    GADF = "gadf"


@dataclass(frozen=True, eq=False)
class GafImage:
    matrix: np.ndarray
    kind: GafKind
    source_spec: WindowSpec | None = None
    paa_size: int | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _checked_values(w) -> np.ndarray:
    if isinstance(w, RescaledWindow):
        if w.mode is not RescaleMode.NEG_ONE_ONE:
            raise DomainError("polar encoding needs a window rescaled to [-1, 1]")
        x = w.values
    else:
        x = np.asarray(w, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1 + CLAMP_TOL):
        raise DomainError(f"value {x[np.argmax(np.abs(x))]!r} outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def polar_angles(w) -> np.ndarray:
    """Angles ``arccos(x)`` in ``[0, pi]``.

    Values within 1e-9 outside ``[-1, 1]`` are clamped; anything farther
    out raises :class:`DomainError`.
    """
    return np.arccos(_checked_values(w))


def _cos_sin(w) -> tuple[np.ndarray, np.ndarray]:
    x = _checked_values(w)
    return x, np.sqrt(1.0 - x * x)


def gadf_matrix(w) -> np.ndarray:
    """Difference field for the last axis of ``w`` (batched when 2-D)."""
    x, s = _cos_sin(w)
    return s[..., :, None] * x[..., None, :] - x[..., :, None] * s[..., None, :]


def gasf_matrix(w) -> np.ndarray:
    """Summation field for the last axis of ``w`` (batched when 2-D)."""
    x, s = _cos_sin(w)
    return x[..., :, None] * x[..., None, :] - s[..., :, None] * s[..., None, :]


def gadf(w, source_spec: WindowSpec | None = None, paa_size: int | None = None) -> GafImage:
    return GafImage(gadf_matrix(w), GafKind.GADF, source_spec, paa_size)


def gasf(w, source_spec: WindowSpec | None = None, paa_size: int | None = None) -> GafImage:
    return GafImage(gasf_matrix(w), GafKind.GASF, source_spec, paa_size)


def paa(values, target_size: int) -> np.ndarray:
    """Piecewise aggregate approximation to ``target_size`` points.

    Segment boundaries fall at multiples of ``p / S``; an input sample
    split by a boundary contributes to both segments in proportion to the
    overlap. Works on the last axis, so a stack of windows is fine.
    """
    v = np.asarray(values, dtype=np.float64)
    p = v.shape[-1]
    if not 1 <= target_size <= p:
        raise ParameterError(f"PAA size must lie in [1, {p}], got {target_size}")
    if target_size == p:
        return v.copy()
    if p % target_size == 0:
        return v.reshape(*v.shape[:-1], target_size, p // target_size).mean(axis=-1)
    # Repeat each sample S times: every run of p entries is one segment.
    rep = np.repeat(v, target_size, axis=-1)
    return rep.reshape(*v.shape[:-1], target_size, p).mean(axis=-1)


@dataclass(frozen=True, eq=False)
class GafImageSet:
    """Stacked images plus the labels/groups of the windows they encode."""

    images: np.ndarray
    kind: GafKind
    windows: WindowSet
    paa_size: int | None
    degenerate: np.ndarray

    def __len__(self):
        return self.images.shape[0]

    def __getitem__(self, i) -> GafImage:
        return GafImage(self.images[i], self.kind, self.windows.spec, self.paa_size)


def encode_windows(ws: WindowSet, kind: GafKind = GafKind.GADF, paa_size: int | None = 64,
                   scope: str = "window") -> GafImageSet:
    """Downsample (optional), rescale to ``[-1, 1]`` and encode every window.

    ``paa_size`` is capped at the window length; ``None`` keeps full size.
    """
    kind = GafKind(kind)
    raw = ws.windows
    size = None
    if paa_size is not None:
        size = min(int(paa_size), ws.spec.window_len)
        raw = paa(raw, size)
    staged = WindowSet(raw, ws.labels, WindowSpec(raw.shape[1], ws.spec.stride), ws.sources, ws.groups)
    scaled, degenerate = rescale_set(staged, RescaleMode.NEG_ONE_ONE, scope)
    encoder = gadf_matrix if kind is GafKind.GADF else gasf_matrix
    return GafImageSet(encoder(scaled), kind, ws, size, degenerate)
