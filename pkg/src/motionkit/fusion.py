"""Attention fusion: gate a feature map by a guidance map, then mix pointwise.

Both fusion flavors share one formula. Given features ``f`` and a guidance
map ``g`` of equal shape ``[C, T, H, W]``:

    A   = (g + 1) * f            elementwise; the +1 keeps zero guidance from
                                 erasing features
    out = mixer(concat(A, f))    pointwise (1x1x1) convolution 2C -> C

so the output shape always equals the input shape. ``datt_fuse`` is the
motion-guided variant (g is a normalized dynamic image), ``satt_fuse`` the
skeleton-guided one (g is a stage guidance heatmap); the arithmetic is
identical, only the provenance of ``g`` differs.

The mixer accumulates in float64 with a fixed input-channel order, so a
faithful reimplementation can match outputs bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import MotionkitError, ShapeMismatchError
from .tensor import Tensor, _wrap


class PointwiseMixer:
    """1x1x1 convolution over ``concat(A, f)``: weights ``[C, 2C]``, bias ``[C]``.

    ``reference()`` builds the identity-selecting initialization: output
    channel c takes input channel c (the A half) with weight 1, everything
    else 0, bias 0 - which makes zero-guidance fusion an exact identity.
    """

    __slots__ = ("weights", "bias", "reference_init")

    def __init__(self, weights, bias, reference_init: bool = False):
        w = np.ascontiguousarray(weights, dtype=np.float32)
        b = np.ascontiguousarray(bias, dtype=np.float32)
        if w.ndim != 2 or w.shape[1] != 2 * w.shape[0]:
            raise MotionkitError(f"mixer weights must be [C, 2C], got {w.shape}")
        if b.shape != (w.shape[0],):
            raise MotionkitError(f"mixer bias must be [C] = [{w.shape[0]}], got {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise MotionkitError("mixer parameters must be finite")
        w.setflags(write=False)
        b.setflags(write=False)
        self.weights = w
        self.bias = b
        self.reference_init = bool(reference_init)

    @property
    def channels(self) -> int:
        return int(self.weights.shape[0])

    @classmethod
    def reference(cls, channels: int) -> "PointwiseMixer":
        w = np.zeros((channels, 2 * channels), dtype=np.float32)
        w[np.arange(channels), np.arange(channels)] = 1.0
        return cls(w, np.zeros(channels, dtype=np.float32), reference_init=True)

    def apply(self, stacked: np.ndarray) -> np.ndarray:
        """Mix a float32 ``[2C, T, H, W]`` block down to ``[C, T, H, W]`` float32.

        Accumulation: float64, input channels in ascending order, bias last.
        """
        c = self.channels
        if stacked.shape[0] != 2 * c:
            raise ShapeMismatchError("mixer input channels", (2 * c,), (stacked.shape[0],))
        x64 = stacked.astype(np.float64)
        w64 = self.weights.astype(np.float64)
        acc = np.zeros((c,) + stacked.shape[1:], dtype=np.float64)
        for ic in range(2 * c):
            acc += w64[:, ic].reshape((c,) + (1,) * (stacked.ndim - 1)) * x64[ic]
        acc += self.bias.astype(np.float64).reshape((c,) + (1,) * (stacked.ndim - 1))
        return acc.astype(np.float32)


def _fuse(f: Tensor, guidance: Tensor, mixer: PointwiseMixer, what: str) -> Tensor:
    if f.dims != guidance.dims:
        raise ShapeMismatchError(what, f.dims, guidance.dims)
    if len(f.dims) != 4:
        raise MotionkitError(f"{what} expects [C, T, H, W], got {f.dims}")
    if mixer.channels != f.dims[0]:
        raise ShapeMismatchError(f"{what} mixer channels", (mixer.channels,), (f.dims[0],))
    farr = f.to_numpy()
    attention = (guidance.to_numpy() + np.float32(1.0)) * farr  # float32 elementwise
    stacked = np.concatenate([attention, farr], axis=0)
    return _wrap(mixer.apply(stacked))


def datt_fuse(f: Tensor, di_norm: Tensor, mixer: PointwiseMixer) -> Tensor:
    """Motion-guided fusion: guidance is a normalized dynamic image."""
    return _fuse(f, di_norm, mixer, "datt_fuse")


def satt_fuse(f: Tensor, h: Tensor, mixer: PointwiseMixer) -> Tensor:
    """Skeleton-guided fusion: guidance is a stage heatmap tensor."""
    return _fuse(f, h, mixer, "satt_fuse")
