"""Dense float32 tensor type and the small kernel set the rest of the library builds on.

Conventions used everywhere:

* storage is row-major (last axis fastest), 32-bit floats;
* reductions and convolutions accumulate in 64-bit and round once at the end;
* the fixed axis order is ``[C, T, H, W]`` for video features (a leading batch
  axis is added only by callers that need one) and ``[C, H, W]`` for frames.

Tensors are immutable after construction, so every operation below is a pure
function and safe to call from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MotionkitError, ShapeMismatchError

# Largest element count we accept; keeps byte sizes well inside the index type.
_MAX_ELEMENTS = 2**40


@dataclass(frozen=True)
class Shape:
    """Ordered list of positive extents."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise MotionkitError("shape must have at least one axis")
        for d in self.dims:
            if not isinstance(d, (int, np.integer)) or d < 1:
                raise MotionkitError(f"shape extents must be positive integers, got {self.dims}")
        if self.num_elements() > _MAX_ELEMENTS:
            raise MotionkitError(f"shape {self.dims} overflows the element budget")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def num_elements(self) -> int:
        n = 1
        for d in self.dims:
            n *= int(d)
        return n

    def __len__(self) -> int:
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __getitem__(self, i):
        return self.dims[i]


class Tensor:
    """Immutable dense array of float32 values with an explicit :class:`Shape`."""

    __slots__ = ("_array",)

    def __init__(self, array: np.ndarray, *, _trusted: bool = False):
        if not _trusted:
            array = np.ascontiguousarray(array, dtype=np.float32)
            if array.ndim == 0:
                array = array.reshape(1)
            Shape(tuple(array.shape))  # validates extents
            if not np.all(np.isfinite(array)):
                raise MotionkitError("tensor values must be finite (no NaN/Inf)")
        array.setflags(write=False)
        self._array = array

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_values(cls, values, shape: tuple[int, ...] | None = None) -> "Tensor":
        arr = np.asarray(values, dtype=np.float32)
        if shape is not None:
            arr = arr.reshape(shape)
        return cls(arr)

    @classmethod
    def zeros(cls, shape: tuple[int, ...]) -> "Tensor":
        Shape(tuple(shape))
        return cls(np.zeros(shape, dtype=np.float32), _trusted=True)

    @classmethod
    def full(cls, shape: tuple[int, ...], value: float) -> "Tensor":
        Shape(tuple(shape))
        if not np.isfinite(value):
            raise MotionkitError("tensor values must be finite (no NaN/Inf)")
        return cls(np.full(shape, value, dtype=np.float32), _trusted=True)

    # -- views --------------------------------------------------------------

    @property
    def shape(self) -> Shape:
        return Shape(tuple(self._array.shape))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self._array.shape)

    @property
    def size(self) -> int:
        return int(self._array.size)

    def to_numpy(self) -> np.ndarray:
        """Read-only float32 view of the underlying storage."""
        return self._array

    def item(self) -> float:
        if self._array.size != 1:
            raise MotionkitError(f"item() needs a single-element tensor, got shape {self.dims}")
        return float(self._array.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.dims})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Tensor)
            and self.dims == other.dims
            and np.array_equal(self._array, other._array)
        )

    def __hash__(self):
        return hash((self.dims, self._array.tobytes()))


def _wrap(array: np.ndarray) -> Tensor:
    """Internal fast path: wrap a float32 array the library itself produced."""
    return Tensor(np.ascontiguousarray(array, dtype=np.float32), _trusted=True)


@dataclass(frozen=True)
class Kernel3Spec:
    """Depthwise 3-D convolution kernel under the zero-padded "same" contract.

    ``weights`` has shape ``[C, k_t, k_h, k_w]`` (one filter per channel) and
    ``bias`` has shape ``[C]``. Padding per axis is ``dilation * (extent-1) / 2``,
    which requires odd extents.
    """

    extent: tuple[int, int, int]
    dilation: tuple[int, int, int]
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        kt, kh, kw = self.extent
        for k in (kt, kh, kw):
            if k < 1 or k % 2 == 0:
                raise MotionkitError(
                    f"kernel extents must be odd and positive for 'same' padding, got {self.extent}"
                )
        for d in self.dilation:
            if d < 1:
                raise MotionkitError(f"dilation must be >= 1, got {self.dilation}")
        w = np.ascontiguousarray(self.weights, dtype=np.float32)
        if w.ndim != 4 or w.shape[1:] != (kt, kh, kw):
            raise MotionkitError(
                f"weights must have shape [C, {kt}, {kh}, {kw}], got {w.shape}"
            )
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if b.shape != (w.shape[0],):
            raise MotionkitError(f"bias must have shape [{w.shape[0]}], got {b.shape}")
        object.__setattr__(self, "extent", (int(kt), int(kh), int(kw)))
        object.__setattr__(self, "dilation", tuple(int(d) for d in self.dilation))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def channels(self) -> int:
        return int(self.weights.shape[0])

    @classmethod
    def identity(cls, channels: int) -> "Kernel3Spec":
        w = np.ones((channels, 1, 1, 1), dtype=np.float32)
        return cls((1, 1, 1), (1, 1, 1), w, np.zeros(channels, dtype=np.float32))

    @classmethod
    def box(
        cls,
        channels: int,
        extent: tuple[int, int, int],
        dilation: tuple[int, int, int] = (1, 1, 1),
        normalized: bool = True,
    ) -> "Kernel3Spec":
        kt, kh, kw = extent
        value = 1.0 / (kt * kh * kw) if normalized else 1.0
        w = np.full((channels, kt, kh, kw), value, dtype=np.float32)
        return cls(extent, dilation, w, np.zeros(channels, dtype=np.float32))


# ---------------------------------------------------------------------------
# elementwise / scalar ops
# ---------------------------------------------------------------------------

_ELEMENTWISE = {"add": np.add, "sub": np.subtract, "mul": np.multiply}


def elementwise(a: Tensor, b: Tensor, op: str) -> Tensor:
    if op not in _ELEMENTWISE:
        raise MotionkitError(f"unknown elementwise op {op!r}, expected one of {sorted(_ELEMENTWISE)}")
    if a.dims != b.dims:
        raise ShapeMismatchError(f"elementwise '{op}'", a.dims, b.dims)
    return _wrap(_ELEMENTWISE[op](a.to_numpy(), b.to_numpy()))


def scalar_affine(a: Tensor, scale: float, offset: float) -> Tensor:
    # float32 ops throughout so results are reproducible across implementations
    return _wrap(np.float32(scale) * a.to_numpy() + np.float32(offset))


def reduce(a: Tensor, stat: str) -> float:
    arr = a.to_numpy()
    if stat == "min":
        return float(np.min(arr))
    if stat == "max":
        return float(np.max(arr))
    if stat == "mean":
        return float(np.mean(arr, dtype=np.float64))
    if stat == "var":
        # population variance (divide by count), matching batch-norm convention
        return float(np.var(arr, dtype=np.float64))
    raise MotionkitError(f"unknown reduction {stat!r}, expected min/max/mean/var")


# ---------------------------------------------------------------------------
# convolution / pooling
# ---------------------------------------------------------------------------


def conv3d_same(x: Tensor, kernel: Kernel3Spec) -> Tensor:
    """Depthwise zero-padded "same" 3-D convolution over a ``[C, T, H, W]`` tensor."""
    if len(x.dims) != 4:
        raise MotionkitError(f"conv3d_same expects [C, T, H, W], got shape {x.dims}")
    c, t, h, w = x.dims
    if kernel.channels != c:
        raise ShapeMismatchError("conv3d_same kernel channels", (kernel.channels,), (c,))
    kt, kh, kw = kernel.extent
    dt, dh, dw = kernel.dilation
    pt, ph, pw = dt * (kt - 1) // 2, dh * (kh - 1) // 2, dw * (kw - 1) // 2

    padded = np.zeros((c, t + 2 * pt, h + 2 * ph, w + 2 * pw), dtype=np.float64)
    padded[:, pt : pt + t, ph : ph + h, pw : pw + w] = x.to_numpy()
    weights = kernel.weights.astype(np.float64)

    acc = np.zeros((c, t, h, w), dtype=np.float64)
    for it in range(kt):
        ot = it * dt
        for ih in range(kh):
            oh = ih * dh
            for iw in range(kw):
                ow = iw * dw
                tap = padded[:, ot : ot + t, oh : oh + h, ow : ow + w]
                acc += weights[:, it, ih, iw][:, None, None, None] * tap
    acc += kernel.bias.astype(np.float64)[:, None, None, None]
    return _wrap(acc.astype(np.float32))


def maxpool3d(
    x: Tensor,
    window: tuple[int, int, int],
    stride: tuple[int, int, int],
) -> Tensor:
    """Per-window maximum over ``[C, T, H, W]``; extent per axis is floor((in-win)/stride)+1."""
    if len(x.dims) != 4:
        raise MotionkitError(f"maxpool3d expects [C, T, H, W], got shape {x.dims}")
    c, t, h, w = x.dims
    wt, wh, ww = window
    st, sh, sw = stride
    if min(wt, wh, ww) < 1 or min(st, sh, sw) < 1:
        raise MotionkitError(f"window {window} and stride {stride} must be positive")
    if wt > t or wh > h or ww > w:
        raise MotionkitError(f"pool window {window} larger than input extents {(t, h, w)}")
    ot = (t - wt) // st + 1
    oh = (h - wh) // sh + 1
    ow = (w - ww) // sw + 1

    arr = x.to_numpy()
    out = None
    for it in range(wt):
        for ih in range(wh):
            for iw in range(ww):
                tap = arr[
                    :,
                    it : it + st * ot : st,
                    ih : ih + sh * oh : sh,
                    iw : iw + sw * ow : sw,
                ]
                out = tap.copy() if out is None else np.maximum(out, tap)
    return _wrap(out)


def concat_channels(parts: list[Tensor]) -> Tensor:
    """Concatenate along the leading (channel) axis; all other extents must agree."""
    if not parts:
        raise MotionkitError("concat_channels needs at least one tensor")
    rest = parts[0].dims[1:]
    for p in parts[1:]:
        if p.dims[1:] != rest:
            raise ShapeMismatchError("concat_channels non-channel extents", parts[0].dims, p.dims)
    return _wrap(np.concatenate([p.to_numpy() for p in parts], axis=0))


def channel_slice(x: Tensor, start: int, stop: int) -> Tensor:
    if not 0 <= start < stop <= x.dims[0]:
        raise MotionkitError(f"channel slice [{start}:{stop}] out of range for shape {x.dims}")
    return _wrap(x.to_numpy()[start:stop].copy())


def softmax(v) -> np.ndarray:
    """Numerically stable softmax of a 1-D vector; returns float64 weights."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise MotionkitError("softmax expects a non-empty 1-D vector")
    shifted = arr - np.max(arr)
    e = np.exp(shifted)
    return e / np.sum(e)
