"""Dynamic-image computation: pairwise oracle, weighted closed form, streaming recurrence.

A dynamic image summarizes a window of ``T`` frames as a single weighted sum
``sum_t coeff[t] * V_t`` with ``coeff[t] = 2t - T - 1`` (t is 1-based). The
same image equals the sum of all ordered pairwise differences
``sum_{t1 > t2} (V_t1 - V_t2)``, which is the brute-force oracle kept here for
testing and benchmarking.

For a stream, consecutive windows ``[n..m]`` and ``[n+1..m+1]`` are related by

    DI(n+1, m+1) = DI(n, m) + (m-n) * (V_n + V_{m+1}) - 2 * sum_{l=n+1..m} V_l

so each new frame costs a fixed number of per-pixel operations regardless of
the window length. Note both the departing frame ``V_n`` and the arriving
frame ``V_{m+1}`` carry the coefficient ``m - n`` (= window length - 1);
expanding the weighted form confirms this, and the unit tests pin it with a
hand-computed example.

All accumulation is float64; emitted dynamic images are rounded to float32
once. Within one update the operation order is fixed (documented inline) so
an independent implementation can reproduce results bit-exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import MotionkitError, ShapeMismatchError
from .tensor import Tensor, _wrap

DEFAULT_REFRESH_PERIOD = 64


@dataclass(frozen=True)
class RankCoefficients:
    """Integer coefficients ``2t - T - 1`` for a window of length ``T`` (t = 1..T)."""

    window: int
    beta: np.ndarray  # int64, length `window`

    def __post_init__(self):
        object.__setattr__(self, "beta", np.ascontiguousarray(self.beta, dtype=np.int64))


def beta_coefficients(window: int) -> RankCoefficients:
    if window < 2:
        raise MotionkitError(f"a dynamic image needs at least 2 frames, got window {window}")
    t = np.arange(1, window + 1, dtype=np.int64)
    return RankCoefficients(window, 2 * t - window - 1)


class FrameSequence:
    """Ordered per-frame tensors of one shared shape ``[C, H, W]``.

    Math in this module indexes frames 1-based; storage here is 0-based.
    """

    __slots__ = ("frames",)

    def __init__(self, frames):
        frames = tuple(frames)
        if not frames:
            raise MotionkitError("frame sequence must be non-empty")
        first = frames[0].dims
        for f in frames[1:]:
            if f.dims != first:
                raise ShapeMismatchError("frame sequence", first, f.dims)
        self.frames = frames

    @property
    def frame_dims(self) -> tuple[int, ...]:
        return self.frames[0].dims

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i) -> Tensor:
        return self.frames[i]


def rank_pool_pairwise(seq: FrameSequence) -> Tensor:
    """Brute-force oracle: sum of V_t1 - V_t2 over all ordered pairs t1 > t2."""
    if len(seq) < 2:
        raise MotionkitError("pairwise rank pooling needs at least 2 frames")
    frames = [f.to_numpy().astype(np.float64) for f in seq]
    acc = np.zeros_like(frames[0])
    for t1 in range(1, len(frames)):
        for t2 in range(t1):
            acc += frames[t1] - frames[t2]
    return _wrap(acc.astype(np.float32))


def rank_pool_weighted(seq: FrameSequence) -> Tensor:
    """Closed form sum_t coeff[t] * V_t; frames accumulated in time order."""
    if len(seq) < 2:
        raise MotionkitError("rank pooling needs at least 2 frames")
    coeffs = beta_coefficients(len(seq)).beta
    acc = np.zeros(seq.frame_dims, dtype=np.float64)
    for t, frame in enumerate(seq):
        acc += float(coeffs[t]) * frame.to_numpy().astype(np.float64)
    return _wrap(acc.astype(np.float32))


class StreamingPooler:
    """Single-writer sliding-window state emitting one dynamic image per step.

    Holds the ``W`` most recent frames in a ring, the float64 running sum of
    the ring's interior frames (positions 1..W-2), and the current dynamic
    image. Every ``refresh_period`` emitted windows both running quantities
    are recomputed exactly from the ring to arrest float drift.

    Not safe for concurrent mutation; safe to hand off between threads
    between calls.
    """

    __slots__ = (
        "window",
        "refresh_period",
        "_ring",
        "_interior",
        "_di",
        "windows_emitted",
        "_count_ops",
        "op_count",
    )

    def __init__(self, first_window: FrameSequence, refresh_period: int = DEFAULT_REFRESH_PERIOD,
                 count_ops: bool = False):
        if len(first_window) < 2:
            raise MotionkitError(f"streaming window must be >= 2, got {len(first_window)}")
        if refresh_period < 1:
            raise MotionkitError(f"refresh_period must be >= 1, got {refresh_period}")
        self.window = len(first_window)
        self.refresh_period = int(refresh_period)
        self._ring: deque[np.ndarray] = deque(
            f.to_numpy().astype(np.float64) for f in first_window
        )
        self._count_ops = bool(count_ops)
        self.op_count = 0
        self._recompute()
        self.windows_emitted = 1

    # -- state views ---------------------------------------------------------

    @property
    def current_di(self) -> Tensor:
        return _wrap(self._di.astype(np.float32))

    @property
    def interior_sum(self) -> Tensor:
        return _wrap(self._interior.astype(np.float32))

    @property
    def frame_dims(self) -> tuple[int, ...]:
        return tuple(self._ring[0].shape)

    # -- internals -----------------------------------------------------------

    def _recompute(self) -> None:
        """Exact recomputation of the dynamic image and interior sum from the ring."""
        coeffs = beta_coefficients(self.window).beta
        di = np.zeros_like(self._ring[0])
        for t, frame in enumerate(self._ring):
            di += float(coeffs[t]) * frame
        interior = np.zeros_like(self._ring[0])
        for t in range(1, self.window - 1):
            interior += self._ring[t]
        self._di = di
        self._interior = interior

    def _tally(self, array_ops: int) -> None:
        if self._count_ops:
            self.op_count += array_ops * self._ring[0].size

    def step(self, next_frame: Tensor) -> Tensor:
        """Slide the window by one frame and return the new dynamic image."""
        if next_frame.dims != self.frame_dims:
            raise ShapeMismatchError("streaming_step frame", self.frame_dims, next_frame.dims)
        incoming = next_frame.to_numpy().astype(np.float64)
        span = float(self.window - 1)  # (m - n) for a window [n..m]

        # Fixed per-element operation order (mirrored by external
        # reimplementations; in-place buffer reuse does not change rounding):
        #   full     = interior + tail            covers frames n+1..m
        #   edges    = head + incoming
        #   di       = (di + span*edges) - 2*full
        #   interior = full - ring[1]             covers frames n+2..m
        full = self._interior + self._ring[-1]
        edges = self._ring[0] + incoming
        edges *= span
        edges += self._di
        np.subtract(full, self._ring[1], out=self._interior)
        full *= 2.0
        np.subtract(edges, full, out=edges)
        self._di = edges
        self._tally(7)

        self._ring.popleft()
        self._ring.append(incoming)
        self.windows_emitted += 1
        if self.windows_emitted % self.refresh_period == 0:
            self._recompute()
        return self.current_di


def streaming_init(first_window: FrameSequence,
                   refresh_period: int = DEFAULT_REFRESH_PERIOD) -> StreamingPooler:
    return StreamingPooler(first_window, refresh_period)


def streaming_step(state: StreamingPooler, next_frame: Tensor) -> Tensor:
    return state.step(next_frame)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def minmax_normalize(di: Tensor) -> tuple[Tensor, bool]:
    """Rescale to [0, 1] via (x - min) / (max - min).

    A constant input carries no motion: the result is all zeros and the
    returned flag is True ("degenerate range").
    """
    arr = di.to_numpy()
    lo = np.float32(np.min(arr))
    hi = np.float32(np.max(arr))
    if hi == lo:
        return Tensor.zeros(di.dims), True
    span = np.float32(hi - lo)
    return _wrap((arr - lo) / span), False


def batch_normalize(
    dis: list[Tensor],
    gamma: float = 1.0,
    beta_shift: float = 0.0,
    epsilon: float = 1e-5,
) -> list[Tensor]:
    """Normalize a batch: (x - E[x]) / sqrt(Var[x] + eps) * gamma + beta.

    Statistics pool the batch axis only (population variance), so every
    channel and position is standardized across the batch. In particular a
    single-element batch normalizes to all ``beta_shift``.
    """
    if not dis:
        raise MotionkitError("batch_normalize needs a non-empty batch")
    if epsilon <= 0:
        raise MotionkitError(f"epsilon must be positive, got {epsilon}")
    dims = dis[0].dims
    for d in dis[1:]:
        if d.dims != dims:
            raise ShapeMismatchError("batch_normalize batch", dims, d.dims)
    stack = np.stack([d.to_numpy() for d in dis]).astype(np.float64)  # [B, ...]
    mean = stack.mean(axis=0, keepdims=True)
    var = stack.var(axis=0, keepdims=True)
    out = (stack - mean) / np.sqrt(var + epsilon) * gamma + beta_shift
    return [_wrap(out[b].astype(np.float32)) for b in range(out.shape[0])]
