"""Gaussian skeleton heatmaps, the multi-scale guidance pyramid, and the stage cascade.

A guidance heatmap marks hand/arm regions of a frame with Gaussian blobs
centered on skeleton keypoints. Per backbone stage the heatmap is max-pooled
down to the stage's spatial size, subsampled (or replicated) to the stage's
depth, and tiled across the stage's channels, yielding guidance tensors whose
shapes match the stage feature maps exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MotionkitError
from .tensor import Tensor, _wrap, maxpool3d


@dataclass(frozen=True)
class KeypointSet:
    """Skeleton keypoints for one frame: (x, y, confidence) in pixel coordinates.

    May be empty (no person detected); out-of-frame points are allowed and
    simply render a clipped blob.
    """

    points: tuple[tuple[float, float, float], ...]
    frame_width: int
    frame_height: int

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple((float(x), float(y), float(c)) for x, y, c in self.points)
        )
        if self.frame_width < 1 or self.frame_height < 1:
            raise MotionkitError(
                f"frame size must be positive, got {self.frame_width}x{self.frame_height}"
            )


@dataclass(frozen=True)
class GaussianMapParams:
    sigma: float
    combine: str = "max"  # or "sum-clamped"
    amplitude: float = 1.0
    confidence_scaling: bool = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise MotionkitError(f"sigma must be positive, got {self.sigma}")
        if self.combine not in ("max", "sum-clamped"):
            raise MotionkitError(f"combine must be 'max' or 'sum-clamped', got {self.combine!r}")
        if self.amplitude <= 0:
            raise MotionkitError(f"amplitude must be positive, got {self.amplitude}")


def render_gaussian_map(kp: KeypointSet, params: GaussianMapParams) -> Tensor:
    """Render a ``[1, H, W]`` map of Gaussian blobs, one per keypoint.

    Pixel (row i, col j) takes the combine (max or clamped sum) over keypoints
    of ``amplitude * conf? * exp(-((j-x)^2 + (i-y)^2) / (2 sigma^2))``.
    """
    h, w = kp.frame_height, kp.frame_width
    if not kp.points:
        return Tensor.zeros((1, h, w))
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    inv = 1.0 / (2.0 * params.sigma * params.sigma)

    combined = np.zeros((h, w), dtype=np.float64)
    for x, y, conf in kp.points:
        d2 = (xs - x) ** 2 + (ys - y) ** 2
        blob = params.amplitude * np.exp(-d2 * inv)
        if params.confidence_scaling:
            blob = blob * conf
        if params.combine == "max":
            combined = np.maximum(combined, blob)
        else:
            combined = combined + blob
    combined = np.clip(combined, 0.0, params.amplitude)
    return _wrap(combined.astype(np.float32)[None, :, :])


# ---------------------------------------------------------------------------
# guidance pyramid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageConfig:
    """Target shape ``[channels, depth, height, width]`` of one backbone stage."""

    stage: int
    channels: int
    depth: int
    height: int
    width: int

    @staticmethod
    def defaults() -> tuple["StageConfig", ...]:
        return (
            StageConfig(1, 192, 16, 28, 28),
            StageConfig(2, 256, 8, 14, 14),
            StageConfig(3, 512, 4, 7, 7),
        )

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.channels, self.depth, self.height, self.width)


@dataclass(frozen=True)
class GuidancePyramid:
    configs: tuple[StageConfig, ...]
    maps: tuple[Tensor, ...]

    def for_stage(self, stage: int) -> Tensor:
        for cfg, m in zip(self.configs, self.maps):
            if cfg.stage == stage:
                return m
        raise MotionkitError(f"pyramid has no stage {stage}")


def _subsample_indices(available: int, wanted: int) -> list[int]:
    # floor(i * available / wanted): identity when counts match, uniform otherwise
    return [i * available // wanted for i in range(wanted)]


def build_guidance_pyramid(
    frame_maps: list[Tensor],
    configs: tuple[StageConfig, ...] = StageConfig.defaults(),
) -> GuidancePyramid:
    """Resize/tile per-frame ``[1, H, W]`` maps into per-stage guidance tensors.

    A single input map is replicated along depth; a stream of maps must be at
    least as long as the deepest stage and is subsampled uniformly. Spatial
    downscale is a non-overlapping maxpool, so the input size must be divisible
    by every stage's target size.
    """
    if not frame_maps:
        raise MotionkitError("guidance pyramid needs at least one frame map")
    dims = frame_maps[0].dims
    if len(dims) != 3 or dims[0] != 1:
        raise MotionkitError(f"frame maps must be [1, H, W], got {dims}")
    for m in frame_maps[1:]:
        if m.dims != dims:
            raise MotionkitError(f"frame maps must share one shape, got {dims} and {m.dims}")
    _, in_h, in_w = dims
    max_depth = max(cfg.depth for cfg in configs)
    if len(frame_maps) != 1 and len(frame_maps) < max_depth:
        raise MotionkitError(
            f"need >= {max_depth} frame maps to fill the deepest stage, got {len(frame_maps)}"
        )

    out = []
    for cfg in configs:
        if in_h % cfg.height != 0 or in_w % cfg.width != 0:
            raise MotionkitError(
                f"stage {cfg.stage}: input {in_h}x{in_w} not divisible by target "
                f"{cfg.height}x{cfg.width}"
            )
        rh, rw = in_h // cfg.height, in_w // cfg.width
        if len(frame_maps) == 1:
            chosen = [0] * cfg.depth
        else:
            chosen = _subsample_indices(len(frame_maps), cfg.depth)
        pooled = np.empty((cfg.depth, cfg.height, cfg.width), dtype=np.float32)
        cache: dict[int, np.ndarray] = {}
        for slot, idx in enumerate(chosen):
            if idx not in cache:
                lifted = Tensor.from_values(frame_maps[idx].to_numpy()[None, :, :, :])
                small = maxpool3d(lifted, (1, rh, rw), (1, rh, rw))
                cache[idx] = small.to_numpy()[0, 0]
            pooled[slot] = cache[idx]
        tiled = np.broadcast_to(pooled[None, :, :, :], cfg.dims)
        out.append(_wrap(np.ascontiguousarray(tiled)))
    return GuidancePyramid(tuple(configs), tuple(out))


# ---------------------------------------------------------------------------
# stage cascade
# ---------------------------------------------------------------------------


def cascade_apply(stages, frame: Tensor) -> list[Tensor]:
    """Run a cascade of stage transforms: stage 1 sees the frame, later stages
    see (frame, previous map). Each transform is ``f(frame, prev_or_None) -> Tensor``."""
    stages = list(stages)
    if not stages:
        raise MotionkitError("cascade needs at least one stage")
    maps: list[Tensor] = []
    prev: Tensor | None = None
    for transform in stages:
        prev = transform(frame, prev)
        maps.append(prev)
    return maps


def cascade_average(stage_maps: list[Tensor]) -> Tensor:
    """Elementwise mean over the per-stage predicted maps."""
    if not stage_maps:
        raise MotionkitError("cascade_average needs at least one map")
    dims = stage_maps[0].dims
    for m in stage_maps[1:]:
        if m.dims != dims:
            raise MotionkitError(f"stage maps must share one shape, got {dims} and {m.dims}")
    acc = np.zeros(dims, dtype=np.float64)
    for m in stage_maps:
        acc += m.to_numpy()
    return _wrap((acc / len(stage_maps)).astype(np.float32))


@dataclass
class SmoothingStageTransform:
    """Reference non-learned stage transform for exercising the cascade.

    Stage 1 emits a frame-intensity proxy (channel mean rescaled to [0, 1]);
    later stages blend a separable Gaussian smoothing of the previous map
    50/50 with that proxy. Stands in for a trained per-stage predictor.
    """

    sigma: float = 2.0
    _proxy_cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def _intensity_proxy(self, frame: Tensor) -> np.ndarray:
        key = id(frame)
        if key not in self._proxy_cache:
            arr = frame.to_numpy().astype(np.float64)
            intensity = arr.mean(axis=0)  # collapse channels
            lo, hi = intensity.min(), intensity.max()
            if hi > lo:
                intensity = (intensity - lo) / (hi - lo)
            else:
                intensity = np.zeros_like(intensity)
            self._proxy_cache = {key: intensity}
        return self._proxy_cache[key]

    def _smooth(self, plane: np.ndarray) -> np.ndarray:
        radius = max(1, int(round(3.0 * self.sigma)))
        offsets = np.arange(-radius, radius + 1, dtype=np.float64)
        kernel = np.exp(-(offsets**2) / (2.0 * self.sigma**2))
        kernel /= kernel.sum()
        padded = np.pad(plane, radius, mode="edge")
        rows = np.zeros_like(padded)
        for k, coef in zip(range(-radius, radius + 1), kernel):
            rows += coef * np.roll(padded, k, axis=0)
        cols = np.zeros_like(rows)
        for k, coef in zip(range(-radius, radius + 1), kernel):
            cols += coef * np.roll(rows, k, axis=1)
        return cols[radius:-radius, radius:-radius]

    def __call__(self, frame: Tensor, prev: Tensor | None) -> Tensor:
        proxy = self._intensity_proxy(frame)
        if prev is None:
            return _wrap(proxy.astype(np.float32)[None, :, :])
        smoothed = self._smooth(prev.to_numpy()[0].astype(np.float64))
        blended = 0.5 * smoothed + 0.5 * proxy
        return _wrap(blended.astype(np.float32)[None, :, :])
