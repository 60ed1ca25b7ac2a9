"""Benchmark harness comparing the three dynamic-image computations.

Times the O(T^2)-per-window pairwise oracle, the O(T)-per-window weighted
form, and the O(1)-per-window streaming recurrence on one synthetic stream.
Outputs are cross-checked before any timing: the harness refuses to time
code whose results disagree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import MotionkitError
from .rankpool import FrameSequence, StreamingPooler, rank_pool_pairwise, rank_pool_weighted
from .tensor import Tensor

METHODS = ("pairwise", "weighted", "streaming")


@dataclass(frozen=True)
class BenchSample:
    method: str
    repeat: int  # 1-based
    seconds: float


@dataclass
class BenchReport:
    frames: int
    window: int
    frame_shape: tuple[int, int, int]  # (C, H, W)
    repeats: int
    samples: list[BenchSample] = field(default_factory=list)

    def seconds(self, method: str, repeat: int) -> float:
        for s in self.samples:
            if s.method == method and s.repeat == repeat:
                return s.seconds
        raise MotionkitError(f"no sample for method={method} repeat={repeat}")

    def best_seconds(self, method: str) -> float:
        times = [s.seconds for s in self.samples if s.method == method]
        if not times:
            raise MotionkitError(f"no samples for method={method}")
        return min(times)

    def speedup_vs_pairwise(self, method: str) -> float:
        return self.best_seconds("pairwise") / self.best_seconds(method)


def _relative_agree(a: np.ndarray, b: np.ndarray, rtol: float, atol: float) -> bool:
    diff = np.abs(a.astype(np.float64) - b.astype(np.float64))
    scale = np.maximum(np.abs(a).astype(np.float64), np.abs(b).astype(np.float64))
    return bool(np.all(diff <= np.maximum(rtol * scale, atol)))


def _windows(frames: list[Tensor], window: int):
    for start in range(len(frames) - window + 1):
        yield FrameSequence(frames[start : start + window])


def _run_pairwise(frames: list[Tensor], window: int) -> list[Tensor]:
    return [rank_pool_pairwise(win) for win in _windows(frames, window)]


def _run_weighted(frames: list[Tensor], window: int) -> list[Tensor]:
    return [rank_pool_weighted(win) for win in _windows(frames, window)]


def _run_streaming(frames: list[Tensor], window: int) -> list[Tensor]:
    pooler = StreamingPooler(FrameSequence(frames[:window]))
    out = [pooler.current_di]
    for frame in frames[window:]:
        out.append(pooler.step(frame))
    return out


_RUNNERS = {"pairwise": _run_pairwise, "weighted": _run_weighted, "streaming": _run_streaming}


def bench_compare(
    frames: int,
    window: int,
    frame_shape: tuple[int, int, int],
    repeats: int = 3,
    seed: int = 0,
    rtol: float = 1e-4,
    atol: float = 1e-6,
) -> BenchReport:
    """Time all three methods over one synthetic stream, gated on agreement."""
    if window < 2:
        raise MotionkitError(f"window must be >= 2, got {window}")
    if frames <= window:
        raise MotionkitError(f"need frames > window, got frames={frames} window={window}")
    if repeats < 1:
        raise MotionkitError(f"repeats must be >= 1, got {repeats}")

    rng = np.random.default_rng(seed)
    stream = [
        Tensor.from_values(rng.standard_normal(frame_shape).astype(np.float32))
        for _ in range(frames)
    ]

    # Correctness gate: every window must agree across all three methods.
    outputs = {name: runner(stream, window) for name, runner in _RUNNERS.items()}
    reference = outputs["weighted"]
    for name in ("pairwise", "streaming"):
        for i, (got, want) in enumerate(zip(outputs[name], reference)):
            if not _relative_agree(got.to_numpy(), want.to_numpy(), rtol, atol):
                raise MotionkitError(
                    f"benchmark gate: {name} disagrees with weighted at window {i} "
                    f"beyond rtol={rtol}; refusing to time incorrect code"
                )

    report = BenchReport(frames, window, tuple(frame_shape), repeats)
    for repeat in range(1, repeats + 1):
        for name, runner in _RUNNERS.items():
            start = time.perf_counter()
            runner(stream, window)
            elapsed = time.perf_counter() - start
            report.samples.append(BenchSample(name, repeat, elapsed))
    return report
