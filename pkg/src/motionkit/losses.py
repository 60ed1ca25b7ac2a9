"""Forward-only loss terms: cross-entropy, heatmap MSE, and their weighted sum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MotionkitError, ShapeMismatchError
from .tensor import Tensor

DEFAULT_GAMMA = 100.0
DEFAULT_LOG_EPSILON = 1e-12


class ProbDist:
    """Probability vector over K classes: entries in [0, 1], summing to 1 (tol 1e-6)."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        arr = np.ascontiguousarray(probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise MotionkitError("probability distribution must be a non-empty vector")
        if np.any(arr < 0) or np.any(arr > 1):
            raise MotionkitError("probabilities must lie in [0, 1]")
        total = float(arr.sum())
        if abs(total - 1.0) > 1e-6:
            raise MotionkitError(f"probabilities must sum to 1 (got {total})")
        arr.setflags(write=False)
        self.probs = arr

    @classmethod
    def one_hot(cls, index: int, k: int) -> "ProbDist":
        v = np.zeros(k, dtype=np.float64)
        v[index] = 1.0
        return cls(v)

    @classmethod
    def uniform(cls, k: int) -> "ProbDist":
        return cls(np.full(k, 1.0 / k, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.probs.size)


def cross_entropy(truth: ProbDist, pred: ProbDist,
                  epsilon: float = DEFAULT_LOG_EPSILON) -> float:
    """-sum_k truth_k * ln(max(pred_k, epsilon)); natural log."""
    if epsilon <= 0:
        raise MotionkitError(f"epsilon must be positive, got {epsilon}")
    if len(truth) != len(pred):
        raise ShapeMismatchError("cross_entropy", (len(truth),), (len(pred),))
    clamped = np.maximum(pred.probs, epsilon)
    return float(-np.sum(truth.probs * np.log(clamped)))


def mse(pred: Tensor, target: Tensor) -> float:
    """Mean of squared differences (mean per element, not sum)."""
    if pred.dims != target.dims:
        raise ShapeMismatchError("mse", pred.dims, target.dims)
    diff = pred.to_numpy().astype(np.float64) - target.to_numpy().astype(np.float64)
    return float(np.mean(diff * diff))


@dataclass(frozen=True)
class LossBreakdown:
    cls: float
    hm: float
    gamma: float
    total: float

    def __post_init__(self):
        if not (math.isfinite(self.cls) and math.isfinite(self.hm) and math.isfinite(self.gamma)):
            raise MotionkitError("loss terms must be finite")
        if self.cls < 0 or self.hm < 0:
            raise MotionkitError("loss terms must be non-negative")


def multitask(cls: float, hm: float, gamma: float = DEFAULT_GAMMA) -> LossBreakdown:
    """Combine the classification and heatmap terms: total = cls + gamma * hm."""
    return LossBreakdown(cls=cls, hm=hm, gamma=gamma, total=cls + gamma * hm)
