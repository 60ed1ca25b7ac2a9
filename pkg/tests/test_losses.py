"""Loss term tests."""

import math

import numpy as np
import pytest

from motionkit import (
    MotionkitError,
    ProbDist,
    ShapeMismatchError,
    Tensor,
    cross_entropy,
    mse,
    multitask,
)


def random_dist(rng, k):
    raw = rng.uniform(0.05, 1.0, size=k)
    return ProbDist(raw / raw.sum())


class TestProbDist:
    def test_rejects_bad_sum(self):
        with pytest.raises(MotionkitError):
            ProbDist([0.5, 0.6])

    def test_rejects_out_of_range(self):
        with pytest.raises(MotionkitError):
            ProbDist([1.5, -0.5])


class TestCrossEntropy:
    def test_matching_one_hot_near_zero(self):
        truth = ProbDist.one_hot(1, 3)
        assert cross_entropy(truth, truth) == pytest.approx(0.0, abs=1e-9)

    def test_uniform_prediction_is_log_k(self):
        truth = ProbDist.one_hot(2, 4)
        assert cross_entropy(truth, ProbDist.uniform(4)) == pytest.approx(
            math.log(4), abs=1e-9
        )

    def test_self_entropy_uniform(self):
        for k in (2, 5, 10):
            u = ProbDist.uniform(k)
            assert cross_entropy(u, u) == pytest.approx(math.log(k), abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            cross_entropy(ProbDist.uniform(3), ProbDist.uniform(4))

    def test_gibbs_inequality(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            k = int(rng.integers(2, 12))
            truth = random_dist(rng, k)
            other = random_dist(rng, k)
            assert cross_entropy(truth, truth) <= cross_entropy(truth, other) + 1e-9


class TestMse:
    def test_equal_inputs_zero(self):
        x = Tensor.from_values(np.arange(6, dtype=np.float32), (2, 3))
        assert mse(x, x) == 0.0

    def test_offset_by_one(self):
        x = Tensor.zeros((3, 4))
        y = Tensor.full((3, 4), 1.0)
        assert mse(y, x) == pytest.approx(1.0, abs=1e-12)

    def test_hand_case(self):
        # (0 + 4) / 2
        assert mse(Tensor.from_values([0.0, 0.0]), Tensor.from_values([0.0, 2.0])) == 2.0

    def test_symmetric_nonnegative(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = Tensor.from_values(rng.standard_normal((2, 5)).astype(np.float32))
            b = Tensor.from_values(rng.standard_normal((2, 5)).astype(np.float32))
            assert mse(a, b) == mse(b, a) >= 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            mse(Tensor.zeros((2, 2)), Tensor.zeros((4,)))


class TestMultitask:
    def test_paper_weighting(self):
        breakdown = multitask(1.0, 0.01, gamma=100.0)
        assert breakdown.total == pytest.approx(2.0, abs=1e-12)

    def test_zero_heatmap_term(self):
        assert multitask(0.75, 0.0, gamma=100.0).total == 0.75

    def test_pure_heatmap_term(self):
        assert multitask(0.0, 0.125, gamma=100.0).total == 100.0 * 0.125

    def test_total_matches_expression_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            cls = float(rng.uniform(0, 5))
            hm = float(rng.uniform(0, 0.5))
            breakdown = multitask(cls, hm)
            assert breakdown.gamma == 100.0
            assert breakdown.total == breakdown.cls + breakdown.gamma * breakdown.hm

    def test_affine_in_hm(self):
        base = multitask(1.0, 0.0, gamma=100.0).total
        for hm in (0.1, 0.2, 0.4):
            assert multitask(1.0, hm, gamma=100.0).total - base == pytest.approx(
                100.0 * hm, rel=1e-12
            )

    def test_rejects_non_finite(self):
        with pytest.raises(MotionkitError):
            multitask(float("nan"), 0.0)
