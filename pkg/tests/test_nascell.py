"""Cell search space tests: relaxation, mixed ops, DAG evaluation, discretization."""

import numpy as np
import pytest

from motionkit import (
    AlphaMatrix,
    CellInstance,
    CellSpec,
    Genotype,
    GenotypeEdge,
    MotionkitError,
    OpKind,
    Tensor,
    discretize,
    eval_cell,
    mixed_edge_eval,
    relax,
)
from motionkit.nascell import NUM_OPS


def one_hot_alpha(kind: OpKind, strength: float = 30.0) -> AlphaMatrix:
    spec = CellSpec()
    logits = np.zeros((len(spec.edges), NUM_OPS))
    logits[:, int(kind)] = strength
    return AlphaMatrix(logits, spec)


def one_hot_eta(kind: OpKind) -> np.ndarray:
    eta = np.zeros(NUM_OPS)
    eta[int(kind)] = 1.0
    return eta


class TestCellSpec:
    def test_topology_constants(self):
        spec = CellSpec()
        assert spec.num_nodes == 7
        assert spec.intermediate_nodes == (2, 3, 4, 5)
        assert len(spec.edges) == 2 + 3 + 4 + 5 == 14

    def test_op_order_is_stable(self):
        assert [int(k) for k in OpKind] == [0, 1, 2, 3, 4, 5, 6]
        assert OpKind.ZERO == 0 and OpKind.CONV_3X1X1 == 6


class TestRelax:
    def test_zero_logits_uniform(self):
        eta = relax(AlphaMatrix(np.zeros((14, NUM_OPS))))
        np.testing.assert_allclose(eta, 1.0 / NUM_OPS, atol=1e-12)

    def test_dominant_logit(self):
        logits = np.zeros((14, NUM_OPS))
        logits[:, 3] = 20.0
        eta = relax(AlphaMatrix(logits))
        assert np.all(np.abs(eta[:, 3] - 1.0) < 1e-6)

    def test_rows_sum_to_one_positive(self):
        rng = np.random.default_rng(0)
        eta = relax(AlphaMatrix.random(rng))
        assert np.all(eta > 0)
        np.testing.assert_allclose(eta.sum(axis=1), 1.0, atol=1e-6)

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        alpha = AlphaMatrix.random(rng)
        shifted = AlphaMatrix(alpha.logits + 17.5)
        np.testing.assert_allclose(relax(alpha), relax(shifted), atol=1e-6)


class TestMixedEdgeEval:
    def test_identity_one_hot(self):
        rng = np.random.default_rng(2)
        cell = CellInstance(channels=3)
        x = Tensor.from_values(rng.standard_normal((3, 2, 4, 4)).astype(np.float32))
        assert mixed_edge_eval(cell, one_hot_eta(OpKind.IDENTITY), x) == x

    def test_zero_one_hot(self):
        cell = CellInstance(channels=2)
        x = Tensor.full((2, 2, 3, 3), 1.5)
        assert mixed_edge_eval(cell, one_hot_eta(OpKind.ZERO), x) == Tensor.zeros(x.dims)

    def test_half_identity_half_zero(self):
        rng = np.random.default_rng(3)
        cell = CellInstance(channels=2)
        x = rng.standard_normal((2, 2, 3, 3)).astype(np.float32)
        eta = np.zeros(NUM_OPS)
        eta[int(OpKind.ZERO)] = 0.5
        eta[int(OpKind.IDENTITY)] = 0.5
        out = mixed_edge_eval(cell, eta, Tensor.from_values(x))
        np.testing.assert_allclose(out.to_numpy(), 0.5 * x, rtol=1e-6, atol=1e-7)

    def test_all_ops_preserve_shape(self):
        cell = CellInstance(channels=4)
        x = Tensor.full((4, 3, 5, 5), 0.5)
        for kind in OpKind:
            assert cell.apply_op(kind, x).dims == x.dims


class TestEvalCell:
    def test_all_zero_alpha(self):
        cell = CellInstance(channels=2)
        alpha = one_hot_alpha(OpKind.ZERO, strength=40.0)
        out = eval_cell(cell, alpha, Tensor.full((2, 2, 3, 3), 1.0), Tensor.full((2, 2, 3, 3), 2.0))
        assert out.dims == (8, 2, 3, 3)
        assert np.all(np.abs(out.to_numpy()) < 1e-9)

    def test_identity_dag_oracle(self):
        # hand-evaluated DAG on 1x1x1x1 tensors with in0 = in1 = 1:
        # every node sums its predecessors, so m2 = 2, m3 = 4, m4 = 8, m5 = 16
        cell = CellInstance(channels=1)
        alpha = one_hot_alpha(OpKind.IDENTITY, strength=40.0)
        one = Tensor.full((1, 1, 1, 1), 1.0)
        out = eval_cell(cell, alpha, one, one)
        assert out.dims == (4, 1, 1, 1)
        np.testing.assert_allclose(
            out.to_numpy().ravel(), [2.0, 4.0, 8.0, 16.0], rtol=1e-6
        )

    @pytest.mark.parametrize("channels", [8, 192])
    def test_output_channel_extent(self, channels):
        cell = CellInstance(channels=channels)
        alpha = one_hot_alpha(OpKind.ZERO, strength=40.0)
        x = Tensor.full((channels, 1, 2, 2), 0.5)
        assert eval_cell(cell, alpha, x, x).dims == (4 * channels, 1, 2, 2)

    def test_linear_in_inputs(self):
        rng = np.random.default_rng(4)
        cell = CellInstance(channels=2)
        alpha = AlphaMatrix.random(rng)
        a0 = rng.standard_normal((2, 2, 3, 3)).astype(np.float32)
        a1 = rng.standard_normal((2, 2, 3, 3)).astype(np.float32)
        b0 = rng.standard_normal((2, 2, 3, 3)).astype(np.float32)
        b1 = rng.standard_normal((2, 2, 3, 3)).astype(np.float32)
        t = Tensor.from_values
        mixed = eval_cell(cell, alpha, t(2.0 * a0 + 3.0 * b0), t(2.0 * a1 + 3.0 * b1))
        want = (
            2.0 * eval_cell(cell, alpha, t(a0), t(a1)).to_numpy().astype(np.float64)
            + 3.0 * eval_cell(cell, alpha, t(b0), t(b1)).to_numpy().astype(np.float64)
        )
        np.testing.assert_allclose(mixed.to_numpy(), want, rtol=1e-5, atol=1e-5)

    @pytest.mark.parametrize("kind", [OpKind.IDENTITY, OpKind.CONV_3X3X3, OpKind.CONV_1X1X1])
    def test_mixed_op_converges_to_pure_cell(self, kind):
        rng = np.random.default_rng(int(kind))
        cell = CellInstance(channels=2)
        in0 = Tensor.from_values(rng.standard_normal((2, 2, 4, 4)).astype(np.float32))
        in1 = Tensor.from_values(rng.standard_normal((2, 2, 4, 4)).astype(np.float32))
        relaxed = eval_cell(cell, one_hot_alpha(kind, strength=30.0), in0, in1).to_numpy()

        # pure cell: every edge applies exactly `kind`
        nodes = [in0, in1]
        for j in cell.spec.intermediate_nodes:
            acc = np.zeros(in0.dims, dtype=np.float64)
            for i in range(j):
                acc += cell.apply_op(kind, nodes[i]).to_numpy().astype(np.float64)
            nodes.append(Tensor.from_values(acc.astype(np.float32)))
        pure = np.concatenate([nodes[j].to_numpy() for j in cell.spec.intermediate_nodes])
        np.testing.assert_allclose(relaxed, pure, atol=1e-4)


class TestDiscretize:
    def test_zero_excluded_even_when_strongest(self):
        spec = CellSpec()
        logits = np.zeros((14, NUM_OPS))
        logits[:, int(OpKind.ZERO)] = 100.0
        logits[:, int(OpKind.IDENTITY)] = 1.0
        genotype = discretize(AlphaMatrix(logits, spec))
        for _, edges in genotype.nodes:
            for e in edges:
                assert e.op == OpKind.IDENTITY

    def test_tie_breaks(self):
        # all-equal logits: op -> Identity (lowest non-Zero ordinal),
        # retained edges -> sources 0 and 1 (lowest indices)
        genotype = discretize(AlphaMatrix(np.zeros((14, NUM_OPS))), retain_k=2)
        for node, edges in genotype.nodes:
            assert [e.source for e in edges] == [0, 1]
            assert all(e.op == OpKind.IDENTITY for e in edges)

    def test_retain_all_edges(self):
        rng = np.random.default_rng(5)
        genotype = discretize(AlphaMatrix.random(rng), retain_k=5)
        sizes = {node: len(edges) for node, edges in genotype.nodes}
        assert sizes == {2: 2, 3: 3, 4: 4, 5: 5}

    def test_exactly_retain_k(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            genotype = discretize(AlphaMatrix.random(rng), retain_k=2)
            assert all(len(edges) == 2 for _, edges in genotype.nodes)

    def test_never_zero_on_random_draws(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            genotype = discretize(AlphaMatrix.random(rng))
            for _, edges in genotype.nodes:
                assert all(e.op != OpKind.ZERO for e in edges)

    def test_scale_and_shift_invariance(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            alpha = AlphaMatrix.random(rng)
            base = discretize(alpha, retain_k=2)
            scaled = discretize(AlphaMatrix(alpha.logits * 3.5), retain_k=2)
            shifted = discretize(AlphaMatrix(alpha.logits + 11.25), retain_k=2)
            assert scaled == base
            assert shifted == base

    def test_sources_precede_targets(self):
        rng = np.random.default_rng(9)
        genotype = discretize(AlphaMatrix.random(rng))
        for node, edges in genotype.nodes:
            assert all(e.source < node for e in edges)


class TestGenotypeValidation:
    def test_zero_edge_rejected(self):
        with pytest.raises(MotionkitError):
            GenotypeEdge(0, OpKind.ZERO)

    def test_empty_retention_rejected(self):
        with pytest.raises(MotionkitError):
            Genotype(1, ((2, ()),))

    def test_source_after_target_rejected(self):
        with pytest.raises(MotionkitError):
            Genotype(1, ((2, (GenotypeEdge(3, OpKind.IDENTITY),)),))
