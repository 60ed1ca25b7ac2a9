"""Cell search space: seven candidate ops, softmax relaxation, DAG evaluation, discretization.

A cell is a DAG with 2 input nodes, 4 intermediate nodes, and 1 output node.
Every edge (i, j) with i < j into an intermediate node carries a 7-way logit
vector over the candidate operations; relaxation turns logits into mixture
weights, evaluation computes each intermediate node as the sum over incoming
edges of the weighted op mixture, and the output node concatenates the four
intermediate nodes along channels (C -> 4C).

Discretization keeps, per edge, the strongest non-Zero operation, and per
intermediate node the ``retain_k`` incoming edges with the strongest kept
operations. Conv ops here carry fixed depthwise reference parameters
(identity for 1x1x1, normalized box filters otherwise); no training happens
in this library, so cell evaluation is a structural/numerical tool rather
than a learned network.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import MotionkitError, ShapeMismatchError
from .tensor import Kernel3Spec, Tensor, concat_channels, conv3d_same, softmax, _wrap


class OpKind(enum.IntEnum):
    """Candidate operations; ordinal positions are stable (serialization relies on them)."""

    ZERO = 0
    IDENTITY = 1
    DIL_3X3X3 = 2
    CONV_1X1X1 = 3
    CONV_3X3X3 = 4
    CONV_1X3X3 = 5
    CONV_3X1X1 = 6


OP_NAMES = {
    OpKind.ZERO: "zero",
    OpKind.IDENTITY: "identity",
    OpKind.DIL_3X3X3: "dil_3x3x3",
    OpKind.CONV_1X1X1: "conv_1x1x1",
    OpKind.CONV_3X3X3: "conv_3x3x3",
    OpKind.CONV_1X3X3: "conv_1x3x3",
    OpKind.CONV_3X1X1: "conv_3x1x1",
}
OPS_BY_NAME = {v: k for k, v in OP_NAMES.items()}
NUM_OPS = len(OpKind)

_CONV_EXTENTS = {
    OpKind.DIL_3X3X3: ((3, 3, 3), (2, 2, 2)),  # dilation fixed at 2 per axis
    OpKind.CONV_1X1X1: ((1, 1, 1), (1, 1, 1)),
    OpKind.CONV_3X3X3: ((3, 3, 3), (1, 1, 1)),
    OpKind.CONV_1X3X3: ((1, 3, 3), (1, 1, 1)),
    OpKind.CONV_3X1X1: ((3, 1, 1), (1, 1, 1)),
}


@dataclass(frozen=True)
class CellSpec:
    """Topology constants: node ids are 0,1 (inputs), 2..5 (intermediate), 6 (output)."""

    num_inputs: int = 2
    num_intermediate: int = 4

    @property
    def num_nodes(self) -> int:
        return self.num_inputs + self.num_intermediate + 1

    @property
    def intermediate_nodes(self) -> tuple[int, ...]:
        return tuple(range(self.num_inputs, self.num_inputs + self.num_intermediate))

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for j in self.intermediate_nodes:
            for i in range(j):
                out.append((i, j))
        return tuple(out)


class AlphaMatrix:
    """One 7-way logit vector per cell edge, ordered as :attr:`CellSpec.edges`."""

    __slots__ = ("spec", "logits")

    def __init__(self, logits, spec: CellSpec = CellSpec()):
        arr = np.ascontiguousarray(logits, dtype=np.float64)
        expected = (len(spec.edges), NUM_OPS)
        if arr.shape != expected:
            raise MotionkitError(f"alpha logits must have shape {expected}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise MotionkitError("alpha logits must be finite")
        arr.setflags(write=False)
        self.spec = spec
        self.logits = arr

    @classmethod
    def random(cls, rng: np.random.Generator, spec: CellSpec = CellSpec()) -> "AlphaMatrix":
        return cls(rng.standard_normal((len(spec.edges), NUM_OPS)), spec)

    def edge_logits(self, i: int, j: int) -> np.ndarray:
        return self.logits[self.spec.edges.index((i, j))]


def relax(alpha: AlphaMatrix) -> np.ndarray:
    """Per-edge softmax of the logits; rows are positive and sum to 1."""
    return np.stack([softmax(row) for row in alpha.logits])


# ---------------------------------------------------------------------------
# cell evaluation
# ---------------------------------------------------------------------------


class CellInstance:
    """A cell with concrete per-edge op parameters for channel width ``C``.

    One shared parameter set per op kind (reference initializations) is enough
    for structural evaluation; per-edge parameter overrides are accepted for
    completeness.
    """

    def __init__(self, channels: int, spec: CellSpec = CellSpec(),
                 kernels: dict[OpKind, Kernel3Spec] | None = None):
        if channels < 1:
            raise MotionkitError(f"channels must be >= 1, got {channels}")
        self.spec = spec
        self.channels = int(channels)
        if kernels is None:
            kernels = {
                OpKind.CONV_1X1X1: Kernel3Spec.identity(channels),
                OpKind.CONV_3X3X3: Kernel3Spec.box(channels, (3, 3, 3)),
                OpKind.CONV_1X3X3: Kernel3Spec.box(channels, (1, 3, 3)),
                OpKind.CONV_3X1X1: Kernel3Spec.box(channels, (3, 1, 1)),
                OpKind.DIL_3X3X3: Kernel3Spec.box(channels, (3, 3, 3), dilation=(2, 2, 2)),
            }
        for kind, (extent, dilation) in _CONV_EXTENTS.items():
            k = kernels.get(kind)
            if k is None:
                raise MotionkitError(f"missing kernel parameters for {OP_NAMES[kind]}")
            if k.extent != extent or k.dilation != dilation or k.channels != channels:
                raise MotionkitError(
                    f"kernel for {OP_NAMES[kind]} must be extent={extent} dilation={dilation} "
                    f"channels={channels}"
                )
        self.kernels = dict(kernels)

    def apply_op(self, kind: OpKind, x: Tensor) -> Tensor:
        if kind == OpKind.ZERO:
            return Tensor.zeros(x.dims)
        if kind == OpKind.IDENTITY:
            return x
        return conv3d_same(x, self.kernels[kind])


def mixed_edge_eval(cell: CellInstance, eta: np.ndarray, x: Tensor) -> Tensor:
    """Weighted sum over all candidate ops applied to ``x``.

    Zero contributes nothing; Identity contributes ``x`` itself.
    """
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != (NUM_OPS,):
        raise MotionkitError(f"need {NUM_OPS} op weights, got shape {eta.shape}")
    if len(x.dims) != 4 or x.dims[0] != cell.channels:
        raise ShapeMismatchError("mixed_edge_eval input", (cell.channels, -1, -1, -1), x.dims)
    acc = np.zeros(x.dims, dtype=np.float64)
    for kind in OpKind:
        weight = eta[int(kind)]
        if kind == OpKind.ZERO or weight == 0.0:
            continue
        acc += weight * cell.apply_op(kind, x).to_numpy().astype(np.float64)
    return _wrap(acc.astype(np.float32))


def eval_cell(cell: CellInstance, alpha: AlphaMatrix, in0: Tensor, in1: Tensor) -> Tensor:
    """Evaluate the relaxed cell DAG; output concatenates the intermediate nodes (4C channels)."""
    if alpha.spec != cell.spec:
        raise MotionkitError("alpha and cell use different cell topologies")
    if in0.dims != in1.dims:
        raise ShapeMismatchError("eval_cell inputs", in0.dims, in1.dims)
    if len(in0.dims) != 4 or in0.dims[0] != cell.channels:
        raise ShapeMismatchError("eval_cell input", (cell.channels, -1, -1, -1), in0.dims)

    eta = relax(alpha)
    edge_index = {edge: k for k, edge in enumerate(cell.spec.edges)}
    nodes: list[Tensor] = [in0, in1]
    for j in cell.spec.intermediate_nodes:
        acc = np.zeros(in0.dims, dtype=np.float64)
        for i in range(j):
            contribution = mixed_edge_eval(cell, eta[edge_index[(i, j)]], nodes[i])
            acc += contribution.to_numpy().astype(np.float64)
        nodes.append(_wrap(acc.astype(np.float32)))
    return concat_channels([nodes[j] for j in cell.spec.intermediate_nodes])


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenotypeEdge:
    source: int
    op: OpKind

    def __post_init__(self):
        if self.op == OpKind.ZERO:
            raise MotionkitError("genotype edges never carry the Zero op")


@dataclass(frozen=True)
class Genotype:
    """Discrete architecture: per intermediate node, its retained incoming edges."""

    retain_k: int
    nodes: tuple[tuple[int, tuple[GenotypeEdge, ...]], ...]

    def __post_init__(self):
        if self.retain_k < 1:
            raise MotionkitError(f"retain_k must be >= 1, got {self.retain_k}")
        if not self.nodes:
            raise MotionkitError("genotype must cover at least one node")
        for node, edges in self.nodes:
            if not edges:
                raise MotionkitError(f"node {node} retains no edges")
            for e in edges:
                if e.source >= node:
                    raise MotionkitError(
                        f"edge source {e.source} must precede its target node {node}"
                    )


def _best_non_zero(logits: np.ndarray) -> tuple[OpKind, float]:
    # argmax over non-Zero ops; np.argmax takes the first (lowest-ordinal) max
    non_zero = logits[1:]
    idx = int(np.argmax(non_zero)) + 1
    return OpKind(idx), float(logits[idx])


def discretize(alpha: AlphaMatrix, retain_k: int = 2) -> Genotype:
    """Pick each edge's strongest non-Zero op, then the strongest edges per node.

    Ties break deterministically: lowest op ordinal, then lowest source index.
    Nodes with fewer incoming edges than ``retain_k`` keep all of them.
    """
    if retain_k < 1:
        raise MotionkitError(f"retain_k must be >= 1, got {retain_k}")
    spec = alpha.spec
    edge_index = {edge: k for k, edge in enumerate(spec.edges)}
    nodes = []
    for j in spec.intermediate_nodes:
        candidates = []
        for i in range(j):
            op, logit = _best_non_zero(alpha.logits[edge_index[(i, j)]])
            candidates.append((i, op, logit))
        candidates.sort(key=lambda c: (-c[2], c[0]))
        kept = candidates[: min(retain_k, len(candidates))]
        kept.sort(key=lambda c: c[0])  # canonical order: ascending source
        nodes.append((j, tuple(GenotypeEdge(i, op) for i, op, _ in kept)))
    return Genotype(retain_k, tuple(nodes))
