"""motionkit: dynamic-image rank pooling, guidance heatmaps, attention fusion, cell genotypes."""

from .errors import FormatError, MotionkitError, ShapeMismatchError
from .tensor import (
    Kernel3Spec,
    Shape,
    Tensor,
    channel_slice,
    concat_channels,
    conv3d_same,
    elementwise,
    maxpool3d,
    reduce,
    scalar_affine,
    softmax,
)
from .rankpool import (
    FrameSequence,
    RankCoefficients,
    StreamingPooler,
    batch_normalize,
    beta_coefficients,
    minmax_normalize,
    rank_pool_pairwise,
    rank_pool_weighted,
    streaming_init,
    streaming_step,
)
from .bench import BenchReport, bench_compare
from .heatmap import (
    GaussianMapParams,
    GuidancePyramid,
    KeypointSet,
    SmoothingStageTransform,
    StageConfig,
    build_guidance_pyramid,
    cascade_apply,
    cascade_average,
    render_gaussian_map,
)
from .fusion import PointwiseMixer, datt_fuse, satt_fuse
from .nascell import (
    AlphaMatrix,
    CellInstance,
    CellSpec,
    Genotype,
    GenotypeEdge,
    OpKind,
    discretize,
    eval_cell,
    mixed_edge_eval,
    relax,
)
from .losses import LossBreakdown, ProbDist, cross_entropy, mse, multitask

__version__ = "0.1.0"

__all__ = [
    "AlphaMatrix",
    "BenchReport",
    "CellInstance",
    "CellSpec",
    "FormatError",
    "FrameSequence",
    "GaussianMapParams",
    "Genotype",
    "GenotypeEdge",
    "GuidancePyramid",
    "Kernel3Spec",
    "KeypointSet",
    "LossBreakdown",
    "MotionkitError",
    "OpKind",
    "PointwiseMixer",
    "ProbDist",
    "RankCoefficients",
    "Shape",
    "ShapeMismatchError",
    "SmoothingStageTransform",
    "StageConfig",
    "StreamingPooler",
    "Tensor",
    "batch_normalize",
    "bench_compare",
    "beta_coefficients",
    "build_guidance_pyramid",
    "cascade_apply",
    "cascade_average",
    "channel_slice",
    "concat_channels",
    "conv3d_same",
    "cross_entropy",
    "datt_fuse",
    "discretize",
    "elementwise",
    "eval_cell",
    "maxpool3d",
    "minmax_normalize",
    "mixed_edge_eval",
    "mse",
    "multitask",
    "rank_pool_pairwise",
    "rank_pool_weighted",
    "reduce",
    "relax",
    "render_gaussian_map",
    "satt_fuse",
    "scalar_affine",
    "softmax",
    "streaming_init",
    "streaming_step",
]
