"""Command-line surface: dynamic images, heatmaps, fusion, genotypes, benchmarking.

Exit codes: 0 success, 1 usage error, 2 data error. Each successful run prints
exactly one summary line to stdout ("<subcommand>: <n> outputs, k=v..."); all
data goes to files. No output file is written on an error exit: every
subcommand computes its results fully before touching the filesystem.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io_formats
from .bench import bench_compare
from .errors import FormatError, MotionkitError
from .fusion import PointwiseMixer, datt_fuse, satt_fuse
from .heatmap import GaussianMapParams, StageConfig, build_guidance_pyramid, render_gaussian_map
from .nascell import discretize
from .rankpool import (
    DEFAULT_REFRESH_PERIOD,
    FrameSequence,
    StreamingPooler,
    batch_normalize,
    minmax_normalize,
)
from .tensor import Tensor


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are exit 1 here
        raise UsageError(message)


def _parse_shape(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad shape {text!r}, expected like 3x64x64") from None
    if len(dims) != 3 or min(dims) < 1:
        raise UsageError(f"bad shape {text!r}, expected three positive extents")
    return dims


def _parse_stages(text: str) -> tuple[StageConfig, ...]:
    defaults = {cfg.stage: cfg for cfg in StageConfig.defaults()}
    try:
        wanted = [int(p) for p in text.split(",") if p]
    except ValueError:
        raise UsageError(f"bad stage list {text!r}") from None
    if not wanted or any(s not in defaults for s in wanted):
        raise UsageError(f"stages must be drawn from {sorted(defaults)}, got {text!r}")
    return tuple(defaults[s] for s in wanted)


def _load_frames(path_text: str) -> FrameSequence:
    path = Path(path_text)
    if path.is_dir():
        return io_formats.read_pgm_sequence(path)
    stack = io_formats.read_tensor(path)
    if len(stack.dims) != 4:
        raise FormatError(f"--input tensor must be [T, C, H, W], got {stack.dims}")
    arr = stack.to_numpy()
    return FrameSequence([Tensor.from_values(arr[t]) for t in range(stack.dims[0])])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_dynimg(args) -> str:
    frames = _load_frames(args.input)
    total = len(frames)
    if args.window < 2:
        raise UsageError(f"--window must be >= 2, got {args.window}")
    if args.window > total:
        raise UsageError(f"--window {args.window} exceeds the {total} input frames")
    if args.stride < 1:
        raise UsageError(f"--stride must be >= 1, got {args.stride}")

    pooler = StreamingPooler(
        FrameSequence(frames[: args.window]), refresh_period=args.refresh
    )
    emitted = [pooler.current_di]
    for t in range(args.window, total):
        emitted.append(pooler.step(frames[t]))
    emitted = emitted[:: args.stride]

    if args.norm == "minmax":
        emitted = [minmax_normalize(di)[0] for di in emitted]
    elif args.norm == "batch":
        emitted = batch_normalize(emitted)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k, di in enumerate(emitted, start=1):
        io_formats.write_tensor(out_dir / f"DI_{k:06d}.rdt", di)
    lo = min(float(np.min(di.to_numpy())) for di in emitted)
    hi = max(float(np.max(di.to_numpy())) for di in emitted)
    return (
        f"dynimg: {len(emitted)} outputs, window={args.window}, stride={args.stride}, "
        f"norm={args.norm}, min={lo:.6g}, max={hi:.6g}"
    )


def _scaled_keypoints(kp, size: int):
    """Rescale keypoints from their native frame size to the render size."""
    from .heatmap import KeypointSet

    if kp.frame_width == size and kp.frame_height == size:
        return kp
    sx = size / kp.frame_width
    sy = size / kp.frame_height
    return KeypointSet(tuple((x * sx, y * sy, c) for x, y, c in kp.points), size, size)


def _cmd_heatmap(args) -> str:
    if args.sigma <= 0:
        raise UsageError(f"--sigma must be positive, got {args.sigma}")
    if args.size < 1:
        raise UsageError(f"--size must be positive, got {args.size}")
    keyframes = io_formats.read_keypoints(args.keypoints)
    if not keyframes:
        raise FormatError("keypoint file lists no frames", where="$.frames")
    configs = _parse_stages(args.stages)
    params = GaussianMapParams(sigma=args.sigma)

    rendered = []
    for t, kp in keyframes:
        rendered.append((t, render_gaussian_map(_scaled_keypoints(kp, args.size), params)))
    pyramid = build_guidance_pyramid([m for _, m in rendered], configs)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for t, m in rendered:
        io_formats.write_pgm(out_dir / f"frame_{t:06d}.pgm", m)
    for cfg, tensor in zip(pyramid.configs, pyramid.maps):
        io_formats.write_tensor(out_dir / f"stage{cfg.stage}.rdt", tensor)
    n = len(rendered) + len(configs)
    stage_list = ",".join(str(c.stage) for c in configs)
    return f"heatmap: {n} outputs, frames={len(rendered)}, stages={stage_list}, sigma={args.sigma:g}"


def _cmd_fuse(args) -> str:
    features = io_formats.read_tensor(args.features)
    guidance = io_formats.read_tensor(args.guidance)
    if len(features.dims) != 4:
        raise FormatError(f"--features must be [C, T, H, W], got {features.dims}")
    if args.mixer == "reference":
        mixer = PointwiseMixer.reference(features.dims[0])
    else:
        if not args.mixer_path:
            raise UsageError("--mixer file requires --mixer-path")
        mixer = io_formats.read_mixer(args.mixer_path)
    fuse = datt_fuse if args.mode == "datt" else satt_fuse
    fused = fuse(features, guidance, mixer)
    io_formats.write_tensor(args.out, fused)
    shape_text = "x".join(str(d) for d in fused.dims)
    return f"fuse: 1 outputs, mode={args.mode}, mixer={args.mixer}, shape={shape_text}"


def _cmd_genotype(args) -> str:
    if args.retain_k < 1:
        raise UsageError(f"--retain-k must be >= 1, got {args.retain_k}")
    alpha = io_formats.read_alpha(args.alpha)
    genotype = discretize(alpha, retain_k=args.retain_k)
    io_formats.write_genotype(args.out, genotype)
    return f"genotype: 1 outputs, retain_k={args.retain_k}, nodes={len(genotype.nodes)}"


def _cmd_bench(args) -> str:
    if args.window < 2:
        raise UsageError(f"--window must be >= 2, got {args.window}")
    if args.frames <= args.window:
        raise UsageError(f"--frames must exceed --window, got {args.frames} <= {args.window}")
    shape = _parse_shape(args.shape)
    report = bench_compare(
        args.frames, args.window, shape, repeats=args.repeats, seed=args.seed
    )
    io_formats.write_bench_csv(args.out, report)
    speedup = report.speedup_vs_pairwise("streaming")
    return (
        f"bench: 1 outputs, frames={args.frames}, window={args.window}, "
        f"speedup_streaming_vs_pairwise={speedup:.2f}"
    )


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="motionkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dynimg", help="extract dynamic images from a frame stream")
    p.add_argument("--input", required=True, help="tensor file [T,C,H,W] or directory of PGMs")
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--norm", choices=["batch", "minmax", "none"], default="none")
    p.add_argument("--refresh", type=int, default=DEFAULT_REFRESH_PERIOD)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_dynimg)

    p = sub.add_parser("heatmap", help="render keypoint heatmaps and the guidance pyramid")
    p.add_argument("--keypoints", required=True)
    p.add_argument("--sigma", type=float, default=6.0)
    p.add_argument("--size", type=int, default=224)
    p.add_argument("--stages", default="1,2,3")
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_heatmap)

    p = sub.add_parser("fuse", help="apply attention fusion to a feature tensor")
    p.add_argument("--features", required=True)
    p.add_argument("--guidance", required=True)
    p.add_argument("--mode", choices=["datt", "satt"], default="datt")
    p.add_argument("--mixer", choices=["reference", "file"], default="reference")
    p.add_argument("--mixer-path")
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_fuse)

    p = sub.add_parser("genotype", help="discretize architecture logits into a genotype")
    p.add_argument("--alpha", required=True)
    p.add_argument("--retain-k", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_genotype)

    p = sub.add_parser("bench", help="time the three dynamic-image methods")
    p.add_argument("--frames", type=int, default=256)
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--shape", default="3x64x64")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_bench)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        print(args.run(args))
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, MotionkitError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
