"""Bit-exact file formats: tensor container, PGM frames, keypoint/genotype/alpha JSON, bench CSV.

The tensor container ("RDT"):

    magic   4 bytes  b"RDT1"
    ndim    u32 little-endian
    dims    ndim x u32 little-endian
    payload product(dims) x f32 little-endian, row-major

File length must match the header exactly. Everything is little-endian
regardless of host. Malformed inputs raise :class:`FormatError` naming the
byte offset (binary) or JSON path (structured) - never a crash or a partial
value.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .bench import BenchReport, METHODS
from .errors import FormatError, MotionkitError
from .fusion import PointwiseMixer
from .heatmap import KeypointSet
from .nascell import (
    NUM_OPS,
    OPS_BY_NAME,
    OP_NAMES,
    AlphaMatrix,
    CellSpec,
    Genotype,
    GenotypeEdge,
    OpKind,
)
from .rankpool import FrameSequence
from .tensor import Shape, Tensor

TENSOR_MAGIC = b"RDT1"
BENCH_CSV_HEADER = "method,frames,window,channels,height,width,repeats,seconds,speedup_vs_pairwise"

_MAX_DIMS = 16


# ---------------------------------------------------------------------------
# tensor container
# ---------------------------------------------------------------------------


def write_tensor(path, t: Tensor) -> None:
    dims = t.dims
    blob = bytearray()
    blob += TENSOR_MAGIC
    blob += struct.pack("<I", len(dims))
    blob += struct.pack(f"<{len(dims)}I", *dims)
    payload = t.to_numpy().astype("<f4", copy=False)
    blob += payload.tobytes()
    Path(path).write_bytes(bytes(blob))


def read_tensor(path) -> Tensor:
    data = Path(path).read_bytes()
    if len(data) < 4:
        raise FormatError("file too short for magic", where="byte 0")
    if data[:4] != TENSOR_MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {TENSOR_MAGIC!r}", where="byte 0")
    if len(data) < 8:
        raise FormatError("file truncated inside ndim field", where="byte 4")
    (ndim,) = struct.unpack_from("<I", data, 4)
    if ndim == 0 or ndim > _MAX_DIMS:
        raise FormatError(f"ndim {ndim} outside [1, {_MAX_DIMS}]", where="byte 4")
    dims_end = 8 + 4 * ndim
    if len(data) < dims_end:
        raise FormatError("file truncated inside dims", where=f"byte {len(data)}")
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    count = 1
    for k, d in enumerate(dims):
        if d == 0:
            raise FormatError(f"dimension {k} is zero", where=f"byte {8 + 4 * k}")
        count *= d
        if count > 2**40:
            raise FormatError(f"dims {dims} overflow the element budget", where=f"byte {8 + 4 * k}")
    expected = dims_end + 4 * count
    if len(data) < expected:
        raise FormatError(
            f"payload truncated: need {expected} bytes, file has {len(data)}",
            where=f"byte {len(data)}",
        )
    if len(data) > expected:
        raise FormatError(
            f"{len(data) - expected} trailing bytes after payload", where=f"byte {expected}"
        )
    payload = np.frombuffer(data, dtype="<f4", count=count, offset=dims_end)
    if not np.all(np.isfinite(payload)):
        bad = int(np.flatnonzero(~np.isfinite(payload))[0])
        raise FormatError("non-finite value in payload", where=f"byte {dims_end + 4 * bad}")
    try:
        return Tensor.from_values(payload.astype(np.float32).reshape(dims))
    except MotionkitError as exc:  # pragma: no cover - defended above
        raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# PGM frames (binary P5, maxval 255, grayscale only)
# ---------------------------------------------------------------------------


def write_pgm(path, map_tensor: Tensor) -> None:
    if len(map_tensor.dims) != 3 or map_tensor.dims[0] != 1:
        raise MotionkitError(f"write_pgm expects [1, H, W], got {map_tensor.dims}")
    _, h, w = map_tensor.dims
    values = np.clip(map_tensor.to_numpy()[0], 0.0, 1.0)
    pixels = np.round(values * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())


def _pgm_tokens(data: bytes):
    """Yield (token, offset) for header tokens, honoring '#' comments."""
    i = 0
    while i < len(data):
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            start = i
            while i < len(data) and not data[i : i + 1].isspace():
                i += 1
            yield data[start:i], start, i
    return


def read_pgm(path) -> Tensor:
    data = Path(path).read_bytes()
    tokens = _pgm_tokens(data)
    fields = []
    end = 0
    try:
        for _ in range(4):
            tok, start, end = next(tokens)
            fields.append((tok, start))
    except StopIteration:
        raise FormatError("incomplete PGM header", where=f"byte {len(data)}") from None
    magic = fields[0][0]
    if magic == b"P2":
        raise FormatError("ASCII PGM (P2) is unsupported; use binary P5", where="byte 0")
    if magic != b"P5":
        raise FormatError(f"bad PGM magic {magic!r}", where="byte 0")
    try:
        w = int(fields[1][0])
        h = int(fields[2][0])
        maxval = int(fields[3][0])
    except ValueError:
        raise FormatError("non-numeric PGM header field", where=f"byte {fields[1][1]}") from None
    if w < 1 or h < 1:
        raise FormatError(f"bad PGM size {w}x{h}", where=f"byte {fields[1][1]}")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, only 255", where=f"byte {fields[3][1]}")
    pixel_start = end + 1  # single whitespace byte after maxval
    expected = pixel_start + w * h
    if len(data) < expected:
        raise FormatError(
            f"pixel data truncated: need {expected} bytes, file has {len(data)}",
            where=f"byte {len(data)}",
        )
    if len(data) > expected:
        raise FormatError(
            f"{len(data) - expected} trailing bytes after pixels", where=f"byte {expected}"
        )
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pixel_start)
    values = pixels.reshape(h, w).astype(np.float32) / np.float32(255.0)
    return Tensor.from_values(values[None, :, :])


def read_pgm_sequence(source) -> FrameSequence:
    """Read a directory of .pgm files (sorted by name) or an explicit path list."""
    if isinstance(source, (str, Path)) and Path(source).is_dir():
        paths = sorted(Path(source).glob("*.pgm"))
        if not paths:
            raise FormatError(f"no .pgm files in {source}")
    else:
        paths = [Path(p) for p in source]
        if not paths:
            raise FormatError("empty path list")
    return FrameSequence([read_pgm(p) for p in paths])


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not valid UTF-8: {exc}", where="$") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", where=f"line {exc.lineno}") from exc


def _expect(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"missing field {key!r}", where=where)
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FormatError(f"field {key!r} must be a number", where=f"{where}.{key}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError(f"field {key!r} must be an integer", where=f"{where}.{key}")
        return value
    if not isinstance(value, kind):
        raise FormatError(
            f"field {key!r} must be {kind.__name__}", where=f"{where}.{key}"
        )
    return value


# ---------------------------------------------------------------------------
# keypoint files
# ---------------------------------------------------------------------------


def read_keypoints(path) -> list[tuple[int, KeypointSet]]:
    """Parse a keypoint JSON file into (frame index, KeypointSet) pairs."""
    doc = _load_json(path)
    width = _expect(doc, "width", int, "$")
    height = _expect(doc, "height", int, "$")
    if width < 1 or height < 1:
        raise FormatError(f"bad frame size {width}x{height}", where="$.width")
    frames = _expect(doc, "frames", list, "$")
    out: list[tuple[int, KeypointSet]] = []
    last_t = None
    for fi, frame in enumerate(frames):
        where = f"$.frames[{fi}]"
        t = _expect(frame, "t", int, where)
        if last_t is not None and t <= last_t:
            raise FormatError(
                f"frame indices must be strictly increasing ({t} after {last_t})",
                where=f"{where}.t",
            )
        last_t = t
        points = _expect(frame, "points", list, where)
        parsed = []
        for pi, pt in enumerate(points):
            pw = f"{where}.points[{pi}]"
            x = _expect(pt, "x", float, pw)
            y = _expect(pt, "y", float, pw)
            conf = _expect(pt, "conf", float, pw)
            if not (0.0 <= conf <= 1.0):
                raise FormatError(f"conf {conf} outside [0, 1]", where=f"{pw}.conf")
            parsed.append((x, y, conf))
        out.append((t, KeypointSet(tuple(parsed), width, height)))
    return out


def write_keypoints(path, width: int, height: int,
                    frames: list[tuple[int, KeypointSet]]) -> None:
    doc = {
        "width": width,
        "height": height,
        "frames": [
            {
                "t": t,
                "points": [{"x": x, "y": y, "conf": c} for x, y, c in kp.points],
            }
            for t, kp in frames
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# genotype files
# ---------------------------------------------------------------------------


def write_genotype(path, genotype: Genotype) -> None:
    doc = {
        "retain_k": genotype.retain_k,
        "nodes": [
            {
                "node": node,
                "edges": [{"from": e.source, "op": OP_NAMES[e.op]} for e in edges],
            }
            for node, edges in genotype.nodes
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_genotype(path) -> Genotype:
    doc = _load_json(path)
    retain_k = _expect(doc, "retain_k", int, "$")
    nodes_doc = _expect(doc, "nodes", list, "$")
    nodes = []
    for ni, node_doc in enumerate(nodes_doc):
        where = f"$.nodes[{ni}]"
        node = _expect(node_doc, "node", int, where)
        edges_doc = _expect(node_doc, "edges", list, where)
        edges = []
        for ei, edge_doc in enumerate(edges_doc):
            ew = f"{where}.edges[{ei}]"
            source = _expect(edge_doc, "from", int, ew)
            op_name = _expect(edge_doc, "op", str, ew)
            if op_name not in OPS_BY_NAME:
                raise FormatError(f"unknown op {op_name!r}", where=f"{ew}.op")
            # "zero" parses (forward compatibility) but Genotype construction rejects it
            try:
                edges.append(GenotypeEdge(source, OPS_BY_NAME[op_name]))
            except MotionkitError as exc:
                raise FormatError(str(exc), where=f"{ew}.op") from exc
        try:
            nodes.append((node, tuple(edges)))
        except MotionkitError as exc:
            raise FormatError(str(exc), where=where) from exc
    try:
        return Genotype(retain_k, tuple(nodes))
    except MotionkitError as exc:
        raise FormatError(str(exc), where="$") from exc


# ---------------------------------------------------------------------------
# alpha logits (CLI input for discretization)
# ---------------------------------------------------------------------------


def write_alpha(path, alpha: AlphaMatrix) -> None:
    doc = {
        "edges": [
            {"from": i, "to": j, "logits": [float(v) for v in alpha.logits[k]]}
            for k, (i, j) in enumerate(alpha.spec.edges)
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_alpha(path) -> AlphaMatrix:
    doc = _load_json(path)
    edges_doc = _expect(doc, "edges", list, "$")
    spec = CellSpec()
    wanted = {edge: k for k, edge in enumerate(spec.edges)}
    logits = np.full((len(spec.edges), NUM_OPS), np.nan, dtype=np.float64)
    for ei, edge_doc in enumerate(edges_doc):
        where = f"$.edges[{ei}]"
        i = _expect(edge_doc, "from", int, where)
        j = _expect(edge_doc, "to", int, where)
        if (i, j) not in wanted:
            raise FormatError(f"({i}, {j}) is not a cell edge", where=where)
        row = _expect(edge_doc, "logits", list, where)
        if len(row) != NUM_OPS:
            raise FormatError(f"need {NUM_OPS} logits, got {len(row)}", where=f"{where}.logits")
        for vi, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise FormatError("logits must be numbers", where=f"{where}.logits[{vi}]")
        logits[wanted[(i, j)]] = row
    if np.any(np.isnan(logits)):
        missing = [e for e, k in wanted.items() if np.isnan(logits[k]).any()]
        raise FormatError(f"missing logits for edges {missing}", where="$.edges")
    try:
        return AlphaMatrix(logits, spec)
    except MotionkitError as exc:
        raise FormatError(str(exc), where="$.edges") from exc


# ---------------------------------------------------------------------------
# mixer files (fuse --mixer file): one tensor of shape [C, 2C + 1], bias last column
# ---------------------------------------------------------------------------


def write_mixer(path, mixer: PointwiseMixer) -> None:
    c = mixer.channels
    packed = np.zeros((c, 2 * c + 1), dtype=np.float32)
    packed[:, : 2 * c] = mixer.weights
    packed[:, 2 * c] = mixer.bias
    write_tensor(path, Tensor.from_values(packed))


def read_mixer(path) -> PointwiseMixer:
    t = read_tensor(path)
    dims = t.dims
    if len(dims) != 2 or dims[1] != 2 * dims[0] + 1:
        raise FormatError(f"mixer tensor must be [C, 2C+1], got {dims}")
    arr = t.to_numpy()
    c = dims[0]
    try:
        return PointwiseMixer(arr[:, : 2 * c], arr[:, 2 * c])
    except MotionkitError as exc:
        raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# bench CSV
# ---------------------------------------------------------------------------


def write_bench_csv(path, report: BenchReport) -> None:
    """One row per (method, repeat); the repeats column is the 1-based repeat index."""
    c, h, w = report.frame_shape
    lines = [BENCH_CSV_HEADER]
    for repeat in range(1, report.repeats + 1):
        pairwise = report.seconds("pairwise", repeat)
        for method in METHODS:
            seconds = report.seconds(method, repeat)
            lines.append(
                f"{method},{report.frames},{report.window},{c},{h},{w},"
                f"{repeat},{seconds:.9f},{pairwise / seconds:.6f}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
