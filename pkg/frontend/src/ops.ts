/**
 * Bound operations mirroring the core library's numerics.
 *
 * Every arithmetic step follows the core's documented operation order and
 * precision (float64 accumulation, one final rounding to float32), so results
 * match the core bit for bit wherever the core pins the order: rank pooling,
 * the streaming recurrence, min-max normalization, fusion, the guidance
 * pyramid, and discretization. Gaussian rendering calls the host exp(), whose
 * last-bit behavior may differ from the core's libm, so it is equivalent to
 * float tolerance rather than bitwise.
 */

import {
  AlphaFile,
  Genotype,
  GenotypeEdge,
  NUM_OPS,
  OP_NAMES,
  cellEdges,
} from "./formats.js";
import {
  ShapeError,
  Tensor,
  assertSameShape,
  makeTensor,
  numElements,
  zeros,
} from "./tensor.js";

// ---------------------------------------------------------------------------
// rank pooling
// ---------------------------------------------------------------------------

export function betaCoefficients(window: number): number[] {
  if (window < 2) throw new ShapeError(`a dynamic image needs at least 2 frames, got window ${window}`);
  const beta: number[] = [];
  for (let t = 1; t <= window; t++) beta.push(2 * t - window - 1);
  return beta;
}

function checkFrames(frames: Tensor[], minimum: number, what: string): number {
  if (frames.length < minimum) {
    throw new ShapeError(`${what} needs at least ${minimum} frames, got ${frames.length}`);
  }
  const size = numElements(frames[0].shape);
  for (const f of frames) assertSameShape(what, frames[0].shape, f.shape);
  return size;
}

export function rankPoolWeighted(frames: Tensor[]): Tensor {
  const size = checkFrames(frames, 2, "rank pooling");
  const beta = betaCoefficients(frames.length);
  const acc = new Float64Array(size);
  for (let t = 0; t < frames.length; t++) {
    const coeff = beta[t];
    const data = frames[t].data;
    for (let i = 0; i < size; i++) acc[i] += coeff * data[i];
  }
  return makeTensor(frames[0].shape, Float32Array.from(acc, Math.fround));
}

export function rankPoolPairwise(frames: Tensor[]): Tensor {
  const size = checkFrames(frames, 2, "pairwise rank pooling");
  const acc = new Float64Array(size);
  for (let t1 = 1; t1 < frames.length; t1++) {
    for (let t2 = 0; t2 < t1; t2++) {
      const a = frames[t1].data;
      const b = frames[t2].data;
      for (let i = 0; i < size; i++) acc[i] += a[i] - b[i];
    }
  }
  return makeTensor(frames[0].shape, Float32Array.from(acc, Math.fround));
}

export const DEFAULT_REFRESH_PERIOD = 64;

/** Sliding-window pooler mirroring the core's streaming recurrence exactly. */
export class StreamingPooler {
  readonly window: number;
  readonly refreshPeriod: number;
  readonly frameShape: readonly number[];
  windowsEmitted: number;

  private ring: Float64Array[];
  private interior: Float64Array;
  private di: Float64Array;
  private readonly size: number;

  constructor(firstWindow: Tensor[], refreshPeriod: number = DEFAULT_REFRESH_PERIOD) {
    if (firstWindow.length < 2) {
      throw new ShapeError(`streaming window must be >= 2, got ${firstWindow.length}`);
    }
    if (refreshPeriod < 1) throw new ShapeError(`refresh period must be >= 1, got ${refreshPeriod}`);
    this.window = firstWindow.length;
    this.refreshPeriod = refreshPeriod;
    this.frameShape = [...firstWindow[0].shape];
    this.size = checkFrames(firstWindow, 2, "streaming window");
    this.ring = firstWindow.map((f) => Float64Array.from(f.data));
    this.interior = new Float64Array(this.size);
    this.di = new Float64Array(this.size);
    this.recompute();
    this.windowsEmitted = 1;
  }

  get currentDi(): Tensor {
    return makeTensor(this.frameShape, Float32Array.from(this.di, Math.fround));
  }

  get interiorSum(): Tensor {
    return makeTensor(this.frameShape, Float32Array.from(this.interior, Math.fround));
  }

  private recompute(): void {
    const beta = betaCoefficients(this.window);
    this.di = new Float64Array(this.size);
    for (let t = 0; t < this.window; t++) {
      const coeff = beta[t];
      const frame = this.ring[t];
      for (let i = 0; i < this.size; i++) this.di[i] += coeff * frame[i];
    }
    this.interior = new Float64Array(this.size);
    for (let t = 1; t < this.window - 1; t++) {
      const frame = this.ring[t];
      for (let i = 0; i < this.size; i++) this.interior[i] += frame[i];
    }
  }

  step(nextFrame: Tensor): Tensor {
    assertSameShape("streaming step frame", this.frameShape, nextFrame.shape);
    const incoming = Float64Array.from(nextFrame.data);
    const span = this.window - 1;
    const head = this.ring[0];
    const second = this.ring[1];
    const tail = this.ring[this.window - 1];
    // per-element order pinned by the core:
    //   full = interior + tail; edges = head + incoming;
    //   edges = edges*span; edges = edges + di;
    //   interior = full - ring[1]; full = full*2; di = edges - full
    for (let i = 0; i < this.size; i++) {
      let fullV = this.interior[i] + tail[i];
      let edgesV = head[i] + incoming[i];
      edgesV = edgesV * span;
      edgesV = edgesV + this.di[i];
      this.interior[i] = fullV - second[i];
      fullV = fullV * 2;
      this.di[i] = edgesV - fullV;
    }
    this.ring.shift();
    this.ring.push(incoming);
    this.windowsEmitted += 1;
    if (this.windowsEmitted % this.refreshPeriod === 0) this.recompute();
    return this.currentDi;
  }
}

export function minmaxNormalize(di: Tensor): { values: Tensor; degenerate: boolean } {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of di.data) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (hi === lo) return { values: zeros(di.shape), degenerate: true };
  const span = Math.fround(hi - lo);
  const out = new Float32Array(di.data.length);
  for (let i = 0; i < out.length; i++) {
    out[i] = Math.fround(Math.fround(di.data[i] - lo) / span);
  }
  return { values: makeTensor(di.shape, out), degenerate: false };
}

// ---------------------------------------------------------------------------
// heatmaps and the guidance pyramid
// ---------------------------------------------------------------------------

export interface GaussianMapParams {
  sigma: number;
  combine?: "max" | "sum-clamped";
  amplitude?: number;
  confidenceScaling?: boolean;
}

export function renderGaussianMap(
  points: Array<{ x: number; y: number; conf: number }>,
  height: number,
  width: number,
  params: GaussianMapParams,
): Tensor {
  if (params.sigma <= 0) throw new ShapeError(`sigma must be positive, got ${params.sigma}`);
  const combine = params.combine ?? "max";
  const amplitude = params.amplitude ?? 1;
  const combined = new Float64Array(height * width);
  const inv = 1 / (2 * params.sigma * params.sigma);
  for (const { x, y, conf } of points) {
    for (let row = 0; row < height; row++) {
      const dy2 = (row - y) * (row - y);
      for (let col = 0; col < width; col++) {
        const d2 = (col - x) * (col - x) + dy2;
        let blob = amplitude * Math.exp(-d2 * inv);
        if (params.confidenceScaling) blob = blob * conf;
        const idx = row * width + col;
        combined[idx] = combine === "max" ? Math.max(combined[idx], blob) : combined[idx] + blob;
      }
    }
  }
  const out = new Float32Array(height * width);
  for (let i = 0; i < out.length; i++) {
    out[i] = Math.fround(Math.min(amplitude, Math.max(0, combined[i])));
  }
  return makeTensor([1, height, width], out);
}

export interface StageConfig {
  stage: number;
  channels: number;
  depth: number;
  height: number;
  width: number;
}

export const DEFAULT_STAGES: StageConfig[] = [
  { stage: 1, channels: 192, depth: 16, height: 28, width: 28 },
  { stage: 2, channels: 256, depth: 8, height: 14, width: 14 },
  { stage: 3, channels: 512, depth: 4, height: 7, width: 7 },
];

function maxpoolPlane(map: Tensor, ratioH: number, ratioW: number): Float32Array {
  const [, inH, inW] = map.shape;
  const outH = inH / ratioH;
  const outW = inW / ratioW;
  const out = new Float32Array(outH * outW);
  for (let oh = 0; oh < outH; oh++) {
    for (let ow = 0; ow < outW; ow++) {
      let best = -Infinity;
      for (let ih = 0; ih < ratioH; ih++) {
        const row = (oh * ratioH + ih) * inW + ow * ratioW;
        for (let iw = 0; iw < ratioW; iw++) {
          const v = map.data[row + iw];
          if (v > best) best = v;
        }
      }
      out[oh * outW + ow] = best;
    }
  }
  return out;
}

export function buildGuidancePyramid(
  frameMaps: Tensor[],
  configs: StageConfig[] = DEFAULT_STAGES,
): Tensor[] {
  if (frameMaps.length === 0) throw new ShapeError("guidance pyramid needs at least one frame map");
  const dims = frameMaps[0].shape;
  if (dims.length !== 3 || dims[0] !== 1) {
    throw new ShapeError(`frame maps must be [1, H, W], got [${dims}]`);
  }
  for (const m of frameMaps) assertSameShape("guidance pyramid maps", dims, m.shape);
  const [, inH, inW] = dims;
  const maxDepth = Math.max(...configs.map((c) => c.depth));
  if (frameMaps.length !== 1 && frameMaps.length < maxDepth) {
    throw new ShapeError(`need >= ${maxDepth} frame maps to fill the deepest stage, got ${frameMaps.length}`);
  }

  return configs.map((cfg) => {
    if (inH % cfg.height !== 0 || inW % cfg.width !== 0) {
      throw new ShapeError(
        `stage ${cfg.stage}: input ${inH}x${inW} not divisible by target ${cfg.height}x${cfg.width}`,
      );
    }
    const ratioH = inH / cfg.height;
    const ratioW = inW / cfg.width;
    const plane = cfg.height * cfg.width;
    const pooledByDepth: Float32Array[] = [];
    const cache = new Map<number, Float32Array>();
    for (let slot = 0; slot < cfg.depth; slot++) {
      const idx = frameMaps.length === 1 ? 0 : Math.floor((slot * frameMaps.length) / cfg.depth);
      let pooled = cache.get(idx);
      if (!pooled) {
        pooled = maxpoolPlane(frameMaps[idx], ratioH, ratioW);
        cache.set(idx, pooled);
      }
      pooledByDepth.push(pooled);
    }
    const out = new Float32Array(cfg.channels * cfg.depth * plane);
    for (let c = 0; c < cfg.channels; c++) {
      for (let d = 0; d < cfg.depth; d++) {
        out.set(pooledByDepth[d], (c * cfg.depth + d) * plane);
      }
    }
    return makeTensor([cfg.channels, cfg.depth, cfg.height, cfg.width], out);
  });
}

// ---------------------------------------------------------------------------
// fusion
// ---------------------------------------------------------------------------

export class PointwiseMixer {
  /** weights[oc * 2C + ic], row-major [C, 2C]; bias [C]. */
  constructor(
    readonly channels: number,
    readonly weights: Float32Array,
    readonly bias: Float32Array,
    readonly referenceInit = false,
  ) {
    if (weights.length !== channels * 2 * channels) {
      throw new ShapeError(`mixer weights must be [C, 2C] = [${channels}, ${2 * channels}]`);
    }
    if (bias.length !== channels) throw new ShapeError(`mixer bias must be [${channels}]`);
  }

  static reference(channels: number): PointwiseMixer {
    const weights = new Float32Array(channels * 2 * channels);
    for (let c = 0; c < channels; c++) weights[c * 2 * channels + c] = 1;
    return new PointwiseMixer(channels, weights, new Float32Array(channels), true);
  }
}

function fuse(f: Tensor, guidance: Tensor, mixer: PointwiseMixer, what: string): Tensor {
  assertSameShape(what, f.shape, guidance.shape);
  if (f.shape.length !== 4) throw new ShapeError(`${what} expects [C, T, H, W], got [${f.shape}]`);
  const channels = f.shape[0];
  if (mixer.channels !== channels) {
    throw new ShapeError(`${what} mixer channels: [${mixer.channels}] vs [${channels}]`);
  }
  const voxels = f.shape[1] * f.shape[2] * f.shape[3];
  const twoC = 2 * channels;

  // stacked = concat(A, f) with A = fround((g + 1) * f), matching the core
  const stacked = new Float64Array(twoC * voxels);
  for (let c = 0; c < channels; c++) {
    const base = c * voxels;
    for (let v = 0; v < voxels; v++) {
      const gated = Math.fround(guidance.data[base + v] + 1);
      stacked[base + v] = Math.fround(gated * f.data[base + v]);
      stacked[(channels + c) * voxels + v] = f.data[base + v];
    }
  }

  const out = new Float32Array(channels * voxels);
  for (let oc = 0; oc < channels; oc++) {
    const wRow = oc * twoC;
    for (let v = 0; v < voxels; v++) {
      let acc = 0;
      for (let ic = 0; ic < twoC; ic++) {
        acc += mixer.weights[wRow + ic] * stacked[ic * voxels + v];
      }
      acc += mixer.bias[oc];
      out[oc * voxels + v] = Math.fround(acc);
    }
  }
  return makeTensor(f.shape, out);
}

export function dattFuse(f: Tensor, diNorm: Tensor, mixer: PointwiseMixer): Tensor {
  return fuse(f, diNorm, mixer, "datt fuse");
}

export function sattFuse(f: Tensor, h: Tensor, mixer: PointwiseMixer): Tensor {
  return fuse(f, h, mixer, "satt fuse");
}

// ---------------------------------------------------------------------------
// discretization
// ---------------------------------------------------------------------------

export function discretize(alpha: AlphaFile, retainK = 2): Genotype {
  if (retainK < 1) throw new ShapeError(`retain_k must be >= 1, got ${retainK}`);
  const edges = cellEdges();
  const logitsByEdge = new Map<string, number[]>();
  for (const e of alpha.edges) logitsByEdge.set(`${e.from},${e.to}`, e.logits);
  for (const [i, j] of edges) {
    if (!logitsByEdge.has(`${i},${j}`)) throw new ShapeError(`missing logits for edge (${i}, ${j})`);
  }

  const nodes = [];
  for (let j = 2; j <= 5; j++) {
    const candidates: Array<{ source: number; op: number; logit: number }> = [];
    for (let i = 0; i < j; i++) {
      const logits = logitsByEdge.get(`${i},${j}`)!;
      // argmax over non-Zero ops; first maximum wins (lowest ordinal)
      let best = 1;
      for (let k = 2; k < NUM_OPS; k++) {
        if (logits[k] > logits[best]) best = k;
      }
      candidates.push({ source: i, op: best, logit: logits[best] });
    }
    candidates.sort((a, b) => (a.logit !== b.logit ? b.logit - a.logit : a.source - b.source));
    const kept = candidates.slice(0, Math.min(retainK, candidates.length));
    kept.sort((a, b) => a.source - b.source);
    const nodeEdges: GenotypeEdge[] = kept.map((c) => ({ from: c.source, op: OP_NAMES[c.op] }));
    nodes.push({ node: j, edges: nodeEdges });
  }
  return { retain_k: retainK, nodes };
}
