/**
 * Cross-boundary equivalence: the locally implemented ops must agree with the
 * core library, reached only through its CLI and file formats.
 *
 * Bitwise agreement is enforced for the rank-pooling family and fusion (the
 * core pins their operation order); rendering goes through exp() and is
 * checked at float tolerance instead.
 */

import { describe, expect, it } from "vitest";

import {
  CoreClient,
  NUM_OPS,
  PointwiseMixer,
  StreamingPooler,
  buildGuidancePyramid,
  cellEdges,
  dattFuse,
  discretize,
  genotypesEqual,
  makeTensor,
  minmaxNormalize,
  renderGaussianMap,
  tensorFrom,
  tensorsBitEqual,
  type KeypointFile,
  type Tensor,
} from "../src/index.js";

const client = new CoreClient();

/** Deterministic PRNG (mulberry32) so every run exercises identical corpora. */
function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomTensor(next: () => number, shape: number[], lo = -10, hi = 10): Tensor {
  const size = shape.reduce((a, b) => a * b, 1);
  return makeTensor(
    shape,
    Float32Array.from({ length: size }, () => Math.fround(lo + (hi - lo) * next())),
  );
}

function stackFrames(frames: Tensor[]): Tensor {
  const frameShape = frames[0].shape;
  const size = frames[0].data.length;
  const data = new Float32Array(frames.length * size);
  frames.forEach((f, t) => data.set(f.data, t * size));
  return makeTensor([frames.length, ...frameShape], data);
}

describe("streaming equivalence (50 random streams)", () => {
  it("matches core dynamic images bit-exactly", { timeout: 180_000 }, () => {
    const next = rng(0xc0ffee);
    for (let trial = 0; trial < 50; trial++) {
      const window = 2 + Math.floor(next() * 5); // 2..6
      const total = window + 1 + Math.floor(next() * 12);
      const channels = 1 + Math.floor(next() * 3);
      const side = 2 + Math.floor(next() * 3);
      const refresh = [1, 3, 64][Math.floor(next() * 3)];
      const useMinmax = trial % 2 === 1;
      const frames = Array.from({ length: total }, () =>
        randomTensor(next, [channels, side, side]),
      );

      const pooler = new StreamingPooler(frames.slice(0, window), refresh);
      const local: Tensor[] = [pooler.currentDi];
      for (const f of frames.slice(window)) local.push(pooler.step(f));
      const expected = useMinmax ? local.map((di) => minmaxNormalize(di).values) : local;

      const { images } = client.dynimg(stackFrames(frames), {
        window,
        refresh,
        norm: useMinmax ? "minmax" : "none",
      });
      expect(images).toHaveLength(expected.length);
      images.forEach((img, k) => {
        expect(
          tensorsBitEqual(img, expected[k]),
          `trial ${trial} window-index ${k} (W=${window}, refresh=${refresh}, minmax=${useMinmax})`,
        ).toBe(true);
      });
    }
  });
});

describe("fusion equivalence (20 random cases)", () => {
  it("matches core fused tensors bit-exactly", { timeout: 120_000 }, () => {
    const next = rng(0xfade);
    for (let trial = 0; trial < 20; trial++) {
      const c = 1 + Math.floor(next() * 5);
      const t = 1 + Math.floor(next() * 3);
      const side = 2 + Math.floor(next() * 4);
      const shape = [c, t, side, side];
      const features = randomTensor(next, shape, -5, 5);
      const guidance = randomTensor(next, shape, 0, 1);

      const useReference = trial % 4 === 0;
      let mixer: PointwiseMixer;
      let mixerTensor: Tensor | undefined;
      if (useReference) {
        mixer = PointwiseMixer.reference(c);
        mixerTensor = undefined;
      } else {
        const weights = Float32Array.from({ length: c * 2 * c }, () =>
          Math.fround(2 * next() - 1),
        );
        const bias = Float32Array.from({ length: c }, () => Math.fround(next() - 0.5));
        mixer = new PointwiseMixer(c, weights, bias);
        // packed core format: [C, 2C+1], bias in the last column
        const packed = new Float32Array(c * (2 * c + 1));
        for (let oc = 0; oc < c; oc++) {
          packed.set(weights.subarray(oc * 2 * c, (oc + 1) * 2 * c), oc * (2 * c + 1));
          packed[oc * (2 * c + 1) + 2 * c] = bias[oc];
        }
        mixerTensor = makeTensor([c, 2 * c + 1], packed);
      }

      const local = dattFuse(features, guidance, mixer);
      const remote = client.fuse(features, guidance, "datt", mixerTensor);
      expect(tensorsBitEqual(remote, local), `trial ${trial} shape [${shape}]`).toBe(true);
    }
  });
});

describe("discretization equivalence", () => {
  it("produces the same genotypes as the core CLI", { timeout: 60_000 }, () => {
    const next = rng(0xbead);
    for (let trial = 0; trial < 10; trial++) {
      const alpha = {
        edges: cellEdges().map(([from, to]) => ({
          from,
          to,
          logits: Array.from({ length: NUM_OPS }, () => 8 * next() - 4),
        })),
      };
      const retainK = 1 + (trial % 3);
      const local = discretize(alpha, retainK);
      const remote = client.genotype(alpha, retainK);
      expect(genotypesEqual(remote, local), `trial ${trial} retain_k=${retainK}`).toBe(true);
    }
  });
});

describe("rendering and pyramid equivalence", () => {
  it("matches core stage tensors to float tolerance", { timeout: 60_000 }, () => {
    const next = rng(0xfeed);
    const frames = Array.from({ length: 16 }, (_, t) => ({
      t,
      points: [
        { x: 224 * next(), y: 224 * next(), conf: 1 },
        { x: 224 * next(), y: 224 * next(), conf: 0.5 },
      ],
    }));
    const kpFile: KeypointFile = { width: 224, height: 224, frames };

    const remote = client.heatmap(kpFile, { sigma: 6, stages: [1, 3] });
    const localMaps = frames.map((f) =>
      renderGaussianMap(f.points, 224, 224, { sigma: 6 }),
    );
    const [stage1, stage3] = buildGuidancePyramid(localMaps, [
      { stage: 1, channels: 192, depth: 16, height: 28, width: 28 },
      { stage: 3, channels: 512, depth: 4, height: 7, width: 7 },
    ]);

    for (const [local, stage] of [
      [stage1, 1],
      [stage3, 3],
    ] as const) {
      const core = remote.stages.get(stage)!;
      expect(core.shape).toEqual(local.shape);
      let worst = 0;
      for (let i = 0; i < core.data.length; i++) {
        worst = Math.max(worst, Math.abs(core.data[i] - local.data[i]));
      }
      expect(worst).toBeLessThanOrEqual(1e-6);
    }
  });
});

describe("bench via client", () => {
  it("returns one row per method per repeat with a correctness-gated speedup", { timeout: 60_000 }, () => {
    const rows = client.bench(12, 3, [1, 4, 4], 2, 7);
    expect(rows).toHaveLength(6);
    const methods = new Set(rows.map((r) => r.method));
    expect(methods).toEqual(new Set(["pairwise", "weighted", "streaming"]));
    for (const row of rows.filter((r) => r.method === "pairwise")) {
      expect(row.speedupVsPairwise).toBeCloseTo(1, 6);
    }
  });
});

describe("error propagation", () => {
  it("surfaces core data errors as exceptions with the core message", () => {
    const features = tensorFrom([2, 1, 2, 2], [1, 2, 3, 4, 5, 6, 7, 8]);
    const guidance = tensorFrom([2, 1, 2, 3], Array(12).fill(0));
    expect(() => client.fuse(features, guidance)).toThrowError(/shape/);
  });
});
