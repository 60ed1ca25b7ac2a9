/** Unit tests for the locally implemented bound ops (no core subprocess). */

import { describe, expect, it } from "vitest";

import {
  PointwiseMixer,
  StreamingPooler,
  betaCoefficients,
  buildGuidancePyramid,
  cellEdges,
  dattFuse,
  discretize,
  minmaxNormalize,
  rankPoolPairwise,
  rankPoolWeighted,
  renderGaussianMap,
  sattFuse,
  tensorFrom,
  tensorsBitEqual,
  zeros,
  full,
  NUM_OPS,
} from "../src/index.js";

const pixel = (v: number) => tensorFrom([1], [v]);

describe("betaCoefficients", () => {
  it("matches the closed form", () => {
    expect(betaCoefficients(2)).toEqual([-1, 1]);
    expect(betaCoefficients(3)).toEqual([-2, 0, 2]);
    expect(betaCoefficients(4)).toEqual([-3, -1, 1, 3]);
  });

  it("sums to zero and is antisymmetric", () => {
    for (let w = 2; w <= 64; w++) {
      const beta = betaCoefficients(w);
      expect(beta.reduce((a, b) => a + b, 0)).toBe(0);
      expect([...beta].reverse()).toEqual(beta.map((v) => -v || 0)); // -0 -> 0
    }
  });

  it("rejects window 1", () => {
    expect(() => betaCoefficients(1)).toThrow();
  });
});

describe("rank pooling", () => {
  it("reproduces the hand example", () => {
    const seq = [pixel(1), pixel(4), pixel(2)];
    expect(rankPoolWeighted(seq).data[0]).toBe(2);
    expect(rankPoolPairwise(seq).data[0]).toBe(2);
  });

  it("weighted equals pairwise on random sequences", () => {
    let state = 12345;
    const rand = () => {
      state = (state * 1103515245 + 12345) % 2147483648;
      return state / 2147483648;
    };
    for (let trial = 0; trial < 30; trial++) {
      const frames = 2 + Math.floor(rand() * 10);
      const seq = Array.from({ length: frames }, () =>
        tensorFrom([2, 3], Array.from({ length: 6 }, () => rand() * 20 - 10)),
      );
      const a = rankPoolWeighted(seq);
      const b = rankPoolPairwise(seq);
      for (let i = 0; i < a.data.length; i++) {
        const tol = Math.max(1e-4 * Math.max(Math.abs(a.data[i]), Math.abs(b.data[i])), 1e-6);
        expect(Math.abs(a.data[i] - b.data[i])).toBeLessThanOrEqual(tol);
      }
    }
  });
});

describe("StreamingPooler", () => {
  it("reproduces the [1,4,2,7] recurrence example", () => {
    const pooler = new StreamingPooler([pixel(1), pixel(4), pixel(2)]);
    expect(pooler.currentDi.data[0]).toBe(2);
    expect(pooler.interiorSum.data[0]).toBe(4);
    expect(pooler.step(pixel(7)).data[0]).toBe(6);
  });

  it("window 2 stream gives successive differences", () => {
    const pooler = new StreamingPooler([pixel(10), pixel(4)]);
    expect(pooler.currentDi.data[0]).toBe(-6);
    expect(pooler.step(pixel(9)).data[0]).toBe(5);
  });

  it("agrees with the weighted form per window", () => {
    const frames = Array.from({ length: 40 }, (_, i) =>
      tensorFrom([2, 2], [Math.sin(i), Math.cos(2 * i), (i % 7) - 3, i * 0.25]),
    );
    for (const window of [2, 3, 8]) {
      const pooler = new StreamingPooler(frames.slice(0, window), 5);
      const outputs = [pooler.currentDi];
      for (const f of frames.slice(window)) outputs.push(pooler.step(f));
      outputs.forEach((got, start) => {
        const want = rankPoolWeighted(frames.slice(start, start + window));
        for (let i = 0; i < got.data.length; i++) {
          expect(Math.abs(got.data[i] - want.data[i])).toBeLessThanOrEqual(
            Math.max(1e-4 * Math.abs(want.data[i]), 1e-6),
          );
        }
      });
    }
  });
});

describe("minmaxNormalize", () => {
  it("maps extremes to 0 and 1", () => {
    const { values, degenerate } = minmaxNormalize(tensorFrom([2], [2, 6]));
    expect(degenerate).toBe(false);
    expect([...values.data]).toEqual([0, 1]);
  });

  it("flags constant inputs", () => {
    const { values, degenerate } = minmaxNormalize(full([2, 2], 3));
    expect(degenerate).toBe(true);
    expect([...values.data]).toEqual([0, 0, 0, 0]);
  });
});

describe("renderGaussianMap", () => {
  it("peaks at the keypoint and hits exp(-0.5) at sigma", () => {
    const map = renderGaussianMap([{ x: 32, y: 32, conf: 1 }], 64, 64, { sigma: 6 });
    expect(map.data[32 * 64 + 32]).toBe(1);
    expect(map.data[32 * 64 + 38]).toBeCloseTo(Math.exp(-0.5), 4);
  });

  it("renders empty keypoint sets as zeros", () => {
    const map = renderGaussianMap([], 16, 16, { sigma: 3 });
    expect(map.data.every((v) => v === 0)).toBe(true);
  });
});

describe("buildGuidancePyramid", () => {
  it("matches the three stage shapes", () => {
    const maps = Array.from({ length: 16 }, () => full([1, 224, 224], 0.5));
    const [s1, s2, s3] = buildGuidancePyramid(maps);
    expect(s1.shape).toEqual([192, 16, 28, 28]);
    expect(s2.shape).toEqual([256, 8, 14, 14]);
    expect(s3.shape).toEqual([512, 4, 7, 7]);
  });

  it("propagates constants", () => {
    const [s1] = buildGuidancePyramid([full([1, 224, 224], 0.7)]);
    expect(s1.data.every((v) => Math.abs(v - Math.fround(0.7)) === 0)).toBe(true);
  });
});

describe("fusion", () => {
  it("zero guidance with the reference mixer is an identity", () => {
    const f = tensorFrom([2, 1, 2, 2], [0.5, -1.25, 3, 0.125, 2, -2, 0.75, 9]);
    const out = sattFuse(f, zeros(f.shape), PointwiseMixer.reference(2));
    expect(tensorsBitEqual(out, f)).toBe(true);
  });

  it("all-one guidance doubles the features", () => {
    const f = tensorFrom([1, 1, 2, 2], [1, 2, 3, 4]);
    const out = dattFuse(f, full(f.shape, 1), PointwiseMixer.reference(1));
    expect([...out.data]).toEqual([2, 4, 6, 8]);
  });
});

describe("discretize", () => {
  const uniformAlpha = () => ({
    edges: cellEdges().map(([from, to]) => ({ from, to, logits: new Array(NUM_OPS).fill(0) })),
  });

  it("breaks ties toward identity and the lowest sources", () => {
    const genotype = discretize(uniformAlpha(), 2);
    for (const node of genotype.nodes) {
      expect(node.edges.map((e) => e.from)).toEqual([0, 1]);
      expect(node.edges.every((e) => e.op === "identity")).toBe(true);
    }
  });

  it("never selects zero even when its logit dominates", () => {
    const alpha = {
      edges: cellEdges().map(([from, to]) => ({
        from,
        to,
        logits: [100, 1, 0, 0, 0, 0, 0],
      })),
    };
    const genotype = discretize(alpha, 2);
    for (const node of genotype.nodes) {
      expect(node.edges.every((e) => e.op === "identity")).toBe(true);
    }
  });

  it("caps retention at the available edges", () => {
    const genotype = discretize(uniformAlpha(), 5);
    expect(genotype.nodes.map((n) => n.edges.length)).toEqual([2, 3, 4, 5]);
  });
});
