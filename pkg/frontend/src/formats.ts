/** JSON and CSV wire formats shared with the core CLI: keypoints, genotypes, alpha logits, bench reports. */

import { readFileSync, writeFileSync } from "node:fs";

import { FormatError } from "./tensor.js";

// ---------------------------------------------------------------------------
// keypoints
// ---------------------------------------------------------------------------

export interface Keypoint {
  x: number;
  y: number;
  conf: number;
}

export interface KeypointFrame {
  t: number;
  points: Keypoint[];
}

export interface KeypointFile {
  width: number;
  height: number;
  frames: KeypointFrame[];
}

function requireNumber(value: unknown, where: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new FormatError("expected a finite number", where);
  }
  return value;
}

function requireInt(value: unknown, where: string): number {
  const n = requireNumber(value, where);
  if (!Number.isInteger(n)) throw new FormatError("expected an integer", where);
  return n;
}

function parseJson(text: string): unknown {
  try {
    return JSON.parse(text);
  } catch (err) {
    throw new FormatError(`invalid JSON: ${(err as Error).message}`, "$");
  }
}

export function parseKeypointFile(text: string): KeypointFile {
  const doc = parseJson(text) as Record<string, unknown>;
  if (typeof doc !== "object" || doc === null) throw new FormatError("document must be an object", "$");
  const width = requireInt(doc.width, "$.width");
  const height = requireInt(doc.height, "$.height");
  if (width < 1 || height < 1) throw new FormatError(`bad frame size ${width}x${height}`, "$.width");
  if (!Array.isArray(doc.frames)) throw new FormatError("missing field 'frames'", "$");
  const frames: KeypointFrame[] = [];
  let lastT: number | undefined;
  doc.frames.forEach((frame, fi) => {
    const where = `$.frames[${fi}]`;
    const f = frame as Record<string, unknown>;
    const t = requireInt(f.t, `${where}.t`);
    if (lastT !== undefined && t <= lastT) {
      throw new FormatError(`frame indices must be strictly increasing (${t} after ${lastT})`, `${where}.t`);
    }
    lastT = t;
    if (!Array.isArray(f.points)) throw new FormatError("missing field 'points'", where);
    const points = f.points.map((pt, pi) => {
      const pw = `${where}.points[${pi}]`;
      const p = pt as Record<string, unknown>;
      const conf = requireNumber(p.conf, `${pw}.conf`);
      if (conf < 0 || conf > 1) throw new FormatError(`conf ${conf} outside [0, 1]`, `${pw}.conf`);
      return { x: requireNumber(p.x, `${pw}.x`), y: requireNumber(p.y, `${pw}.y`), conf };
    });
    frames.push({ t, points });
  });
  return { width, height, frames };
}

export function readKeypointFile(path: string): KeypointFile {
  return parseKeypointFile(readFileSync(path, "utf-8"));
}

export function writeKeypointFile(path: string, file: KeypointFile): void {
  writeFileSync(path, JSON.stringify(file, null, 2) + "\n");
}

// ---------------------------------------------------------------------------
// genotypes
// ---------------------------------------------------------------------------

export const OP_NAMES = [
  "zero",
  "identity",
  "dil_3x3x3",
  "conv_1x1x1",
  "conv_3x3x3",
  "conv_1x3x3",
  "conv_3x1x1",
] as const;

export type OpName = (typeof OP_NAMES)[number];
export const NUM_OPS = OP_NAMES.length;

export interface GenotypeEdge {
  from: number;
  op: OpName;
}

export interface GenotypeNode {
  node: number;
  edges: GenotypeEdge[];
}

export interface Genotype {
  retain_k: number;
  nodes: GenotypeNode[];
}

export function parseGenotype(text: string): Genotype {
  const doc = parseJson(text) as Record<string, unknown>;
  if (typeof doc !== "object" || doc === null) throw new FormatError("document must be an object", "$");
  const retainK = requireInt(doc.retain_k, "$.retain_k");
  if (retainK < 1) throw new FormatError(`retain_k must be >= 1, got ${retainK}`, "$.retain_k");
  if (!Array.isArray(doc.nodes) || doc.nodes.length === 0) {
    throw new FormatError("missing or empty 'nodes'", "$");
  }
  const nodes = doc.nodes.map((nodeDoc, ni) => {
    const where = `$.nodes[${ni}]`;
    const n = nodeDoc as Record<string, unknown>;
    const node = requireInt(n.node, `${where}.node`);
    if (!Array.isArray(n.edges) || n.edges.length === 0) {
      throw new FormatError(`node ${node} retains no edges`, where);
    }
    const edges = n.edges.map((edgeDoc, ei) => {
      const ew = `${where}.edges[${ei}]`;
      const e = edgeDoc as Record<string, unknown>;
      const from = requireInt(e.from, `${ew}.from`);
      const op = e.op;
      if (typeof op !== "string" || !OP_NAMES.includes(op as OpName)) {
        throw new FormatError(`unknown op ${JSON.stringify(op)}`, `${ew}.op`);
      }
      if (op === "zero") throw new FormatError("genotype edges never carry the Zero op", `${ew}.op`);
      if (from >= node) throw new FormatError(`edge source ${from} must precede its target node ${node}`, ew);
      return { from, op: op as OpName };
    });
    return { node, edges };
  });
  return { retain_k: retainK, nodes };
}

export function readGenotypeFile(path: string): Genotype {
  return parseGenotype(readFileSync(path, "utf-8"));
}

export function genotypesEqual(a: Genotype, b: Genotype): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

// ---------------------------------------------------------------------------
// alpha logits
// ---------------------------------------------------------------------------

export interface AlphaEdge {
  from: number;
  to: number;
  logits: number[];
}

export interface AlphaFile {
  edges: AlphaEdge[];
}

/** The 14 cell edges: every (i, j) with j an intermediate node (2..5) and i < j. */
export function cellEdges(): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let j = 2; j <= 5; j++) {
    for (let i = 0; i < j; i++) out.push([i, j]);
  }
  return out;
}

export function writeAlphaFile(path: string, alpha: AlphaFile): void {
  writeFileSync(path, JSON.stringify(alpha, null, 2) + "\n");
}

export function readAlphaFile(path: string): AlphaFile {
  const doc = parseJson(readFileSync(path, "utf-8")) as Record<string, unknown>;
  if (!Array.isArray(doc.edges)) throw new FormatError("missing field 'edges'", "$");
  const edges = doc.edges.map((edgeDoc, ei) => {
    const where = `$.edges[${ei}]`;
    const e = edgeDoc as Record<string, unknown>;
    const from = requireInt(e.from, `${where}.from`);
    const to = requireInt(e.to, `${where}.to`);
    if (!Array.isArray(e.logits) || e.logits.length !== NUM_OPS) {
      throw new FormatError(`need ${NUM_OPS} logits`, `${where}.logits`);
    }
    const logits = e.logits.map((v, vi) => requireNumber(v, `${where}.logits[${vi}]`));
    return { from, to, logits };
  });
  return { edges };
}

// ---------------------------------------------------------------------------
// bench CSV
// ---------------------------------------------------------------------------

export const BENCH_CSV_HEADER =
  "method,frames,window,channels,height,width,repeats,seconds,speedup_vs_pairwise";

export interface BenchRow {
  method: string;
  frames: number;
  window: number;
  channels: number;
  height: number;
  width: number;
  repeat: number;
  seconds: number;
  speedupVsPairwise: number;
}

export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.trim().split("\n");
  if (lines[0] !== BENCH_CSV_HEADER) {
    throw new FormatError(`unexpected CSV header ${JSON.stringify(lines[0])}`, "line 1");
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== 9) throw new FormatError(`expected 9 columns, got ${parts.length}`, `line ${i + 2}`);
    const nums = parts.slice(1).map((p, k) => {
      const v = Number(p);
      if (!Number.isFinite(v)) throw new FormatError(`non-numeric column ${k + 2}`, `line ${i + 2}`);
      return v;
    });
    return {
      method: parts[0],
      frames: nums[0],
      window: nums[1],
      channels: nums[2],
      height: nums[3],
      width: nums[4],
      repeat: nums[5],
      seconds: nums[6],
      speedupVsPairwise: nums[7],
    };
  });
}
