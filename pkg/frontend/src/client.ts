/**
 * Subprocess client for the core CLI. All heavy computation stays in the
 * core; this wrapper marshals tensors and JSON through the shared file
 * formats and surfaces core failures as exceptions carrying the core's
 * error message.
 */

import { spawnSync } from "node:child_process";
import { mkdirSync, mkdtempSync, readFileSync, readdirSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BenchRow, KeypointFile, parseBenchCsv, readGenotypeFile, writeAlphaFile, writeKeypointFile, Genotype, AlphaFile } from "./formats.js";
import { readTensorFile, writeTensorFile } from "./rdt.js";
import { Tensor } from "./tensor.js";

export class CoreError extends Error {
  constructor(message: string, readonly exitCode: number | null) {
    super(message);
    this.name = "CoreError";
  }
}

export interface CoreClientOptions {
  /** Command line used to launch the core CLI; defaults to $MOTIONKIT_CLI or `python3 -m motionkit.cli`. */
  command?: string[];
}

export interface DynimgOptions {
  window: number;
  stride?: number;
  norm?: "batch" | "minmax" | "none";
  refresh?: number;
}

export interface HeatmapOptions {
  sigma?: number;
  size?: number;
  stages?: number[];
}

export class CoreClient {
  private readonly command: string[];

  constructor(options: CoreClientOptions = {}) {
    if (options.command) {
      this.command = options.command;
    } else if (process.env.MOTIONKIT_CLI) {
      this.command = process.env.MOTIONKIT_CLI.split(" ");
    } else {
      this.command = ["python3", "-m", "motionkit.cli"];
    }
  }

  /** Run one core subcommand; returns the single-line summary from stdout. */
  run(args: string[]): string {
    const [exe, ...prefix] = this.command;
    const proc = spawnSync(exe, [...prefix, ...args], { encoding: "utf-8" });
    if (proc.error) throw new CoreError(`failed to launch core CLI: ${proc.error.message}`, null);
    if (proc.status !== 0) {
      const detail = (proc.stderr ?? "").trim() || (proc.stdout ?? "").trim();
      throw new CoreError(detail || `core CLI exited with ${proc.status}`, proc.status);
    }
    return (proc.stdout ?? "").trim();
  }

  private scratch(): string {
    return mkdtempSync(join(tmpdir(), "motionkit-client-"));
  }

  /** dynimg over a PGM directory or a stacked [T, C, H, W] tensor file. */
  dynimg(input: string | Tensor, options: DynimgOptions): { images: Tensor[]; summary: string } {
    const work = this.scratch();
    try {
      let inputPath: string;
      if (typeof input === "string") {
        inputPath = input;
      } else {
        inputPath = join(work, "input.rdt");
        writeTensorFile(inputPath, input);
      }
      const outDir = join(work, "out");
      const args = [
        "dynimg",
        "--input", inputPath,
        "--window", String(options.window),
        "--stride", String(options.stride ?? 1),
        "--norm", options.norm ?? "none",
        "--refresh", String(options.refresh ?? 64),
        "--out", outDir,
      ];
      const summary = this.run(args);
      const files = readdirSync(outDir).filter((n) => n.endsWith(".rdt")).sort();
      return { images: files.map((n) => readTensorFile(join(outDir, n))), summary };
    } finally {
      rmSync(work, { recursive: true, force: true });
    }
  }

  /** heatmap: renders per-frame maps and the per-stage guidance tensors. */
  heatmap(
    keypoints: KeypointFile,
    options: HeatmapOptions = {},
  ): { stages: Map<number, Tensor>; framePgms: Map<number, Uint8Array>; summary: string } {
    const work = this.scratch();
    try {
      const kpPath = join(work, "kp.json");
      writeKeypointFile(kpPath, keypoints);
      const outDir = join(work, "out");
      const stages = options.stages ?? [1, 2, 3];
      const args = [
        "heatmap",
        "--keypoints", kpPath,
        "--sigma", String(options.sigma ?? 6),
        "--size", String(options.size ?? 224),
        "--stages", stages.join(","),
        "--out", outDir,
      ];
      const summary = this.run(args);
      const stageTensors = new Map<number, Tensor>();
      for (const s of stages) stageTensors.set(s, readTensorFile(join(outDir, `stage${s}.rdt`)));
      const framePgms = new Map<number, Uint8Array>();
      for (const name of readdirSync(outDir)) {
        const match = /^frame_(\d+)\.pgm$/.exec(name);
        if (match) framePgms.set(Number(match[1]), new Uint8Array(readFileSync(join(outDir, name))));
      }
      return { stages: stageTensors, framePgms, summary };
    } finally {
      rmSync(work, { recursive: true, force: true });
    }
  }

  fuse(
    features: Tensor,
    guidance: Tensor,
    mode: "datt" | "satt" = "datt",
    mixerTensor?: Tensor,
  ): Tensor {
    const work = this.scratch();
    try {
      const fPath = join(work, "f.rdt");
      const gPath = join(work, "g.rdt");
      const oPath = join(work, "o.rdt");
      writeTensorFile(fPath, features);
      writeTensorFile(gPath, guidance);
      const args = ["fuse", "--features", fPath, "--guidance", gPath, "--mode", mode, "--out", oPath];
      if (mixerTensor) {
        const mPath = join(work, "mixer.rdt");
        writeTensorFile(mPath, mixerTensor);
        args.push("--mixer", "file", "--mixer-path", mPath);
      }
      this.run(args);
      return readTensorFile(oPath);
    } finally {
      rmSync(work, { recursive: true, force: true });
    }
  }

  genotype(alpha: AlphaFile, retainK = 2): Genotype {
    const work = this.scratch();
    try {
      const alphaPath = join(work, "alpha.json");
      writeAlphaFile(alphaPath, alpha);
      const outPath = join(work, "genotype.json");
      this.run(["genotype", "--alpha", alphaPath, "--retain-k", String(retainK), "--out", outPath]);
      return readGenotypeFile(outPath);
    } finally {
      rmSync(work, { recursive: true, force: true });
    }
  }

  bench(frames: number, window: number, shape: [number, number, number], repeats = 3, seed = 0): BenchRow[] {
    const work = this.scratch();
    try {
      const outPath = join(work, "bench.csv");
      this.run([
        "bench",
        "--frames", String(frames),
        "--window", String(window),
        "--shape", shape.join("x"),
        "--repeats", String(repeats),
        "--seed", String(seed),
        "--out", outPath,
      ]);
      return parseBenchCsv(readFileSync(outPath, "utf-8"));
    } finally {
      rmSync(work, { recursive: true, force: true });
    }
  }

  /** Raw subcommand run against caller-managed paths (used by the pipeline example). */
  runRaw(args: string[]): string {
    return this.run(args);
  }
}

export function ensureDir(path: string): void {
  mkdirSync(path, { recursive: true });
}
