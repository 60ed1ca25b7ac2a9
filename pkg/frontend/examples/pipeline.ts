/**
 * End-to-end example: a directory of PGM frames plus a keypoint JSON file in,
 * fused guidance tensors out.
 *
 * Steps:
 *  1. read the frames and tile them into the stage-1 feature shape
 *     [192, 16, 28, 28] (maxpool 224->28, subsample 16 frames, repeat 192
 *     channels), written as features_stage1.rdt;
 *  2. render the skeleton guidance through the core CLI (heatmap) and keep
 *     its stage-1 guidance tensor;
 *  3. fuse features with guidance (reference mixer) -> fused_stage1.rdt;
 *  4. stream the frames into min-max-normalized dynamic images
 *     -> di/DI_xxxxxx.rdt.
 *
 * Every output is byte-identical to what the core CLI produces from the same
 * inputs (see tests/pipeline.test.ts).
 */

import { join } from "node:path";

import { CoreClient, ensureDir } from "../src/client.js";
import { readKeypointFile } from "../src/formats.js";
import { readPgmDir } from "../src/pgm.js";
import { writeTensorFile } from "../src/rdt.js";
import {
  DEFAULT_STAGES,
  PointwiseMixer,
  StreamingPooler,
  buildGuidancePyramid,
  minmaxNormalize,
  sattFuse,
} from "../src/ops.js";

export interface PipelineOptions {
  window?: number;
  sigma?: number;
  client?: CoreClient;
}

export interface PipelineResult {
  featuresPath: string;
  fusedPath: string;
  diDir: string;
  diCount: number;
}

export function runPipeline(
  framesDir: string,
  keypointJsonPath: string,
  outDir: string,
  options: PipelineOptions = {},
): PipelineResult {
  const window = options.window ?? 8;
  const sigma = options.sigma ?? 6;
  const client = options.client ?? new CoreClient();
  ensureDir(outDir);

  const frames = readPgmDir(framesDir);
  const stage1 = DEFAULT_STAGES[0];

  // 1. frame intensities tiled into the stage-1 feature shape
  const [features] = buildGuidancePyramid(frames, [stage1]);
  const featuresPath = join(outDir, "features_stage1.rdt");
  writeTensorFile(featuresPath, features);

  // 2. skeleton guidance from the core CLI
  const keypoints = readKeypointFile(keypointJsonPath);
  const heatmaps = client.heatmap(keypoints, { sigma, stages: [stage1.stage] });
  const guidance = heatmaps.stages.get(stage1.stage)!;

  // 3. fuse (skeleton-guided flavor, reference mixer)
  const fused = sattFuse(features, guidance, PointwiseMixer.reference(stage1.channels));
  const fusedPath = join(outDir, "fused_stage1.rdt");
  writeTensorFile(fusedPath, fused);

  // 4. streaming dynamic images, min-max normalized
  const diDir = join(outDir, "di");
  ensureDir(diDir);
  const pooler = new StreamingPooler(frames.slice(0, window));
  const images = [pooler.currentDi];
  for (const frame of frames.slice(window)) images.push(pooler.step(frame));
  images.forEach((di, k) => {
    const { values } = minmaxNormalize(di);
    writeTensorFile(join(diDir, `DI_${String(k + 1).padStart(6, "0")}.rdt`), values);
  });

  return { featuresPath, fusedPath, diDir, diCount: images.length };
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);

if (invokedDirectly) {
  const [framesDir, kpJson, outDir] = process.argv.slice(2);
  if (!framesDir || !kpJson || !outDir) {
    console.error("usage: node pipeline.js <frames-dir> <keypoints.json> <out-dir>");
    process.exit(1);
  }
  const result = runPipeline(framesDir, kpJson, outDir);
  console.log(
    `pipeline: ${result.diCount} dynamic images, features=${result.featuresPath}, fused=${result.fusedPath}`,
  );
}
