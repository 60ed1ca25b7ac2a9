export {
  FormatError,
  ShapeError,
  type Tensor,
  full,
  makeTensor,
  numElements,
  sameShape,
  tensorFrom,
  tensorsBitEqual,
  zeros,
} from "./tensor.js";
export { TENSOR_MAGIC, decodeTensor, encodeTensor, readTensorFile, writeTensorFile } from "./rdt.js";
export { decodePgm, encodePgm, readPgmDir, readPgmFile, writePgmFile } from "./pgm.js";
export {
  BENCH_CSV_HEADER,
  NUM_OPS,
  OP_NAMES,
  type AlphaFile,
  type BenchRow,
  type Genotype,
  type GenotypeEdge,
  type KeypointFile,
  type KeypointFrame,
  type OpName,
  cellEdges,
  genotypesEqual,
  parseBenchCsv,
  parseGenotype,
  parseKeypointFile,
  readAlphaFile,
  readGenotypeFile,
  readKeypointFile,
  writeAlphaFile,
  writeKeypointFile,
} from "./formats.js";
export {
  DEFAULT_REFRESH_PERIOD,
  DEFAULT_STAGES,
  type GaussianMapParams,
  PointwiseMixer,
  type StageConfig,
  StreamingPooler,
  betaCoefficients,
  buildGuidancePyramid,
  dattFuse,
  discretize,
  minmaxNormalize,
  rankPoolPairwise,
  rankPoolWeighted,
  renderGaussianMap,
  sattFuse,
} from "./ops.js";
export { CoreClient, CoreError, type DynimgOptions, type HeatmapOptions, ensureDir } from "./client.js";
