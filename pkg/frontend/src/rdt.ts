/**
 * Tensor container codec ("RDT1"): magic, u32 ndim, u32 dims, f32 payload,
 * everything little-endian. Decoding returns a zero-copy Float32Array view
 * over the file buffer when the platform is little-endian and the payload is
 * 4-byte aligned; otherwise the payload is converted element by element.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { FormatError, Tensor, makeTensor, numElements } from "./tensor.js";

export const TENSOR_MAGIC = "RDT1";
const MAX_DIMS = 16;
const MAX_ELEMENTS = 2 ** 40;

const HOST_LITTLE_ENDIAN = (() => {
  const probe = new Uint8Array(new Uint16Array([1]).buffer);
  return probe[0] === 1;
})();

export function encodeTensor(t: Tensor): Uint8Array {
  const header = 4 + 4 + 4 * t.shape.length;
  const out = new Uint8Array(header + 4 * t.data.length);
  const view = new DataView(out.buffer);
  out[0] = 0x52; // R
  out[1] = 0x44; // D
  out[2] = 0x54; // T
  out[3] = 0x31; // 1
  view.setUint32(4, t.shape.length, true);
  t.shape.forEach((d, i) => view.setUint32(8 + 4 * i, d, true));
  for (let i = 0; i < t.data.length; i++) {
    view.setFloat32(header + 4 * i, t.data[i], true);
  }
  return out;
}

export function decodeTensor(data: Uint8Array): Tensor {
  if (data.length < 4) throw new FormatError("file too short for magic", "byte 0");
  const magic = String.fromCharCode(data[0], data[1], data[2], data[3]);
  if (magic !== TENSOR_MAGIC) {
    throw new FormatError(`bad magic ${JSON.stringify(magic)}, expected "${TENSOR_MAGIC}"`, "byte 0");
  }
  if (data.length < 8) throw new FormatError("file truncated inside ndim field", "byte 4");
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const ndim = view.getUint32(4, true);
  if (ndim === 0 || ndim > MAX_DIMS) {
    throw new FormatError(`ndim ${ndim} outside [1, ${MAX_DIMS}]`, "byte 4");
  }
  const dimsEnd = 8 + 4 * ndim;
  if (data.length < dimsEnd) {
    throw new FormatError("file truncated inside dims", `byte ${data.length}`);
  }
  const shape: number[] = [];
  let count = 1;
  for (let k = 0; k < ndim; k++) {
    const d = view.getUint32(8 + 4 * k, true);
    if (d === 0) throw new FormatError(`dimension ${k} is zero`, `byte ${8 + 4 * k}`);
    shape.push(d);
    count *= d;
    if (count > MAX_ELEMENTS) {
      throw new FormatError(`dims [${shape}] overflow the element budget`, `byte ${8 + 4 * k}`);
    }
  }
  const expected = dimsEnd + 4 * count;
  if (data.length < expected) {
    throw new FormatError(
      `payload truncated: need ${expected} bytes, file has ${data.length}`,
      `byte ${data.length}`,
    );
  }
  if (data.length > expected) {
    throw new FormatError(`${data.length - expected} trailing bytes after payload`, `byte ${expected}`);
  }

  let payload: Float32Array;
  const payloadOffset = data.byteOffset + dimsEnd;
  if (HOST_LITTLE_ENDIAN && payloadOffset % 4 === 0) {
    payload = new Float32Array(data.buffer, payloadOffset, count);
  } else {
    payload = new Float32Array(count);
    for (let i = 0; i < count; i++) payload[i] = view.getFloat32(dimsEnd + 4 * i, true);
  }
  for (let i = 0; i < count; i++) {
    if (!Number.isFinite(payload[i])) {
      throw new FormatError("non-finite value in payload", `byte ${dimsEnd + 4 * i}`);
    }
  }
  return makeTensor(shape, payload);
}

export function readTensorFile(path: string): Tensor {
  return decodeTensor(new Uint8Array(readFileSync(path)));
}

export function writeTensorFile(path: string, t: Tensor): void {
  if (numElements(t.shape) !== t.data.length) {
    throw new FormatError(`tensor data length mismatch for shape [${t.shape}]`);
  }
  writeFileSync(path, encodeTensor(t));
}
