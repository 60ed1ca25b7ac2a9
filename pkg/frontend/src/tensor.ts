/**
 * Minimal float32 tensor: explicit shape plus a flat row-major Float32Array.
 * The layout matches the core library's wire format, so payloads can be
 * exchanged without copying when the host is little-endian.
 */

export class FormatError extends Error {
  constructor(message: string, readonly where?: string) {
    super(where ? `${message} (at ${where})` : message);
    this.name = "FormatError";
  }
}

export class ShapeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ShapeError";
  }
}

export interface Tensor {
  readonly shape: readonly number[];
  readonly data: Float32Array;
}

export function numElements(shape: readonly number[]): number {
  let n = 1;
  for (const d of shape) {
    if (!Number.isInteger(d) || d < 1) {
      throw new ShapeError(`shape extents must be positive integers, got [${shape}]`);
    }
    n *= d;
  }
  return n;
}

export function makeTensor(shape: readonly number[], data: Float32Array): Tensor {
  const count = numElements(shape);
  if (data.length !== count) {
    throw new ShapeError(`data length ${data.length} does not match shape [${shape}] (${count})`);
  }
  return { shape: [...shape], data };
}

export function zeros(shape: readonly number[]): Tensor {
  return makeTensor(shape, new Float32Array(numElements(shape)));
}

export function full(shape: readonly number[], value: number): Tensor {
  const data = new Float32Array(numElements(shape));
  data.fill(Math.fround(value));
  return makeTensor(shape, data);
}

export function tensorFrom(shape: readonly number[], values: ArrayLike<number>): Tensor {
  return makeTensor(shape, Float32Array.from(values, Math.fround));
}

export function sameShape(a: readonly number[], b: readonly number[]): boolean {
  return a.length === b.length && a.every((d, i) => d === b[i]);
}

export function assertSameShape(context: string, a: readonly number[], b: readonly number[]): void {
  if (!sameShape(a, b)) {
    throw new ShapeError(`${context}: shape [${a}] vs shape [${b}]`);
  }
}

export function tensorsBitEqual(a: Tensor, b: Tensor): boolean {
  if (!sameShape(a.shape, b.shape)) return false;
  const ua = new Uint32Array(a.data.buffer, a.data.byteOffset, a.data.length);
  const ub = new Uint32Array(b.data.buffer, b.data.byteOffset, b.data.length);
  for (let i = 0; i < ua.length; i++) {
    if (ua[i] !== ub[i]) return false;
  }
  return true;
}
