/** Binary PGM (P5, maxval 255) codec matching the core library's conventions. */

import { readFileSync, readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { FormatError, Tensor, makeTensor } from "./tensor.js";

export function encodePgm(map: Tensor): Uint8Array {
  if (map.shape.length !== 3 || map.shape[0] !== 1) {
    throw new FormatError(`PGM maps must be [1, H, W], got [${map.shape}]`);
  }
  const [, h, w] = map.shape;
  const header = new TextEncoder().encode(`P5\n${w} ${h}\n255\n`);
  const out = new Uint8Array(header.length + w * h);
  out.set(header, 0);
  for (let i = 0; i < w * h; i++) {
    const clamped = Math.min(1, Math.max(0, map.data[i]));
    out[header.length + i] = Math.round(clamped * 255);
  }
  return out;
}

interface Token {
  text: string;
  start: number;
  end: number;
}

function* pgmTokens(data: Uint8Array): Generator<Token> {
  let i = 0;
  const isSpace = (b: number) => b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d || b === 0x0b || b === 0x0c;
  while (i < data.length) {
    const b = data[i];
    if (isSpace(b)) {
      i += 1;
    } else if (b === 0x23 /* # */) {
      while (i < data.length && data[i] !== 0x0a && data[i] !== 0x0d) i += 1;
    } else {
      const start = i;
      while (i < data.length && !isSpace(data[i])) i += 1;
      yield { text: new TextDecoder().decode(data.subarray(start, i)), start, end: i };
    }
  }
}

export function decodePgm(data: Uint8Array): Tensor {
  const tokens = pgmTokens(data);
  const fields: Token[] = [];
  for (let k = 0; k < 4; k++) {
    const next = tokens.next();
    if (next.done) throw new FormatError("incomplete PGM header", `byte ${data.length}`);
    fields.push(next.value);
  }
  const magic = fields[0].text;
  if (magic === "P2") throw new FormatError("ASCII PGM (P2) is unsupported; use binary P5", "byte 0");
  if (magic !== "P5") throw new FormatError(`bad PGM magic ${JSON.stringify(magic)}`, "byte 0");
  const w = Number(fields[1].text);
  const h = Number(fields[2].text);
  const maxval = Number(fields[3].text);
  if (!Number.isInteger(w) || !Number.isInteger(h) || w < 1 || h < 1) {
    throw new FormatError(`bad PGM size ${fields[1].text}x${fields[2].text}`, `byte ${fields[1].start}`);
  }
  if (maxval !== 255) {
    throw new FormatError(`unsupported maxval ${fields[3].text}, only 255`, `byte ${fields[3].start}`);
  }
  const pixelStart = fields[3].end + 1;
  const expected = pixelStart + w * h;
  if (data.length < expected) {
    throw new FormatError(
      `pixel data truncated: need ${expected} bytes, file has ${data.length}`,
      `byte ${data.length}`,
    );
  }
  if (data.length > expected) {
    throw new FormatError(`${data.length - expected} trailing bytes after pixels`, `byte ${expected}`);
  }
  const values = new Float32Array(w * h);
  for (let i = 0; i < w * h; i++) {
    values[i] = Math.fround(data[pixelStart + i] / 255);
  }
  return makeTensor([1, h, w], values);
}

export function readPgmFile(path: string): Tensor {
  return decodePgm(new Uint8Array(readFileSync(path)));
}

export function writePgmFile(path: string, map: Tensor): void {
  writeFileSync(path, encodePgm(map));
}

/** Read every .pgm in a directory, sorted by filename (the core CLI's order). */
export function readPgmDir(dir: string): Tensor[] {
  const names = readdirSync(dir).filter((n) => n.endsWith(".pgm")).sort();
  if (names.length === 0) throw new FormatError(`no .pgm files in ${dir}`);
  return names.map((n) => readPgmFile(join(dir, n)));
}
