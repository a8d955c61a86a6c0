/**
 * Model access behind a thin adapter.
 *
 * Any CLIP-compatible checkpoint can back an export by implementing
 * `ModelAdapter`; the job's model identifier picks the implementation.
 * This build ships the `toy:<dim>` family, a fully deterministic
 * encoder whose "weights" are the SHA-256 compression function: every
 * input is hashed in counter mode into Gaussian coordinates and
 * unit-normalized. That is enough to exercise the whole pipeline,
 * byte-for-byte reproducibly, without downloading a model.
 */

import { createHash } from 'node:crypto';

import { ConfigError } from './errors.js';

export interface ModelAdapter {
  readonly id: string;
  readonly dim: number;
  encodeImage(bytes: Uint8Array): Promise<Float64Array>;
  encodeText(text: string): Promise<Float64Array>;
}

export class UnreadableImageError extends Error {}

/** Identify common raster formats by magic number, or null. */
export function sniffImageFormat(bytes: Uint8Array): string | null {
  const startsWith = (sig: number[], offset = 0) =>
    bytes.length >= offset + sig.length && sig.every((b, i) => bytes[offset + i] === b);
  if (startsWith([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a])) return 'png';
  if (startsWith([0xff, 0xd8, 0xff])) return 'jpeg';
  if (startsWith([0x47, 0x49, 0x46, 0x38])) return 'gif';
  if (startsWith([0x42, 0x4d])) return 'bmp';
  if (startsWith([0x52, 0x49, 0x46, 0x46]) && startsWith([0x57, 0x45, 0x42, 0x50], 8)) {
    return 'webp';
  }
  return null;
}

function uniformsFromDigest(digest: Buffer): number[] {
  const out: number[] = [];
  for (let i = 0; i < 4; i++) {
    const x = digest.readBigUInt64LE(i * 8) >> 11n;
    out.push((Number(x) + 0.5) / 2 ** 53);
  }
  return out;
}

function hashToUnitVector(dim: number, seed: Buffer): Float64Array {
  const out = new Float64Array(dim);
  const counter = Buffer.alloc(4);
  let filled = 0;
  for (let block = 0; filled < dim; block++) {
    counter.writeUInt32LE(block, 0);
    const digest = createHash('sha256').update(seed).update(counter).digest();
    const [u1, u2, u3, u4] = uniformsFromDigest(digest);
    const r1 = Math.sqrt(-2 * Math.log(u1));
    const r2 = Math.sqrt(-2 * Math.log(u3));
    const block4 = [
      r1 * Math.cos(2 * Math.PI * u2),
      r1 * Math.sin(2 * Math.PI * u2),
      r2 * Math.cos(2 * Math.PI * u4),
      r2 * Math.sin(2 * Math.PI * u4),
    ];
    for (const v of block4) {
      if (filled < dim) out[filled++] = v;
    }
  }
  let sq = 0;
  for (const v of out) sq += v * v;
  const norm = Math.sqrt(sq);
  if (norm === 0) throw new Error('degenerate embedding');
  for (let i = 0; i < dim; i++) out[i] /= norm;
  return out;
}

/** Unambiguous seed material: model and kind are NUL-free, payload is length-framed. */
function seedFor(modelId: string, kind: 'image' | 'text', payload: Uint8Array): Buffer {
  const frame = Buffer.alloc(8);
  frame.writeBigUInt64LE(BigInt(payload.length), 0);
  return Buffer.concat([
    Buffer.from(modelId, 'utf8'),
    Buffer.from([0]),
    Buffer.from(kind, 'utf8'),
    Buffer.from([0]),
    frame,
    Buffer.from(payload),
  ]);
}

class ToyAdapter implements ModelAdapter {
  readonly id: string;
  readonly dim: number;

  constructor(dim: number) {
    this.id = `toy:${dim}`;
    this.dim = dim;
  }

  async encodeImage(bytes: Uint8Array): Promise<Float64Array> {
    const format = sniffImageFormat(bytes);
    if (format === null) {
      throw new UnreadableImageError('not a recognizable raster image');
    }
    return hashToUnitVector(this.dim, seedFor(this.id, 'image', bytes));
  }

  async encodeText(text: string): Promise<Float64Array> {
    return hashToUnitVector(this.dim, seedFor(this.id, 'text', Buffer.from(text, 'utf8')));
  }
}

export function loadAdapter(modelId: string): ModelAdapter {
  const toy = /^toy:(\d+)$/.exec(modelId);
  if (toy) {
    const dim = Number(toy[1]);
    if (dim < 2 || dim > 65536) {
      throw new ConfigError(`toy dimension must be in [2, 65536], got ${dim}`);
    }
    return new ToyAdapter(dim);
  }
  throw new ConfigError(
    `unknown model '${modelId}'; this build ships the deterministic 'toy:<dim>' family`
  );
}
