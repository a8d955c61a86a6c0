/**
 * Minimal NPY version 1.0 reader and writer for 2-D float64 arrays.
 *
 * The byte layout follows the format spec: the magic string, a version
 * pair, a little-endian header length, then a Python dict literal
 * padded with spaces so the data section starts on a 64-byte boundary.
 * Only C-ordered '<f8' matrices are supported, which is exactly what
 * the dataset contract uses.
 */

const MAGIC = Buffer.from('\x93NUMPY', 'latin1');

export interface NpyMatrix {
  rows: number;
  cols: number;
  data: Float64Array;
}

export function encodeNpy(data: Float64Array, rows: number, cols: number): Buffer {
  if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 0 || cols < 0) {
    throw new Error(`invalid shape (${rows}, ${cols})`);
  }
  if (rows * cols !== data.length) {
    throw new Error(`shape (${rows}, ${cols}) does not match ${data.length} values`);
  }
  const dict = `{'descr': '<f8', 'fortran_order': False, 'shape': (${rows}, ${cols}), }`;
  const preamble = MAGIC.length + 2 + 2;
  const unpadded = preamble + dict.length + 1;
  const total = Math.ceil(unpadded / 64) * 64;
  const header = dict + ' '.repeat(total - unpadded) + '\n';

  const out = Buffer.alloc(total + data.length * 8);
  MAGIC.copy(out, 0);
  out[6] = 1;
  out[7] = 0;
  out.writeUInt16LE(header.length, 8);
  out.write(header, 10, 'latin1');
  for (let i = 0; i < data.length; i++) {
    out.writeDoubleLE(data[i], total + i * 8);
  }
  return out;
}

export function decodeNpy(buf: Buffer): NpyMatrix {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error('not an NPY file');
  }
  if (buf[6] !== 1 || buf[7] !== 0) {
    throw new Error(`unsupported NPY version ${buf[6]}.${buf[7]}`);
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.toString('latin1', 10, 10 + headerLen);
  const descr = /'descr':\s*'([^']+)'/.exec(header);
  if (!descr || descr[1] !== '<f8') {
    throw new Error(`unsupported dtype ${descr ? descr[1] : '<missing>'}`);
  }
  if (!/'fortran_order':\s*False/.test(header)) {
    throw new Error('only C-ordered arrays are supported');
  }
  const shape = /'shape':\s*\(([^)]*)\)/.exec(header);
  if (!shape) {
    throw new Error('NPY header is missing a shape');
  }
  const dims = shape[1].split(',').map(s => s.trim()).filter(s => s.length > 0).map(Number);
  if (dims.length !== 2 || dims.some(d => !Number.isInteger(d) || d < 0)) {
    throw new Error(`expected a 2-D shape, got (${shape[1]})`);
  }
  const [rows, cols] = dims;
  const start = 10 + headerLen;
  if (buf.length !== start + rows * cols * 8) {
    throw new Error('NPY data section has the wrong length');
  }
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readDoubleLE(start + i * 8);
  }
  return { rows, cols, data };
}
