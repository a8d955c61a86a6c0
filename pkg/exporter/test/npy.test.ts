import { describe, expect, it } from 'vitest';

import { decodeNpy, encodeNpy } from '../src/npy.js';

function customNpy(dict: string, dataBytes: number): Buffer {
  const unpadded = 10 + dict.length + 1;
  const total = Math.ceil(unpadded / 64) * 64;
  const header = dict + ' '.repeat(total - unpadded) + '\n';
  const buf = Buffer.alloc(total + dataBytes);
  buf.write('\x93NUMPY', 0, 'latin1');
  buf[6] = 1;
  buf[7] = 0;
  buf.writeUInt16LE(header.length, 8);
  buf.write(header, 10, 'latin1');
  return buf;
}

describe('encodeNpy', () => {
  it('round trips shape and values exactly', () => {
    const values = new Float64Array([1.5, -2.25, 3e-9, 0, 1e300, -1]);
    const out = decodeNpy(encodeNpy(values, 2, 3));
    expect(out.rows).toBe(2);
    expect(out.cols).toBe(3);
    expect(Array.from(out.data)).toEqual(Array.from(values));
  });

  it('writes the magic string and version 1.0', () => {
    const buf = encodeNpy(new Float64Array([1]), 1, 1);
    expect(buf.subarray(0, 6).toString('latin1')).toBe('\x93NUMPY');
    expect(buf[6]).toBe(1);
    expect(buf[7]).toBe(0);
  });

  it('pads the header so data starts on a 64-byte boundary', () => {
    for (const [rows, cols] of [[1, 1], [3, 4], [100, 712]] as const) {
      const buf = encodeNpy(new Float64Array(rows * cols), rows, cols);
      const headerLen = buf.readUInt16LE(8);
      expect((10 + headerLen) % 64).toBe(0);
    }
  });

  it('declares little-endian float64 C order', () => {
    const buf = encodeNpy(new Float64Array([1]), 1, 1);
    const header = buf.toString('latin1', 10, 10 + buf.readUInt16LE(8));
    expect(header).toContain("'descr': '<f8'");
    expect(header).toContain("'fortran_order': False");
    expect(header).toContain("'shape': (1, 1)");
  });

  it('stores doubles little-endian after the header', () => {
    const buf = encodeNpy(new Float64Array([1.0]), 1, 1);
    const start = 10 + buf.readUInt16LE(8);
    expect(Array.from(buf.subarray(start))).toEqual([0, 0, 0, 0, 0, 0, 0xf0, 0x3f]);
  });

  it('rejects a shape that disagrees with the data length', () => {
    expect(() => encodeNpy(new Float64Array(5), 2, 3)).toThrow(/does not match/);
    expect(() => encodeNpy(new Float64Array(4), -2, -2)).toThrow(/invalid shape/);
  });
});

describe('decodeNpy', () => {
  it('rejects files without the magic string', () => {
    expect(() => decodeNpy(Buffer.from('not an array'))).toThrow(/not an NPY/);
  });

  it('rejects other dtypes', () => {
    const dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 1), }";
    expect(() => decodeNpy(customNpy(dict, 4))).toThrow(/unsupported dtype/);
  });

  it('rejects Fortran order', () => {
    const dict = "{'descr': '<f8', 'fortran_order': True, 'shape': (1, 1), }";
    expect(() => decodeNpy(customNpy(dict, 8))).toThrow(/C-ordered/);
  });

  it('rejects non-2-D shapes', () => {
    const dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (4,), }";
    expect(() => decodeNpy(customNpy(dict, 32))).toThrow(/2-D/);
  });

  it('rejects truncated data sections', () => {
    const buf = encodeNpy(new Float64Array([1, 2, 3, 4]), 2, 2);
    expect(() => decodeNpy(buf.subarray(0, buf.length - 8))).toThrow(/wrong length/);
  });
});
