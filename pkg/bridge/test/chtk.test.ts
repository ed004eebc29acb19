import { describe, expect, it } from "vitest";

import { ChtkError, parseTokens, writeTokens } from "../src/chtk.js";

/**
 * Fixed reference bytes shared with the metrics core's own test suite:
 * codebook 4, seq_len 2, no grid, one sequence [0, 3].
 */
const CORE_GOLDEN = Buffer.from([
  0x43, 0x48, 0x54, 0x4b, // "CHTK"
  0x01, // version
  0x04, 0x00, 0x00, 0x00, // codebook size 4
  0x02, 0x00, 0x00, 0x00, // seq_len 2
  0x00, 0x00, 0x00, 0x00, // rows 0
  0x00, 0x00, 0x00, 0x00, // cols 0
  0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // count 1
  0x00, 0x00, 0x00, 0x00, // token 0
  0x03, 0x00, 0x00, 0x00, // token 3
]);

function errorCode(fn: () => unknown): string {
  try {
    fn();
  } catch (err) {
    expect(err).toBeInstanceOf(ChtkError);
    return (err as ChtkError).code;
  }
  throw new Error("expected a ChtkError");
}

describe("writeTokens", () => {
  it("reproduces the shared golden bytes exactly", () => {
    const data = writeTokens({
      codebookSize: 4,
      seqLen: 2,
      grid: null,
      sequences: [Uint32Array.from([0, 3])],
    });
    expect(data.equals(CORE_GOLDEN)).toBe(true);
  });

  it("round-trips a dataset with a grid", () => {
    const sequences = [Uint32Array.from([1, 0, 2, 5, 4, 3]), Uint32Array.from([5, 5, 0, 0, 1, 2])];
    const data = writeTokens({ codebookSize: 6, seqLen: 6, grid: { rows: 2, cols: 3 }, sequences });
    const back = parseTokens(data);
    expect(back.codebookSize).toBe(6);
    expect(back.seqLen).toBe(6);
    expect(back.grid).toEqual({ rows: 2, cols: 3 });
    expect(back.sequences.map((s) => [...s])).toEqual(sequences.map((s) => [...s]));
  });

  it("rejects out-of-range ids before producing any bytes", () => {
    expect(
      errorCode(() =>
        writeTokens({
          codebookSize: 4,
          seqLen: 2,
          grid: null,
          sequences: [Uint32Array.from([0, 4])],
        }),
      ),
    ).toBe("token_out_of_range");
  });

  it("rejects a grid that does not cover the sequence length", () => {
    expect(
      errorCode(() =>
        writeTokens({
          codebookSize: 4,
          seqLen: 5,
          grid: { rows: 2, cols: 3 },
          sequences: [Uint32Array.from([0, 1, 2, 3, 0])],
        }),
      ),
    ).toBe("bad_header");
  });

  it("rejects ragged sequences and tiny codebooks", () => {
    expect(
      errorCode(() =>
        writeTokens({ codebookSize: 4, seqLen: 2, grid: null, sequences: [Uint32Array.from([0])] }),
      ),
    ).toBe("bad_header");
    expect(
      errorCode(() =>
        writeTokens({ codebookSize: 1, seqLen: 1, grid: null, sequences: [Uint32Array.from([0])] }),
      ),
    ).toBe("bad_header");
  });
});

describe("parseTokens", () => {
  it("parses the shared golden bytes", () => {
    const ds = parseTokens(CORE_GOLDEN);
    expect(ds.codebookSize).toBe(4);
    expect(ds.seqLen).toBe(2);
    expect(ds.grid).toBeNull();
    expect([...ds.sequences[0]!]).toEqual([0, 3]);
  });

  const mutate = (offset: number, value: number): Buffer => {
    const copy = Buffer.from(CORE_GOLDEN);
    copy[offset] = value;
    return copy;
  };

  it("labels each corruption with its own error code", () => {
    expect(errorCode(() => parseTokens(mutate(0, 0x58)))).toBe("bad_magic");
    expect(errorCode(() => parseTokens(mutate(4, 0x02)))).toBe("bad_version");
    expect(errorCode(() => parseTokens(mutate(5, 0x01)))).toBe("bad_header"); // codebook 1
    expect(errorCode(() => parseTokens(mutate(9, 0x00)))).toBe("bad_header"); // seq_len 0
    expect(errorCode(() => parseTokens(mutate(13, 0x01)))).toBe("bad_header"); // rows 1, cols 0
    expect(errorCode(() => parseTokens(mutate(33, 0x04)))).toBe("token_out_of_range");
    expect(errorCode(() => parseTokens(CORE_GOLDEN.subarray(0, 30)))).toBe("truncated");
    expect(errorCode(() => parseTokens(CORE_GOLDEN.subarray(0, 3)))).toBe("bad_magic");
    expect(errorCode(() => parseTokens(Buffer.concat([CORE_GOLDEN, Buffer.from([0])])))).toBe(
      "trailing_data",
    );
  });

  it("rejects a grid whose area disagrees with seq_len", () => {
    const copy = Buffer.from(CORE_GOLDEN);
    copy.writeUInt32LE(3, 13); // rows 3
    copy.writeUInt32LE(7, 17); // cols 7, but seq_len is 2
    expect(errorCode(() => parseTokens(copy))).toBe("bad_header");
  });
});
