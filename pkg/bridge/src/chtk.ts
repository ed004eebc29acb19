/**
 * CHTK binary token-dataset format: the interchange contract between this
 * exporter and the metrics core. Layout (all integers little-endian):
 *
 *   bytes 0..3   magic "CHTK"
 *   byte  4      format version (0x01)
 *   u32          codebook size K (>= 2)
 *   u32          sequence length N (>= 1)
 *   u32          grid rows    } both zero when no spatial layout;
 *   u32          grid cols    } otherwise rows * cols == N
 *   u64          sequence count
 *   count * N    u32 token ids, row-major, each < K
 *
 * The reader here is a strict mirror of the core's parser and exists so the
 * exporter can round-trip-check each file it writes.
 */

export const MAGIC = Buffer.from("CHTK", "ascii");
export const FORMAT_VERSION = 1;
const HEADER_END = 4 + 1 + 4 + 4 + 4 + 4 + 8; // 29

export class ChtkError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.name = "ChtkError";
    this.code = code;
  }
}

export interface TokenDataset {
  codebookSize: number;
  seqLen: number;
  /** null when the sequences carry no spatial layout */
  grid: { rows: number; cols: number } | null;
  /** one Uint32Array of length seqLen per sequence */
  sequences: Uint32Array[];
}

export function writeTokens(dataset: TokenDataset): Buffer {
  const { codebookSize, seqLen, grid, sequences } = dataset;
  if (!Number.isInteger(codebookSize) || codebookSize < 2) {
    throw new ChtkError("bad_header", `codebook size ${codebookSize} below minimum of 2`);
  }
  if (!Number.isInteger(seqLen) || seqLen < 1) {
    throw new ChtkError("bad_header", "sequence length must be >= 1");
  }
  if (grid && grid.rows * grid.cols !== seqLen) {
    throw new ChtkError(
      "bad_header",
      `grid ${grid.rows}x${grid.cols} does not cover seq_len ${seqLen}`,
    );
  }
  for (const [i, seq] of sequences.entries()) {
    if (seq.length !== seqLen) {
      throw new ChtkError("bad_header", `sequence ${i} has length ${seq.length}, want ${seqLen}`);
    }
    for (const id of seq) {
      if (id >= codebookSize) {
        throw new ChtkError(
          "token_out_of_range",
          `token id ${id} outside codebook of size ${codebookSize}`,
        );
      }
    }
  }

  const out = Buffer.alloc(HEADER_END + sequences.length * seqLen * 4);
  MAGIC.copy(out, 0);
  out.writeUInt8(FORMAT_VERSION, 4);
  out.writeUInt32LE(codebookSize, 5);
  out.writeUInt32LE(seqLen, 9);
  out.writeUInt32LE(grid ? grid.rows : 0, 13);
  out.writeUInt32LE(grid ? grid.cols : 0, 17);
  out.writeBigUInt64LE(BigInt(sequences.length), 21);
  let offset = HEADER_END;
  for (const seq of sequences) {
    for (const id of seq) {
      out.writeUInt32LE(id, offset);
      offset += 4;
    }
  }
  return out;
}

export function parseTokens(data: Buffer): TokenDataset {
  if (data.length < 4 || !data.subarray(0, 4).equals(MAGIC)) {
    throw new ChtkError("bad_magic", "not a CHTK token file (bad magic)");
  }
  if (data.length < 5) {
    throw new ChtkError("truncated", "header cut off before version byte");
  }
  if (data[4] !== FORMAT_VERSION) {
    throw new ChtkError("bad_version", `unsupported CHTK version ${data[4]}`);
  }
  if (data.length < HEADER_END) {
    throw new ChtkError("truncated", "header cut off before field block");
  }
  const codebookSize = data.readUInt32LE(5);
  const seqLen = data.readUInt32LE(9);
  const rows = data.readUInt32LE(13);
  const cols = data.readUInt32LE(17);
  const countBig = data.readBigUInt64LE(21);
  if (codebookSize < 2) {
    throw new ChtkError("bad_header", `codebook size ${codebookSize} below minimum of 2`);
  }
  if (seqLen < 1) {
    throw new ChtkError("bad_header", "sequence length must be >= 1");
  }
  if ((rows === 0) !== (cols === 0)) {
    throw new ChtkError("bad_header", `grid ${rows}x${cols} mixes zero and nonzero dims`);
  }
  if (rows !== 0 && rows * cols !== seqLen) {
    throw new ChtkError("bad_header", `grid ${rows}x${cols} does not cover seq_len ${seqLen}`);
  }
  const expected = BigInt(HEADER_END) + countBig * BigInt(seqLen) * 4n;
  if (BigInt(data.length) < expected) {
    throw new ChtkError(
      "truncated",
      `payload needs ${expected - BigInt(HEADER_END)} bytes, found ${data.length - HEADER_END}`,
    );
  }
  if (BigInt(data.length) > expected) {
    throw new ChtkError(
      "trailing_data",
      `${BigInt(data.length) - expected} trailing bytes after payload`,
    );
  }
  const count = Number(countBig);
  const sequences: Uint32Array[] = [];
  let offset = HEADER_END;
  for (let i = 0; i < count; i++) {
    const seq = new Uint32Array(seqLen);
    for (let j = 0; j < seqLen; j++) {
      const id = data.readUInt32LE(offset);
      offset += 4;
      if (id >= codebookSize) {
        throw new ChtkError(
          "token_out_of_range",
          `token id ${id} outside codebook of size ${codebookSize}`,
        );
      }
      seq[j] = id;
    }
    sequences.push(seq);
  }
  return {
    codebookSize,
    seqLen,
    grid: rows !== 0 ? { rows, cols } : null,
    sequences,
  };
}
