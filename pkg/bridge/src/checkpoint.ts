/**
 * Self-describing VQ tokenizer checkpoint container.
 *
 * A checkpoint is a JSON document: scalar config plus named float32
 * tensors stored as base64. Two encoder architectures are supported:
 *
 *   "palette"    patch mean color (RGB in [0,1]) -> nearest of K centroids.
 *                Tensors: codebook (K, 3).
 *   "linear-vq"  flattened patch pixels -> affine projection to an
 *                embedding -> nearest of K codebook rows.
 *                Tensors: proj_weight (d, ph*pw*3), proj_bias (d),
 *                codebook (K, d).
 *
 * Every load re-validates shape consistency, finiteness, and the
 * config-vs-tensor invariants, so a corrupt file is rejected before any
 * image is encoded.
 */

import { readFileSync } from "node:fs";

export class CheckpointError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CheckpointError";
  }
}

export const ARCHITECTURES = ["palette", "linear-vq"] as const;
export type Architecture = (typeof ARCHITECTURES)[number];

export interface Tensor {
  shape: number[];
  data: Float32Array;
}

export interface Checkpoint {
  architecture: Architecture;
  codebookSize: number;
  seqLen: number;
  /** native input resolution [height, width]; images are resized/cropped to this */
  nativeSize: [number, number];
  /** patch size [ph, pw]; the token grid is (H/ph) x (W/pw) */
  patch: [number, number];
  /** embedding width (linear-vq only; 3 for palette) */
  embedDim: number;
  tensors: Map<string, Tensor>;
}

export function gridOf(ckpt: Checkpoint): { rows: number; cols: number } {
  return {
    rows: ckpt.nativeSize[0] / ckpt.patch[0],
    cols: ckpt.nativeSize[1] / ckpt.patch[1],
  };
}

const FORMAT_NAME = "vq-checkpoint";

function asPositiveInt(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isInteger(value) || value < 1) {
    throw new CheckpointError(`${what} must be a positive integer, got ${JSON.stringify(value)}`);
  }
  return value;
}

function asIntPair(value: unknown, what: string): [number, number] {
  if (!Array.isArray(value) || value.length !== 2) {
    throw new CheckpointError(`${what} must be a two-element array`);
  }
  return [asPositiveInt(value[0], `${what}[0]`), asPositiveInt(value[1], `${what}[1]`)];
}

function decodeTensor(name: string, raw: unknown): Tensor {
  if (typeof raw !== "object" || raw === null) {
    throw new CheckpointError(`tensor ${name} is not an object`);
  }
  const { shape, dtype, data } = raw as { shape?: unknown; dtype?: unknown; data?: unknown };
  if (dtype !== "float32") {
    throw new CheckpointError(`tensor ${name}: only float32 is supported, got ${dtype}`);
  }
  if (!Array.isArray(shape) || shape.length === 0) {
    throw new CheckpointError(`tensor ${name}: missing shape`);
  }
  const dims = shape.map((d, i) => asPositiveInt(d, `tensor ${name} shape[${i}]`));
  if (typeof data !== "string") {
    throw new CheckpointError(`tensor ${name}: data must be a base64 string`);
  }
  const bytes = Buffer.from(data, "base64");
  const want = dims.reduce((a, b) => a * b, 1);
  if (bytes.length !== want * 4) {
    throw new CheckpointError(
      `tensor ${name}: ${bytes.length} bytes does not match shape [${dims}] (want ${want * 4})`,
    );
  }
  const values = new Float32Array(want);
  for (let i = 0; i < want; i++) {
    const v = bytes.readFloatLE(i * 4);
    if (!Number.isFinite(v)) {
      throw new CheckpointError(`tensor ${name}: non-finite value at index ${i}`);
    }
    values[i] = v;
  }
  return { shape: dims, data: values };
}

function encodeTensor(tensor: Tensor): { shape: number[]; dtype: string; data: string } {
  const bytes = Buffer.alloc(tensor.data.length * 4);
  for (let i = 0; i < tensor.data.length; i++) {
    bytes.writeFloatLE(tensor.data[i]!, i * 4);
  }
  return { shape: tensor.shape, dtype: "float32", data: bytes.toString("base64") };
}

function requireTensor(ckpt: Checkpoint, name: string, shape: number[]): Tensor {
  const tensor = ckpt.tensors.get(name);
  if (!tensor) {
    throw new CheckpointError(`missing tensor ${name}`);
  }
  if (tensor.shape.length !== shape.length || tensor.shape.some((d, i) => d !== shape[i])) {
    throw new CheckpointError(
      `tensor ${name}: shape [${tensor.shape}] does not match config (want [${shape}])`,
    );
  }
  return tensor;
}

/** Cross-checks config scalars against tensor shapes; throws on any mismatch. */
export function validateCheckpoint(ckpt: Checkpoint): void {
  const [h, w] = ckpt.nativeSize;
  const [ph, pw] = ckpt.patch;
  if (h % ph !== 0 || w % pw !== 0) {
    throw new CheckpointError(
      `native size ${h}x${w} is not divisible into ${ph}x${pw} patches`,
    );
  }
  const { rows, cols } = gridOf(ckpt);
  if (rows * cols !== ckpt.seqLen) {
    throw new CheckpointError(
      `patch grid ${rows}x${cols} yields ${rows * cols} tokens, config says ${ckpt.seqLen}`,
    );
  }
  if (ckpt.codebookSize < 2) {
    throw new CheckpointError(`codebook size ${ckpt.codebookSize} below minimum of 2`);
  }
  if (ckpt.architecture === "palette") {
    if (ckpt.embedDim !== 3) {
      throw new CheckpointError(`palette architecture requires embed_dim 3, got ${ckpt.embedDim}`);
    }
    requireTensor(ckpt, "codebook", [ckpt.codebookSize, 3]);
  } else {
    const inputDim = ph * pw * 3;
    requireTensor(ckpt, "proj_weight", [ckpt.embedDim, inputDim]);
    requireTensor(ckpt, "proj_bias", [ckpt.embedDim]);
    requireTensor(ckpt, "codebook", [ckpt.codebookSize, ckpt.embedDim]);
  }
}

export function parseCheckpoint(text: string): Checkpoint {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new CheckpointError(`checkpoint is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null) {
    throw new CheckpointError("checkpoint root must be an object");
  }
  const root = doc as Record<string, unknown>;
  if (root.format !== FORMAT_NAME) {
    throw new CheckpointError(`unrecognized checkpoint format ${JSON.stringify(root.format)}`);
  }
  if (root.version !== 1) {
    throw new CheckpointError(`unsupported checkpoint version ${JSON.stringify(root.version)}`);
  }
  const architecture = root.architecture;
  if (architecture !== "palette" && architecture !== "linear-vq") {
    throw new CheckpointError(`unknown architecture ${JSON.stringify(architecture)}`);
  }
  if (typeof root.tensors !== "object" || root.tensors === null) {
    throw new CheckpointError("checkpoint has no tensors block");
  }
  const tensors = new Map<string, Tensor>();
  for (const [name, raw] of Object.entries(root.tensors as Record<string, unknown>)) {
    tensors.set(name, decodeTensor(name, raw));
  }
  const ckpt: Checkpoint = {
    architecture,
    codebookSize: asPositiveInt(root.codebook_size, "codebook_size"),
    seqLen: asPositiveInt(root.seq_len, "seq_len"),
    nativeSize: asIntPair(root.native_size, "native_size"),
    patch: asIntPair(root.patch, "patch"),
    embedDim: asPositiveInt(root.embed_dim, "embed_dim"),
    tensors,
  };
  validateCheckpoint(ckpt);
  return ckpt;
}

export function loadCheckpoint(path: string): Checkpoint {
  return parseCheckpoint(readFileSync(path, "utf8"));
}

export function serializeCheckpoint(ckpt: Checkpoint): string {
  validateCheckpoint(ckpt);
  const tensors: Record<string, unknown> = {};
  for (const name of [...ckpt.tensors.keys()].sort()) {
    tensors[name] = encodeTensor(ckpt.tensors.get(name)!);
  }
  const doc = {
    format: FORMAT_NAME,
    version: 1,
    architecture: ckpt.architecture,
    codebook_size: ckpt.codebookSize,
    seq_len: ckpt.seqLen,
    native_size: ckpt.nativeSize,
    patch: ckpt.patch,
    embed_dim: ckpt.embedDim,
    tensors,
  };
  return JSON.stringify(doc, null, 2) + "\n";
}
