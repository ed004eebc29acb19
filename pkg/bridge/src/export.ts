/**
 * The exporter's core operation: encode every image in a directory with a
 * checkpoint and write one CHTK file.
 *
 * Contract:
 *   - images are processed in lexicographic filename order;
 *   - the declared codebook size and grid must match the checkpoint before
 *     anything is read or written;
 *   - per-image failures are collected and reported together, and nothing
 *     is written when any input failed;
 *   - every token id is validated against the declared codebook before the
 *     single write, so a corrupt checkpoint can never leave a partial or
 *     invalid file behind.
 */

import { createHash } from "node:crypto";
import { readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { Checkpoint, loadCheckpoint } from "./checkpoint.js";
import { encodeBatch } from "./encode.js";
import { loadImage, RgbImage } from "./imageio.js";
import { writeTokens } from "./chtk.js";

export interface BridgeConfig {
  checkpointPath: string;
  imageDir: string;
  batchSize: number;
  device: string;
  outPath: string;
  /** declared spatial layout recorded in the output header */
  grid: { rows: number; cols: number };
  /** declared codebook size; must match the checkpoint */
  codebookSize: number;
}

export class ExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ExportError";
  }
}

export class ImageBatchError extends Error {
  readonly failures: { path: string; reason: string }[];
  readonly total: number;

  constructor(failures: { path: string; reason: string }[], total: number) {
    super(`${failures.length} of ${total} image(s) failed to load`);
    this.name = "ImageBatchError";
    this.failures = failures;
    this.total = total;
  }
}

const IMAGE_EXTENSIONS = [".png", ".ppm"];

export function listImageFiles(dir: string): string[] {
  return readdirSync(dir)
    .filter((name) => IMAGE_EXTENSIONS.some((ext) => name.toLowerCase().endsWith(ext)))
    .sort();
}

/** Aborts (throws) before any image is read when config and checkpoint disagree. */
export function checkDeclaredShape(config: BridgeConfig, ckpt: Checkpoint): void {
  if (config.device !== "cpu") {
    throw new ExportError(`unsupported device ${JSON.stringify(config.device)}; only "cpu"`);
  }
  if (config.codebookSize !== ckpt.codebookSize) {
    throw new ExportError(
      `declared codebook size ${config.codebookSize} does not match ` +
        `checkpoint codebook size ${ckpt.codebookSize}`,
    );
  }
  const declaredN = config.grid.rows * config.grid.cols;
  if (declaredN !== ckpt.seqLen) {
    throw new ExportError(
      `declared grid ${config.grid.rows}x${config.grid.cols} yields ${declaredN} tokens, ` +
        `checkpoint seq_len is ${ckpt.seqLen}`,
    );
  }
}

export interface ExportResult {
  count: number;
  bytes: number;
  sha256: string;
  files: string[];
}

export function exportTokens(config: BridgeConfig): ExportResult {
  const ckpt = loadCheckpoint(config.checkpointPath);
  checkDeclaredShape(config, ckpt);

  const files = listImageFiles(config.imageDir);
  if (files.length === 0) {
    throw new ExportError(`no .png or .ppm images in ${config.imageDir}`);
  }

  const images: RgbImage[] = [];
  const failures: { path: string; reason: string }[] = [];
  for (const name of files) {
    const path = join(config.imageDir, name);
    try {
      images.push(loadImage(path));
    } catch (err) {
      failures.push({ path, reason: (err as Error).message });
    }
  }
  if (failures.length > 0) {
    throw new ImageBatchError(failures, files.length);
  }

  const sequences = encodeBatch(ckpt, images, config.batchSize);
  // writeTokens re-validates every id against the declared codebook, so a
  // corrupt checkpoint fails here, before a single byte reaches disk.
  const data = writeTokens({
    codebookSize: config.codebookSize,
    seqLen: ckpt.seqLen,
    grid: config.grid,
    sequences,
  });
  writeFileSync(config.outPath, data);
  return {
    count: sequences.length,
    bytes: data.length,
    sha256: createHash("sha256").update(data).digest("hex"),
    files,
  };
}
