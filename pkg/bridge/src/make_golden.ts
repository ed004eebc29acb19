/**
 * Regenerates the checked-in golden fixtures from scratch:
 *
 *   golden/checkpoint.json   reference linear-vq checkpoint
 *   golden/images/*.ppm      four deterministic test images
 *   golden/golden.chtk       their exported token file
 *   golden/golden.sha256     its content digest
 *
 * Everything is derived from fixed PRNG seeds, so reruns are byte-identical.
 * The core's test suite re-reads golden.chtk to pin cross-package interop.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { Checkpoint, serializeCheckpoint } from "./checkpoint.js";
import { exportTokens } from "./export.js";
import { RgbImage, writePpm } from "./imageio.js";

/** mulberry32: tiny deterministic PRNG, uniform in [0, 1). */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function buildGoldenCheckpoint(): Checkpoint {
  const codebookSize = 32;
  const embedDim = 8;
  const patch: [number, number] = [8, 8];
  const nativeSize: [number, number] = [32, 32];
  const inputDim = patch[0] * patch[1] * 3;

  const rand = mulberry32(0xc0deb00c);
  const fill = (n: number, scale: number) => {
    const out = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      out[i] = Math.fround((rand() * 2 - 1) * scale);
    }
    return out;
  };

  const projWeight = fill(embedDim * inputDim, 0.25);
  const projBias = fill(embedDim, 0.05);

  // Codebook rows are embeddings of sample patches (alternating constant
  // colors and per-pixel noise), so the quantizer's vocabulary actually
  // covers the reachable embedding region and real images hit many rows.
  const codebook = new Float32Array(codebookSize * embedDim);
  const patchVec = new Float64Array(inputDim);
  for (let row = 0; row < codebookSize; row++) {
    if (row % 2 === 0) {
      const r = rand();
      const g = rand();
      const b = rand();
      for (let i = 0; i < inputDim; i += 3) {
        patchVec[i] = r;
        patchVec[i + 1] = g;
        patchVec[i + 2] = b;
      }
    } else {
      for (let i = 0; i < inputDim; i++) {
        patchVec[i] = rand();
      }
    }
    for (let d = 0; d < embedDim; d++) {
      let acc = projBias[d]!;
      for (let c = 0; c < inputDim; c++) {
        acc += projWeight[d * inputDim + c]! * patchVec[c]!;
      }
      codebook[row * embedDim + d] = Math.fround(acc);
    }
  }

  return {
    architecture: "linear-vq",
    codebookSize,
    seqLen: 16,
    nativeSize,
    patch,
    embedDim,
    tensors: new Map([
      ["proj_weight", { shape: [embedDim, inputDim], data: projWeight }],
      ["proj_bias", { shape: [embedDim], data: projBias }],
      ["codebook", { shape: [codebookSize, embedDim], data: codebook }],
    ]),
  };
}

/** Smooth ramps plus hard blocks; sized off-native to exercise resize+crop. */
export function buildGoldenImages(): RgbImage[] {
  const images: RgbImage[] = [];
  const sizes: [number, number][] = [
    [48, 40],
    [32, 32],
    [40, 56],
    [64, 48],
  ];
  for (const [index, [width, height]] of sizes.entries()) {
    const rand = mulberry32(0x1000 + index);
    const phase = rand() * 255;
    const blockValue = [
      Math.floor(rand() * 256),
      Math.floor(rand() * 256),
      Math.floor(rand() * 256),
    ];
    const pixels = new Uint8Array(width * height * 3);
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        const base = (y * width + x) * 3;
        const inBlock = x >= width / 2 && y >= height / 2;
        if (inBlock) {
          pixels[base] = blockValue[0]!;
          pixels[base + 1] = blockValue[1]!;
          pixels[base + 2] = blockValue[2]!;
        } else {
          pixels[base] = Math.round((x / (width - 1)) * 255);
          pixels[base + 1] = Math.round((y / (height - 1)) * 255);
          pixels[base + 2] = Math.round((phase + x + y) % 256);
        }
      }
    }
    images.push({ width, height, pixels });
  }
  return images;
}

export function regenerateGolden(goldenDir: string): string {
  mkdirSync(join(goldenDir, "images"), { recursive: true });

  const ckpt = buildGoldenCheckpoint();
  writeFileSync(join(goldenDir, "checkpoint.json"), serializeCheckpoint(ckpt));

  for (const [i, image] of buildGoldenImages().entries()) {
    writeFileSync(join(goldenDir, "images", `im${String(i).padStart(2, "0")}.ppm`), writePpm(image));
  }

  const result = exportTokens({
    checkpointPath: join(goldenDir, "checkpoint.json"),
    imageDir: join(goldenDir, "images"),
    outPath: join(goldenDir, "golden.chtk"),
    grid: { rows: 4, cols: 4 },
    codebookSize: ckpt.codebookSize,
    batchSize: 2,
    device: "cpu",
  });
  writeFileSync(join(goldenDir, "golden.sha256"), `${result.sha256}\n`);
  return result.sha256;
}

const selfPath = fileURLToPath(import.meta.url);
if (process.argv[1] && selfPath === process.argv[1]) {
  // compiled file lives in dist/, so the package root is one level up
  const goldenDir = join(dirname(selfPath), "..", "golden");
  const digest = regenerateGolden(goldenDir);
  console.log(`golden regenerated: sha256=${digest}`);
}
