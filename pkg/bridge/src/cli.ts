#!/usr/bin/env node
/**
 * Command-line exporter: tokenizer checkpoint + image directory -> CHTK.
 *
 * Exit codes: 0 success, 1 export failure (bad checkpoint, unreadable
 * images, shape mismatch), 2 usage errors.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { BridgeConfig, exportTokens, ImageBatchError } from "./export.js";

const USAGE = `usage: tokenizer-bridge --checkpoint ckpt.json --images DIR --out FILE.chtk
                        --grid RxC --codebook K [--batch N] [--device cpu]

Encodes every .png/.ppm image in DIR (lexicographic order) with the
checkpoint and writes one CHTK token file. The declared --grid and
--codebook must match the checkpoint's sequence length and codebook size.`;

export function parseGrid(text: string): { rows: number; cols: number } {
  const match = /^(\d+)x(\d+)$/.exec(text);
  if (!match) {
    throw new RangeError(`grid must look like ROWSxCOLS, got ${JSON.stringify(text)}`);
  }
  const rows = Number(match[1]);
  const cols = Number(match[2]);
  if (rows < 1 || cols < 1) {
    throw new RangeError(`grid dimensions must be positive, got ${text}`);
  }
  return { rows, cols };
}

export function configFromArgv(argv: string[]): BridgeConfig {
  const { values } = parseArgs({
    args: argv,
    options: {
      checkpoint: { type: "string" },
      images: { type: "string" },
      out: { type: "string" },
      grid: { type: "string" },
      codebook: { type: "string" },
      batch: { type: "string", default: "16" },
      device: { type: "string", default: "cpu" },
      help: { type: "boolean", default: false },
    },
  });
  if (values.help) {
    throw new UsageHelp();
  }
  for (const key of ["checkpoint", "images", "out", "grid", "codebook"] as const) {
    if (!values[key]) {
      throw new RangeError(`missing required flag --${key}`);
    }
  }
  const codebookSize = Number(values.codebook);
  if (!Number.isInteger(codebookSize) || codebookSize < 2) {
    throw new RangeError(`--codebook must be an integer >= 2, got ${values.codebook}`);
  }
  const batchSize = Number(values.batch);
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new RangeError(`--batch must be a positive integer, got ${values.batch}`);
  }
  return {
    checkpointPath: values.checkpoint!,
    imageDir: values.images!,
    outPath: values.out!,
    grid: parseGrid(values.grid!),
    codebookSize,
    batchSize,
    device: values.device!,
  };
}

class UsageHelp extends Error {}

export function main(argv: string[]): number {
  let config: BridgeConfig;
  try {
    config = configFromArgv(argv);
  } catch (err) {
    if (err instanceof UsageHelp) {
      console.log(USAGE);
      return 0;
    }
    console.error(`tokenizer-bridge: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  try {
    const result = exportTokens(config);
    console.log(`sequences=${result.count}`);
    console.log(`bytes=${result.bytes}`);
    console.log(`sha256=${result.sha256}`);
    return 0;
  } catch (err) {
    if (err instanceof ImageBatchError) {
      for (const failure of err.failures) {
        console.error(`tokenizer-bridge: ${failure.path}: ${failure.reason}`);
      }
      console.error(
        `tokenizer-bridge: ${err.failures.length} of ${err.total} inputs failed; nothing written`,
      );
      return 1;
    }
    console.error(`tokenizer-bridge: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
