/**
 * Deterministic image -> token-sequence encoding.
 *
 * Preprocessing is fixed: scale with bilinear interpolation so the image
 * covers the checkpoint's native resolution, then center-crop. All
 * arithmetic is float64 with a fixed traversal order, so a given
 * (checkpoint, image) pair always yields the same ids on every platform.
 *
 * Tokens are emitted in row-major patch order. Nearest-neighbor ties go to
 * the lowest codebook index.
 */

import { Checkpoint, gridOf } from "./checkpoint.js";
import { RgbImage } from "./imageio.js";

function bilinearResize(src: RgbImage, dstW: number, dstH: number): RgbImage {
  if (src.width === dstW && src.height === dstH) {
    return src;
  }
  const out = new Uint8Array(dstW * dstH * 3);
  const xRatio = src.width / dstW;
  const yRatio = src.height / dstH;
  for (let y = 0; y < dstH; y++) {
    const sy = Math.min(Math.max((y + 0.5) * yRatio - 0.5, 0), src.height - 1);
    const y0 = Math.floor(sy);
    const y1 = Math.min(y0 + 1, src.height - 1);
    const fy = sy - y0;
    for (let x = 0; x < dstW; x++) {
      const sx = Math.min(Math.max((x + 0.5) * xRatio - 0.5, 0), src.width - 1);
      const x0 = Math.floor(sx);
      const x1 = Math.min(x0 + 1, src.width - 1);
      const fx = sx - x0;
      for (let c = 0; c < 3; c++) {
        const p00 = src.pixels[(y0 * src.width + x0) * 3 + c]!;
        const p01 = src.pixels[(y0 * src.width + x1) * 3 + c]!;
        const p10 = src.pixels[(y1 * src.width + x0) * 3 + c]!;
        const p11 = src.pixels[(y1 * src.width + x1) * 3 + c]!;
        const top = p00 + (p01 - p00) * fx;
        const bottom = p10 + (p11 - p10) * fx;
        out[(y * dstW + x) * 3 + c] = Math.round(top + (bottom - top) * fy);
      }
    }
  }
  return { width: dstW, height: dstH, pixels: out };
}

/** Scale to cover the native resolution, then center-crop to it exactly. */
export function preprocess(image: RgbImage, nativeSize: [number, number]): RgbImage {
  const [nativeH, nativeW] = nativeSize;
  if (image.width === nativeW && image.height === nativeH) {
    return image;
  }
  const scale = Math.max(nativeH / image.height, nativeW / image.width);
  const scaledW = Math.max(nativeW, Math.round(image.width * scale));
  const scaledH = Math.max(nativeH, Math.round(image.height * scale));
  const scaled = bilinearResize(image, scaledW, scaledH);
  const offX = Math.floor((scaledW - nativeW) / 2);
  const offY = Math.floor((scaledH - nativeH) / 2);
  const pixels = new Uint8Array(nativeW * nativeH * 3);
  for (let y = 0; y < nativeH; y++) {
    const srcStart = ((y + offY) * scaledW + offX) * 3;
    pixels.set(scaled.pixels.subarray(srcStart, srcStart + nativeW * 3), y * nativeW * 3);
  }
  return { width: nativeW, height: nativeH, pixels };
}

function nearestRow(query: Float64Array, table: Float32Array, rows: number): number {
  const dim = query.length;
  let best = 0;
  let bestDist = Infinity;
  for (let r = 0; r < rows; r++) {
    let dist = 0;
    for (let c = 0; c < dim; c++) {
      const diff = query[c]! - table[r * dim + c]!;
      dist += diff * diff;
    }
    if (dist < bestDist) {
      bestDist = dist;
      best = r;
    }
  }
  return best;
}

/** Encode one already-preprocessed native-resolution image. */
export function encodeImage(ckpt: Checkpoint, image: RgbImage): Uint32Array {
  const [ph, pw] = ckpt.patch;
  const { rows, cols } = gridOf(ckpt);
  const codebook = ckpt.tensors.get("codebook")!;
  const codebookRows = codebook.shape[0]!;
  const ids = new Uint32Array(rows * cols);

  const isPalette = ckpt.architecture === "palette";
  const inputDim = ph * pw * 3;
  const patchVec = new Float64Array(isPalette ? 3 : inputDim);
  const embedded = isPalette ? patchVec : new Float64Array(ckpt.embedDim);
  const projWeight = isPalette ? null : ckpt.tensors.get("proj_weight")!.data;
  const projBias = isPalette ? null : ckpt.tensors.get("proj_bias")!.data;

  for (let pr = 0; pr < rows; pr++) {
    for (let pc = 0; pc < cols; pc++) {
      if (isPalette) {
        let r = 0;
        let g = 0;
        let b = 0;
        for (let y = 0; y < ph; y++) {
          for (let x = 0; x < pw; x++) {
            const base = ((pr * ph + y) * image.width + pc * pw + x) * 3;
            r += image.pixels[base]!;
            g += image.pixels[base + 1]!;
            b += image.pixels[base + 2]!;
          }
        }
        const area = ph * pw * 255;
        patchVec[0] = r / area;
        patchVec[1] = g / area;
        patchVec[2] = b / area;
      } else {
        let k = 0;
        for (let y = 0; y < ph; y++) {
          for (let x = 0; x < pw; x++) {
            const base = ((pr * ph + y) * image.width + pc * pw + x) * 3;
            patchVec[k++] = image.pixels[base]! / 255;
            patchVec[k++] = image.pixels[base + 1]! / 255;
            patchVec[k++] = image.pixels[base + 2]! / 255;
          }
        }
        for (let d = 0; d < ckpt.embedDim; d++) {
          let acc = projBias![d]!;
          for (let c = 0; c < inputDim; c++) {
            acc += projWeight![d * inputDim + c]! * patchVec[c]!;
          }
          embedded[d] = acc;
        }
      }
      ids[pr * cols + pc] = nearestRow(embedded, codebook.data, codebookRows);
    }
  }
  return ids;
}

/**
 * Encode raw images in fixed order. ``batchSize`` only chunks the work;
 * it never changes the ids.
 */
export function encodeBatch(
  ckpt: Checkpoint,
  images: RgbImage[],
  batchSize: number,
): Uint32Array[] {
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new RangeError(`batch size must be a positive integer, got ${batchSize}`);
  }
  const out: Uint32Array[] = [];
  for (let start = 0; start < images.length; start += batchSize) {
    for (const image of images.slice(start, start + batchSize)) {
      out.push(encodeImage(ckpt, preprocess(image, ckpt.nativeSize)));
    }
  }
  return out;
}
