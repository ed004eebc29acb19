/**
 * Minimal image loading for the exporter: 8-bit RGB from PNG or binary PPM
 * (P6, maxval 255). Grayscale and alpha inputs are normalized to RGB;
 * anything else is rejected with a descriptive error.
 */

import { readFileSync } from "node:fs";
import { PNG } from "pngjs";

export interface RgbImage {
  width: number;
  height: number;
  /** height * width * 3 bytes, row-major, RGB interleaved */
  pixels: Uint8Array;
}

export class ImageError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ImageError";
  }
}

function parsePpm(data: Buffer): RgbImage {
  if (data.length < 2 || data.toString("ascii", 0, 2) !== "P6") {
    throw new ImageError("not a binary PPM (P6) file");
  }
  // Header: "P6", whitespace-separated width, height, maxval, then a single
  // whitespace byte before the pixel payload. '#' starts a comment line.
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (pos < data.length && /\s/.test(String.fromCharCode(data[pos]!))) pos++;
    if (pos < data.length && data[pos] === 0x23) {
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    let start = pos;
    while (pos < data.length && /\d/.test(String.fromCharCode(data[pos]!))) pos++;
    if (pos === start) {
      throw new ImageError("malformed PPM header");
    }
    fields.push(Number(data.toString("ascii", start, pos)));
  }
  pos++; // the single whitespace byte after maxval
  const [width, height, maxval] = fields as [number, number, number];
  if (maxval !== 255) {
    throw new ImageError(`only maxval 255 PPM is supported, got ${maxval}`);
  }
  if (width < 1 || height < 1) {
    throw new ImageError(`bad PPM dimensions ${width}x${height}`);
  }
  const need = width * height * 3;
  if (data.length - pos < need) {
    throw new ImageError(`PPM payload truncated: need ${need} bytes, found ${data.length - pos}`);
  }
  return { width, height, pixels: new Uint8Array(data.subarray(pos, pos + need)) };
}

function parsePng(data: Buffer): RgbImage {
  let png: PNG;
  try {
    png = PNG.sync.read(data);
  } catch (err) {
    throw new ImageError(`corrupt PNG: ${(err as Error).message}`);
  }
  const { width, height } = png;
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    pixels[i * 3] = png.data[i * 4]!;
    pixels[i * 3 + 1] = png.data[i * 4 + 1]!;
    pixels[i * 3 + 2] = png.data[i * 4 + 2]!;
  }
  return { width, height, pixels };
}

export function decodeImage(data: Buffer, name: string): RgbImage {
  if (data.length >= 8 && data.readUInt32BE(0) === 0x89504e47) {
    return parsePng(data);
  }
  if (data.length >= 2 && data.toString("ascii", 0, 2) === "P6") {
    return parsePpm(data);
  }
  throw new ImageError(`${name}: unrecognized image format (want PNG or P6 PPM)`);
}

export function loadImage(path: string): RgbImage {
  return decodeImage(readFileSync(path), path);
}

export function writePpm(image: RgbImage): Buffer {
  const header = Buffer.from(`P6\n${image.width} ${image.height}\n255\n`, "ascii");
  return Buffer.concat([header, Buffer.from(image.pixels)]);
}
