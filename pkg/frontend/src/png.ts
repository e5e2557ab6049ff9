/** Minimal PNG reader for the service's mask format.
 *
 * Masks arrive as non-interlaced 8-bit grayscale PNGs with pixel values
 * {0, 255}.  Decoding them by hand (signature, IHDR, IDAT inflate via
 * DecompressionStream, per-row unfilter) keeps the client free of image
 * libraries and works identically in the browser and in node tests.
 */

import type { MaskBitmap } from "./types.js";

const SIGNATURE = [137, 80, 78, 71, 13, 10, 26, 10];

async function inflate(data: Uint8Array): Promise<Uint8Array> {
  const stream = new Blob([data as BlobPart])
    .stream()
    .pipeThrough(new DecompressionStream("deflate"));
  return new Uint8Array(await new Response(stream).arrayBuffer());
}

function readU32(bytes: Uint8Array, at: number): number {
  return (
    ((bytes[at] << 24) | (bytes[at + 1] << 16) | (bytes[at + 2] << 8) | bytes[at + 3]) >>> 0
  );
}

interface Header {
  width: number;
  height: number;
  bitDepth: number;
  colorType: number;
  interlace: number;
}

function parseChunks(bytes: Uint8Array): { header: Header; idat: Uint8Array } {
  for (let i = 0; i < SIGNATURE.length; i++) {
    if (bytes[i] !== SIGNATURE[i]) throw new Error("not a PNG file");
  }
  let header: Header | null = null;
  const idatParts: Uint8Array[] = [];
  let at = 8;
  while (at + 8 <= bytes.length) {
    const length = readU32(bytes, at);
    const type = String.fromCharCode(...bytes.subarray(at + 4, at + 8));
    const data = bytes.subarray(at + 8, at + 8 + length);
    if (type === "IHDR") {
      header = {
        width: readU32(data, 0),
        height: readU32(data, 4),
        bitDepth: data[8],
        colorType: data[9],
        interlace: data[12],
      };
    } else if (type === "IDAT") {
      idatParts.push(data);
    } else if (type === "IEND") {
      break;
    }
    at += 12 + length; // length + type + data + crc
  }
  if (!header) throw new Error("PNG has no header chunk");
  const total = idatParts.reduce((n, p) => n + p.length, 0);
  const idat = new Uint8Array(total);
  let offset = 0;
  for (const part of idatParts) {
    idat.set(part, offset);
    offset += part.length;
  }
  return { header, idat };
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

/** Undo per-row filtering for a 1-byte-per-pixel image. */
function unfilter(raw: Uint8Array, width: number, height: number): Uint8Array {
  const out = new Uint8Array(width * height);
  const stride = width + 1;
  for (let y = 0; y < height; y++) {
    const filter = raw[y * stride];
    const row = y * width;
    const prev = row - width;
    for (let x = 0; x < width; x++) {
      const v = raw[y * stride + 1 + x];
      const left = x > 0 ? out[row + x - 1] : 0;
      const up = y > 0 ? out[prev + x] : 0;
      const upLeft = x > 0 && y > 0 ? out[prev + x - 1] : 0;
      let value: number;
      switch (filter) {
        case 0:
          value = v;
          break;
        case 1:
          value = v + left;
          break;
        case 2:
          value = v + up;
          break;
        case 3:
          value = v + ((left + up) >> 1);
          break;
        case 4:
          value = v + paeth(left, up, upLeft);
          break;
        default:
          throw new Error(`unsupported PNG filter ${filter}`);
      }
      out[row + x] = value & 0xff;
    }
  }
  return out;
}

/** Decode an 8-bit grayscale PNG into a binary mask (>=128 counts as 1). */
export async function decodeMaskPng(png: Uint8Array): Promise<MaskBitmap> {
  const { header, idat } = parseChunks(png);
  if (header.colorType !== 0 || header.bitDepth !== 8 || header.interlace !== 0) {
    throw new Error(
      `expected plain 8-bit grayscale PNG, got color type ${header.colorType}, ` +
        `depth ${header.bitDepth}, interlace ${header.interlace}`,
    );
  }
  const raw = await inflate(idat);
  const expected = header.height * (header.width + 1);
  if (raw.length < expected) {
    throw new Error(`PNG data truncated: ${raw.length} < ${expected}`);
  }
  const gray = unfilter(raw, header.width, header.height);
  const data = new Uint8Array(gray.length);
  for (let i = 0; i < gray.length; i++) data[i] = gray[i] >= 128 ? 1 : 0;
  return { width: header.width, height: header.height, data };
}
