/** Pure pixel compositor: base image + translucent mask + click markers.
 *
 * All rendering happens on plain RGBA buffers so the exact pixels are
 * unit-testable; the canvas layer just blits the result.
 */

import type { ClickMarker, MaskBitmap, RgbaImage } from "./types.js";

export const MASK_ALPHA = 0.4;
export const MASK_COLOR: readonly [number, number, number] = [65, 105, 225];
export const POSITIVE_COLOR: readonly [number, number, number] = [46, 204, 113];
export const NEGATIVE_COLOR: readonly [number, number, number] = [231, 76, 60];
export const MARKER_RADIUS = 6;
export const MARKER_RING = 2;

/** Blend the mask color over covered pixels and stamp opaque markers. */
export function composite(
  base: RgbaImage,
  mask: MaskBitmap | null,
  markers: readonly ClickMarker[],
): RgbaImage {
  const { width, height } = base;
  if (mask && (mask.width !== width || mask.height !== height)) {
    throw new Error(
      `mask is ${mask.width}x${mask.height}, image is ${width}x${height}`,
    );
  }
  const out = new Uint8ClampedArray(base.data); // copy; base stays pristine
  if (mask) {
    const keep = 1 - MASK_ALPHA;
    const [mr, mg, mb] = MASK_COLOR;
    const rAdd = mr * MASK_ALPHA;
    const gAdd = mg * MASK_ALPHA;
    const bAdd = mb * MASK_ALPHA;
    for (let p = 0, i = 0; p < mask.data.length; p++, i += 4) {
      if (mask.data[p]) {
        out[i] = Math.round(out[i] * keep + rAdd);
        out[i + 1] = Math.round(out[i + 1] * keep + gAdd);
        out[i + 2] = Math.round(out[i + 2] * keep + bAdd);
        out[i + 3] = 255;
      }
    }
  }
  for (const marker of markers) stampMarker(out, width, height, marker);
  return { width, height, data: out };
}

function stampMarker(
  out: Uint8ClampedArray,
  width: number,
  height: number,
  marker: ClickMarker,
): void {
  const [cr, cg, cb] =
    marker.kind === "pos" ? POSITIVE_COLOR : NEGATIVE_COLOR;
  const rOuter = MARKER_RADIUS + MARKER_RING;
  const r2 = MARKER_RADIUS * MARKER_RADIUS;
  const rOuter2 = rOuter * rOuter;
  const y0 = Math.max(0, marker.y - rOuter);
  const y1 = Math.min(height - 1, marker.y + rOuter);
  const x0 = Math.max(0, marker.x - rOuter);
  const x1 = Math.min(width - 1, marker.x + rOuter);
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const d2 = (y - marker.y) ** 2 + (x - marker.x) ** 2;
      if (d2 > rOuter2) continue;
      const i = (y * width + x) * 4;
      if (d2 <= r2) {
        out[i] = cr;
        out[i + 1] = cg;
        out[i + 2] = cb;
      } else {
        out[i] = 255; // white ring keeps markers visible on any backdrop
        out[i + 1] = 255;
        out[i + 2] = 255;
      }
      out[i + 3] = 255;
    }
  }
}

export function buffersEqual(a: RgbaImage, b: RgbaImage): boolean {
  if (a.width !== b.width || a.height !== b.height) return false;
  if (a.data.length !== b.data.length) return false;
  for (let i = 0; i < a.data.length; i++) {
    if (a.data[i] !== b.data[i]) return false;
  }
  return true;
}
