/** Wire and client-side domain types for the annotation UI. */

export type ClickKind = "pos" | "neg";

export interface ClickMarker {
  x: number;
  y: number;
  kind: ClickKind;
  ordinal: number;
}

/** Session payload as returned by every state-bearing endpoint. */
export interface SessionPayload {
  session_id: string;
  round: number;
  clicks: ClickMarker[];
  iou: number | null;
  mask_png: string; // base64 PNG, 8-bit grayscale {0,255}
  prob_png: string; // base64 PNG, 16-bit grayscale
}

/** Decoded binary mask: one byte per pixel, 0 or 1, row-major. */
export interface MaskBitmap {
  width: number;
  height: number;
  data: Uint8Array;
}

/** RGBA pixel buffer (4 bytes per pixel, row-major). */
export interface RgbaImage {
  width: number;
  height: number;
  data: Uint8ClampedArray;
}

export interface ApiFailure {
  status: number;
  code: string;
  message: string;
}

export function isApiFailure(value: unknown): value is ApiFailure {
  return (
    typeof value === "object" &&
    value !== null &&
    "status" in value &&
    "code" in value &&
    "message" in value
  );
}
