/** Browser glue: file decode, canvas blitting, coordinate mapping,
 * downloads, and toasts.  Everything here is a thin adapter over the
 * pure modules so it stays out of the unit-test surface.
 */

import type { RgbaImage } from "./types.js";

export async function readFileBytes(file: File): Promise<Uint8Array> {
  return new Uint8Array(await file.arrayBuffer());
}

/** Decode any browser-supported image file into an RGBA buffer. */
export async function decodeImageFile(bytes: Uint8Array): Promise<RgbaImage> {
  const bitmap = await createImageBitmap(
    new Blob([bytes as unknown as BlobPart]),
  );
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  bitmap.close();
  return { width: bitmap.width || data.width, height: data.height, data: data.data };
}

export function blit(canvas: HTMLCanvasElement, frame: RgbaImage): void {
  if (canvas.width !== frame.width || canvas.height !== frame.height) {
    canvas.width = frame.width;
    canvas.height = frame.height;
  }
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  const pixels = ctx.createImageData(frame.width, frame.height);
  pixels.data.set(frame.data);
  ctx.putImageData(pixels, 0, 0);
}

/** Map a mouse event on the (CSS-scaled) canvas to image pixel coords. */
export function eventToImageCoords(
  event: MouseEvent,
  canvas: HTMLCanvasElement,
): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  const x = Math.floor(((event.clientX - rect.left) / rect.width) * canvas.width);
  const y = Math.floor(((event.clientY - rect.top) / rect.height) * canvas.height);
  return { x, y };
}

export function downloadBytes(filename: string, bytes: Uint8Array): void {
  const url = URL.createObjectURL(
    new Blob([bytes as unknown as BlobPart], { type: "image/png" }),
  );
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  setTimeout(() => URL.revokeObjectURL(url), 0);
}

export function toast(container: HTMLElement, message: string): void {
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  container.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}
