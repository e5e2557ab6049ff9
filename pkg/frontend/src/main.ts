/** Entry point: wires the session controller to the page. */

import { ApiClient, bytesToBase64 } from "./api.js";
import {
  blit,
  decodeImageFile,
  downloadBytes,
  eventToImageCoords,
  readFileBytes,
  toast,
} from "./dom.js";
import { formatIou } from "./format.js";
import { decodeMaskPng } from "./png.js";
import { SessionController, type SessionView } from "./session.js";
import type { ClickKind, RgbaImage } from "./types.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = byId<HTMLCanvasElement>("canvas");
const toasts = byId<HTMLDivElement>("toasts");
const imageInput = byId<HTMLInputElement>("image-input");
const gtInput = byId<HTMLInputElement>("gt-input");
const undoButton = byId<HTMLButtonElement>("undo");
const exportButton = byId<HTMLButtonElement>("export");
const iouReadout = byId<HTMLSpanElement>("iou");
const clickReadout = byId<HTMLSpanElement>("clicks");
const statusLine = byId<HTMLSpanElement>("status");
const modePos = byId<HTMLInputElement>("mode-pos");

let loadedImage: RgbaImage | null = null;
let loadedImageB64: string | null = null;
let loadedGtB64: string | undefined;

const controller = new SessionController(
  new ApiClient((input, init) => fetch(input, init)),
  decodeMaskPng,
  {
    onRender: (frame) => blit(canvas, frame),
    onToast: (message) => toast(toasts, message),
    onState: (view) => applyView(view),
  },
);

function applyView(view: SessionView): void {
  undoButton.disabled = !view.canUndo;
  exportButton.disabled = !view.canExport;
  clickReadout.textContent = String(view.clickCount);
  iouReadout.textContent = formatIou(view.iou);
  statusLine.textContent = view.pending
    ? "refining…"
    : view.sessionId
      ? "ready"
      : "load an image to start";
}

async function reopen(): Promise<void> {
  if (!loadedImage || !loadedImageB64) return;
  try {
    await controller.open(loadedImage, loadedImageB64, loadedGtB64);
  } catch (err) {
    toast(toasts, err instanceof Error ? err.message : String(err));
  }
}

imageInput.addEventListener("change", async () => {
  const file = imageInput.files?.[0];
  if (!file) return;
  const bytes = await readFileBytes(file);
  try {
    loadedImage = await decodeImageFile(bytes);
  } catch {
    toast(toasts, "cannot decode that image file");
    return;
  }
  loadedImageB64 = bytesToBase64(bytes);
  blit(canvas, loadedImage);
  await reopen();
});

gtInput.addEventListener("change", async () => {
  const file = gtInput.files?.[0];
  loadedGtB64 = file ? bytesToBase64(await readFileBytes(file)) : undefined;
  await reopen(); // rebuild the session so the IoU readout goes live
});

function currentKind(): ClickKind {
  return modePos.checked ? "pos" : "neg";
}

canvas.addEventListener("click", (event) => {
  const { x, y } = eventToImageCoords(event, canvas);
  void controller.placeClick(x, y, currentKind());
});

canvas.addEventListener("contextmenu", (event) => {
  event.preventDefault(); // right-click is a negative click shortcut
  const { x, y } = eventToImageCoords(event, canvas);
  void controller.placeClick(x, y, "neg");
});

undoButton.addEventListener("click", () => {
  void controller.undo();
});

exportButton.addEventListener("click", async () => {
  try {
    const { bytes, filename } = await controller.exportMask();
    downloadBytes(filename, bytes);
  } catch (err) {
    toast(toasts, err instanceof Error ? err.message : String(err));
  }
});

applyView(controller.view());
