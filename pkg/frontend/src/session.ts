/** Client-side session state machine.
 *
 * Guarantees, independent of the DOM layer:
 *   - single-flight: at most one mutating request in the air per session;
 *   - reconciliation: markers always mirror the server's click list after
 *     every settled response (never the optimistic local guess);
 *   - failed clicks commit nothing and surface a toast;
 *   - out-of-bounds clicks and undo-with-no-history issue no request.
 */

import { ApiClient, base64ToBytes } from "./api.js";
import { composite } from "./overlay.js";
import type {
  ClickKind,
  ClickMarker,
  MaskBitmap,
  RgbaImage,
  SessionPayload,
} from "./types.js";
import { isApiFailure } from "./types.js";

export type MaskDecoder = (png: Uint8Array) => Promise<MaskBitmap>;

export type ClickOutcome = "applied" | "ignored" | "pending" | "failed";

export interface SessionEvents {
  onRender(frame: RgbaImage): void;
  onToast(message: string): void;
  /** Fired after every settled state change (for buttons/readouts). */
  onState(view: SessionView): void;
}

export interface SessionView {
  sessionId: string | null;
  clickCount: number;
  iou: number | null;
  canUndo: boolean;
  canExport: boolean;
  pending: boolean;
}

export class SessionController {
  private sessionId: string | null = null;
  private image: RgbaImage | null = null;
  private markers: ClickMarker[] = [];
  private mask: MaskBitmap | null = null;
  private maskPng: Uint8Array | null = null;
  private iou: number | null = null;
  private pending = false;

  constructor(
    private readonly api: ApiClient,
    private readonly decodeMask: MaskDecoder,
    private readonly events: SessionEvents,
  ) {}

  view(): SessionView {
    return {
      sessionId: this.sessionId,
      clickCount: this.markers.length,
      iou: this.iou,
      canUndo: this.markers.length > 0 && !this.pending,
      canExport: this.markers.length > 0 && !this.pending,
      pending: this.pending,
    };
  }

  /** Last mask PNG the server sent (what export must byte-match). */
  lastMaskPng(): Uint8Array | null {
    return this.maskPng ? new Uint8Array(this.maskPng) : null;
  }

  async open(image: RgbaImage, imagePngB64: string, gtPngB64?: string): Promise<void> {
    if (this.sessionId) {
      void this.api.deleteSession(this.sessionId).catch(() => undefined);
      this.sessionId = null;
    }
    this.image = image;
    this.markers = [];
    this.mask = null;
    this.maskPng = null;
    this.iou = null;
    const payload = await this.api.createSession(imagePngB64, gtPngB64);
    this.sessionId = payload.session_id;
    await this.reconcile(payload);
  }

  async placeClick(x: number, y: number, kind: ClickKind): Promise<ClickOutcome> {
    if (!this.sessionId || !this.image) return "ignored";
    if (this.pending) return "pending";
    if (x < 0 || y < 0 || x >= this.image.width || y >= this.image.height) {
      return "ignored"; // outside the image: no request at all
    }
    this.pending = true;
    this.events.onState(this.view());
    try {
      const payload = await this.api.placeClick(this.sessionId, x, y, kind);
      await this.reconcile(payload);
      return "applied";
    } catch (err) {
      this.events.onToast(describe(err));
      return "failed";
    } finally {
      this.pending = false;
      this.events.onState(this.view());
    }
  }

  async undo(): Promise<ClickOutcome> {
    if (!this.sessionId) return "ignored";
    if (this.pending) return "pending";
    if (this.markers.length === 0) return "ignored"; // nothing to undo: no request
    this.pending = true;
    this.events.onState(this.view());
    try {
      const payload = await this.api.undo(this.sessionId);
      await this.reconcile(payload);
      return "applied";
    } catch (err) {
      this.events.onToast(describe(err));
      return "failed";
    } finally {
      this.pending = false;
      this.events.onState(this.view());
    }
  }

  /** Current mask bytes from the service plus the download filename. */
  async exportMask(): Promise<{ bytes: Uint8Array; filename: string }> {
    if (!this.sessionId || this.markers.length === 0) {
      throw new Error("nothing to export yet");
    }
    const bytes = await this.api.fetchMaskPng(this.sessionId);
    return { bytes, filename: `mask-${this.sessionId}.png` };
  }

  private async reconcile(payload: SessionPayload): Promise<void> {
    this.markers = payload.clicks.map((c) => ({ ...c }));
    this.iou = payload.iou;
    this.maskPng = base64ToBytes(payload.mask_png);
    this.mask = await this.decodeMask(this.maskPng);
    if (this.image) {
      this.events.onRender(composite(this.image, this.mask, this.markers));
    }
    this.events.onState(this.view());
  }
}

function describe(err: unknown): string {
  if (isApiFailure(err)) return `${err.code}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}
