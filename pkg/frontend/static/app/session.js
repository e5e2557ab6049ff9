/** Client-side session state machine.
 *
 * Guarantees, independent of the DOM layer:
 *   - single-flight: at most one mutating request in the air per session;
 *   - reconciliation: markers always mirror the server's click list after
 *     every settled response (never the optimistic local guess);
 *   - failed clicks commit nothing and surface a toast;
 *   - out-of-bounds clicks and undo-with-no-history issue no request.
 */
import { base64ToBytes } from "./api.js";
import { composite } from "./overlay.js";
import { isApiFailure } from "./types.js";
export class SessionController {
    constructor(api, decodeMask, events) {
        this.api = api;
        this.decodeMask = decodeMask;
        this.events = events;
        this.sessionId = null;
        this.image = null;
        this.markers = [];
        this.mask = null;
        this.maskPng = null;
        this.iou = null;
        this.pending = false;
    }
    view() {
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
    lastMaskPng() {
        return this.maskPng ? new Uint8Array(this.maskPng) : null;
    }
    async open(image, imagePngB64, gtPngB64) {
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
    async placeClick(x, y, kind) {
        if (!this.sessionId || !this.image)
            return "ignored";
        if (this.pending)
            return "pending";
        if (x < 0 || y < 0 || x >= this.image.width || y >= this.image.height) {
            return "ignored"; // outside the image: no request at all
        }
        this.pending = true;
        this.events.onState(this.view());
        try {
            const payload = await this.api.placeClick(this.sessionId, x, y, kind);
            await this.reconcile(payload);
            return "applied";
        }
        catch (err) {
            this.events.onToast(describe(err));
            return "failed";
        }
        finally {
            this.pending = false;
            this.events.onState(this.view());
        }
    }
    async undo() {
        if (!this.sessionId)
            return "ignored";
        if (this.pending)
            return "pending";
        if (this.markers.length === 0)
            return "ignored"; // nothing to undo: no request
        this.pending = true;
        this.events.onState(this.view());
        try {
            const payload = await this.api.undo(this.sessionId);
            await this.reconcile(payload);
            return "applied";
        }
        catch (err) {
            this.events.onToast(describe(err));
            return "failed";
        }
        finally {
            this.pending = false;
            this.events.onState(this.view());
        }
    }
    /** Current mask bytes from the service plus the download filename. */
    async exportMask() {
        if (!this.sessionId || this.markers.length === 0) {
            throw new Error("nothing to export yet");
        }
        const bytes = await this.api.fetchMaskPng(this.sessionId);
        return { bytes, filename: `mask-${this.sessionId}.png` };
    }
    async reconcile(payload) {
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
function describe(err) {
    if (isApiFailure(err))
        return `${err.code}: ${err.message}`;
    if (err instanceof Error)
        return err.message;
    return String(err);
}
