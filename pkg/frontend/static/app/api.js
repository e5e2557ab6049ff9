/** Typed REST client for the annotation session service.
 *
 * The fetch implementation is injected so tests can stand in a fixture
 * service; the browser entry point passes window.fetch.
 */
async function failureFrom(status, res) {
    let code = "unknown";
    let message = `request failed with status ${status}`;
    try {
        const body = (await res.json());
        if (body && typeof body.error === "string")
            code = body.error;
        if (body && typeof body.message === "string")
            message = body.message;
    }
    catch {
        // non-JSON error body: keep the generic message
    }
    return { status, code, message };
}
export class ApiClient {
    constructor(fetchImpl, baseUrl = "") {
        this.fetchImpl = fetchImpl;
        this.baseUrl = baseUrl;
    }
    async requestJson(path, init) {
        const res = await this.fetchImpl(this.baseUrl + path, init);
        if (!res.ok)
            throw await failureFrom(res.status, res);
        return (await res.json());
    }
    createSession(imageB64, gtB64) {
        return this.requestJson("/sessions", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(gtB64 ? { image: imageB64, gt: gtB64 } : { image: imageB64 }),
        });
    }
    placeClick(sessionId, x, y, kind) {
        return this.requestJson(`/sessions/${sessionId}/clicks`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ x, y, kind }),
        });
    }
    undo(sessionId) {
        return this.requestJson(`/sessions/${sessionId}/undo`, { method: "POST" });
    }
    async fetchMaskPng(sessionId) {
        const res = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/mask.png`);
        if (!res.ok)
            throw await failureFrom(res.status, res);
        return new Uint8Array(await res.arrayBuffer());
    }
    async deleteSession(sessionId) {
        const res = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}`, {
            method: "DELETE",
        });
        if (!res.ok && res.status !== 204)
            throw await failureFrom(res.status, res);
    }
}
const B64_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
/** Base64 without atob/Buffer so the same code runs in browser and node. */
export function bytesToBase64(bytes) {
    let out = "";
    for (let i = 0; i < bytes.length; i += 3) {
        const a = bytes[i];
        const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
        const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
        out += B64_ALPHABET[a >> 2];
        out += B64_ALPHABET[((a & 3) << 4) | (b >> 4)];
        out += i + 1 < bytes.length ? B64_ALPHABET[((b & 15) << 2) | (c >> 6)] : "=";
        out += i + 2 < bytes.length ? B64_ALPHABET[c & 63] : "=";
    }
    return out;
}
export function base64ToBytes(text) {
    const clean = text.replace(/=+$/, "");
    const out = new Uint8Array(Math.floor((clean.length * 3) / 4));
    let acc = 0;
    let bits = 0;
    let j = 0;
    for (const ch of clean) {
        const v = B64_ALPHABET.indexOf(ch);
        if (v < 0)
            throw new Error(`invalid base64 character ${JSON.stringify(ch)}`);
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out[j++] = (acc >> bits) & 0xff;
        }
    }
    return out;
}
