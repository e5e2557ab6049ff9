/** Shared test scaffolding: a fixture-backed fake service and tiny buffers. */

import { readFileSync } from "node:fs";

import type { FetchLike } from "../src/api.js";
import type {
  MaskBitmap,
  RgbaImage,
  SessionPayload,
} from "../src/types.js";

export function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(readFileSync(new URL(`./fixtures/${name}`, import.meta.url)));
}

export function bytesEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) if (a[i] !== b[i]) return false;
  return true;
}

export function fixturePayload(name: string): SessionPayload {
  return JSON.parse(
    readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8"),
  ) as SessionPayload;
}

export function fixtureImage(): RgbaImage {
  const data = fixtureBytes("image.rgba");
  return { width: 512, height: 512, data: new Uint8ClampedArray(data.buffer) };
}

/** Tiny solid-color image for logic tests. */
export function flatImage(width: number, height: number, gray = 128): RgbaImage {
  const data = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < data.length; i += 4) {
    data[i] = data[i + 1] = data[i + 2] = gray;
    data[i + 3] = 255;
  }
  return { width, height, data };
}

/** Decoder stub for tests that never look at pixels: reads the true
 * dimensions straight from the PNG header and returns an all-zero mask,
 * skipping the inflate step entirely. */
export async function stubDecoder(png: Uint8Array): Promise<MaskBitmap> {
  const u32 = (at: number) =>
    ((png[at] << 24) | (png[at + 1] << 16) | (png[at + 2] << 8) | png[at + 3]) >>> 0;
  const width = u32(16);
  const height = u32(20);
  return { width, height, data: new Uint8Array(width * height) };
}

function jsonResponse(status: number, body: unknown) {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
    arrayBuffer: async () => new ArrayBuffer(0),
  };
}

function bytesResponse(bytes: Uint8Array) {
  // copy so callers can't mutate the fixture
  const buf = bytes.slice().buffer as ArrayBuffer;
  return {
    ok: true,
    status: 200,
    json: async () => {
      throw new Error("binary response");
    },
    arrayBuffer: async () => buf,
  };
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

/** Replays captured service traffic with real session-service semantics:
 * a state stack (clicks push, undo pops), per-state mask bytes, and
 * concurrency accounting so tests can prove single-flight behavior.
 */
export class FixtureService {
  requests: string[] = [];
  inFlight = 0;
  maxInFlight = 0;
  delayMs = 0;

  private stack: SessionPayload[];

  constructor(
    private readonly create: SessionPayload,
    private readonly clickResponses: SessionPayload[],
    private readonly masks: Record<number, Uint8Array>,
  ) {
    this.stack = [create];
  }

  get current(): SessionPayload {
    return this.stack[this.stack.length - 1];
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    this.requests.push(`${method} ${url}`);
    this.inFlight += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlight);
    try {
      if (this.delayMs > 0) await sleep(this.delayMs);
      if (method === "POST" && url === "/sessions") {
        this.stack = [this.create];
        return jsonResponse(201, this.create);
      }
      if (method === "POST" && url.endsWith("/clicks")) {
        const depth = this.current.clicks.length;
        const next = this.clickResponses[depth];
        if (!next) {
          return jsonResponse(409, {
            error: "click_budget_exhausted",
            message: "no more captured responses",
          });
        }
        this.stack.push(next);
        return jsonResponse(200, next);
      }
      if (method === "POST" && url.endsWith("/undo")) {
        if (this.stack.length <= 1) {
          return jsonResponse(409, {
            error: "nothing_to_undo",
            message: "nothing to undo",
          });
        }
        this.stack.pop();
        return jsonResponse(200, this.current);
      }
      if (method === "GET" && url.endsWith("/mask.png")) {
        const bytes = this.masks[this.current.clicks.length];
        if (!bytes) return jsonResponse(404, { error: "missing", message: "?" });
        return bytesResponse(bytes);
      }
      if (method === "DELETE") {
        return jsonResponse(204, null);
      }
      return jsonResponse(404, { error: "unknown_route", message: url });
    } finally {
      this.inFlight -= 1;
    }
  };
}

export function fullFixtureService(): FixtureService {
  return new FixtureService(
    fixturePayload("create.json"),
    [fixturePayload("click1.json"), fixturePayload("click2.json")],
    {
      1: fixtureBytes("mask_after_click1.png"),
      2: fixtureBytes("mask_after_click2.png"),
    },
  );
}
