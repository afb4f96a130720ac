/** Typed client for the engine's HTTP/SSE surface. */

import type { IntentResponse, StreamEvent, TablePage } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

async function jsonOrThrow(response: Response): Promise<any> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(body.error ?? response.statusText, response.status);
  }
  return body;
}

export class EngineClient {
  constructor(
    private baseUrl: string = "",
    private fetcher: typeof fetch = fetch,
  ) {}

  async createSession(): Promise<string> {
    const r = await this.fetcher(`${this.baseUrl}/sessions`, { method: "POST" });
    return (await jsonOrThrow(r)).session_id;
  }

  async uploadCsv(sessionId: string, csv: string, name = "frame"): Promise<string> {
    const r = await this.fetcher(
      `${this.baseUrl}/sessions/${sessionId}/frames?name=${encodeURIComponent(name)}`,
      { method: "POST", body: csv, headers: { "content-type": "text/csv" } },
    );
    return (await jsonOrThrow(r)).frame_id;
  }

  async tablePage(frameId: string, offset = 0, limit = 50): Promise<TablePage> {
    const r = await this.fetcher(
      `${this.baseUrl}/frames/${frameId}/table?offset=${offset}&limit=${limit}`,
    );
    return jsonOrThrow(r);
  }

  async setIntent(frameId: string, clauses: string[]): Promise<IntentResponse> {
    const r = await this.fetcher(`${this.baseUrl}/frames/${frameId}/intent`, {
      method: "PUT",
      body: JSON.stringify({ clauses }),
      headers: { "content-type": "application/json" },
    });
    return jsonOrThrow(r);
  }

  async transform(frameId: string, descriptor: Record<string, unknown>): Promise<string> {
    const r = await this.fetcher(`${this.baseUrl}/frames/${frameId}/transform`, {
      method: "POST",
      body: JSON.stringify(descriptor),
      headers: { "content-type": "application/json" },
    });
    return (await jsonOrThrow(r)).frame_id;
  }

  /** Raw spec-document bytes for one vis; byte-preserving for export. */
  async visSpecBytes(frameId: string, visId: string): Promise<Uint8Array> {
    const r = await this.fetcher(`${this.baseUrl}/frames/${frameId}/vis/${visId}/spec`);
    if (!r.ok) {
      const body = await r.json().catch(() => ({}));
      throw new ApiError(body.error ?? r.statusText, r.status);
    }
    return new Uint8Array(await r.arrayBuffer());
  }

  /**
   * Open the recommendation stream; events are dispatched in arrival order.
   * Returns a cancel function that aborts the underlying request.
   */
  streamRecommendations(
    frameId: string,
    k: number | null,
    onEvent: (e: StreamEvent) => void,
    onClose: () => void = () => {},
  ): () => void {
    const controller = new AbortController();
    const url =
      `${this.baseUrl}/frames/${frameId}/recommendations` + (k ? `?k=${k}` : "");
    (async () => {
      try {
        const response = await this.fetcher(url, { signal: controller.signal });
        if (!response.ok || response.body === null) {
          const body = await response.json().catch(() => ({}));
          onEvent({
            event: "error",
            data: { message: body.error ?? `stream failed (${response.status})` },
          });
          return;
        }
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { value, done } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          buffer = drainSseBuffer(buffer, onEvent);
        }
        drainSseBuffer(buffer + "\n\n", onEvent);
      } catch (err) {
        if (!controller.signal.aborted) {
          onEvent({ event: "error", data: { message: String(err) } });
        }
      } finally {
        onClose();
      }
    })();
    return () => controller.abort();
  }
}

/** Parse complete SSE frames out of the buffer, returning the remainder. */
export function drainSseBuffer(
  buffer: string,
  onEvent: (e: StreamEvent) => void,
): string {
  let rest = buffer;
  for (;;) {
    const split = rest.indexOf("\n\n");
    if (split === -1) return rest;
    const frame = rest.slice(0, split);
    rest = rest.slice(split + 2);
    let name = "message";
    const dataLines: string[] = [];
    for (const line of frame.split("\n")) {
      if (line.startsWith("event: ")) name = line.slice(7).trim();
      else if (line.startsWith("data: ")) dataLines.push(line.slice(6));
    }
    if (dataLines.length === 0) continue;
    try {
      const data = JSON.parse(dataLines.join("\n"));
      onEvent({ event: name, data } as StreamEvent);
    } catch {
      // malformed frame: skip rather than poisoning the stream
    }
  }
}
