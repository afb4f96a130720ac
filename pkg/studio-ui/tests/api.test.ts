import { describe, expect, it } from "vitest";

import { drainSseBuffer } from "../src/api.js";
import type { StreamEvent } from "../src/types.js";

describe("SSE frame parsing", () => {
  it("parses complete frames and keeps the remainder", () => {
    const events: StreamEvent[] = [];
    const rest = drainSseBuffer(
      'event: recommendation\ndata: {"action":"Correlation","note":null,"truncated":false,"vises":[]}\n\n' +
        "event: done\nda",
      (e) => events.push(e),
    );
    expect(events).toHaveLength(1);
    expect(events[0].event).toBe("recommendation");
    expect(rest).toBe("event: done\nda");
  });

  it("parses multiple frames in one chunk", () => {
    const events: StreamEvent[] = [];
    drainSseBuffer(
      'event: recommendation\ndata: {"action":"A","note":null,"truncated":false,"vises":[]}\n\n' +
        'event: done\ndata: {"actions":1}\n\n',
      (e) => events.push(e),
    );
    expect(events.map((e) => e.event)).toEqual(["recommendation", "done"]);
  });

  it("skips malformed frames without dying", () => {
    const events: StreamEvent[] = [];
    drainSseBuffer(
      "event: recommendation\ndata: {broken json\n\n" +
        'event: done\ndata: {"actions":0}\n\n',
      (e) => events.push(e),
    );
    expect(events.map((e) => e.event)).toEqual(["done"]);
  });
});
