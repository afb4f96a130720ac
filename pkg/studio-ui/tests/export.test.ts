import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { EngineClient } from "../src/api.js";
import { exportSelection } from "../src/export.js";

const FIXTURES = join(__dirname, "..", "fixtures");

interface FixtureEntry {
  id: string;
  file: string;
  bytes: number;
}

function loadFixtures(): { entries: FixtureEntry[]; byId: Map<string, Uint8Array> } {
  const manifest: FixtureEntry[] = JSON.parse(
    readFileSync(join(FIXTURES, "manifest.json"), "utf-8"),
  );
  const byId = new Map<string, Uint8Array>();
  for (const entry of manifest) {
    byId.set(entry.id, new Uint8Array(readFileSync(join(FIXTURES, entry.file))));
  }
  return { entries: manifest, byId };
}

/** Serve the recorded engine responses byte-for-byte over a fake fetch. */
function fixtureFetch(byId: Map<string, Uint8Array>): typeof fetch {
  return (async (input: RequestInfo | URL) => {
    const url = String(input);
    const match = url.match(/\/frames\/([^/]+)\/vis\/([^/]+)\/spec$/);
    if (match === null) {
      return new Response(JSON.stringify({ error: "unknown endpoint" }), { status: 404 });
    }
    const bytes = byId.get(decodeURIComponent(match[2]));
    if (bytes === undefined) {
      return new Response(JSON.stringify({ error: "unknown vis id" }), { status: 404 });
    }
    const copy = bytes.slice();
    return new Response(copy.buffer as ArrayBuffer, {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
}

describe("export fidelity", () => {
  const { entries, byId } = loadFixtures();

  it("ships 20 recorded engine responses", () => {
    expect(entries.length).toBe(20);
  });

  it("exported files are byte-identical to the spec endpoint responses", async () => {
    const client = new EngineClient("", fixtureFetch(byId));
    const ids = entries.map((e) => e.id);
    const result = await exportSelection(client, "f1", ids);
    expect(result.errors).toEqual([]);
    expect(result.files).toHaveLength(20);
    for (const file of result.files) {
      const id = file.name.replace(/\.json$/, "");
      const expected = byId.get(id)!;
      expect(file.bytes.length).toBe(expected.length);
      expect(Buffer.from(file.bytes).equals(Buffer.from(expected))).toBe(true);
    }
  });

  it("every exported document parses as a spec doc", async () => {
    const client = new EngineClient("", fixtureFetch(byId));
    const result = await exportSelection(client, "f1", entries.map((e) => e.id));
    for (const file of result.files) {
      const doc = JSON.parse(new TextDecoder().decode(file.bytes));
      expect(["bar", "point", "line", "rect"]).toContain(doc.mark);
      expect(doc.data.values).toBeInstanceOf(Array);
      expect(typeof doc.title).toBe("string");
    }
  });

  it("stale ids fail per-item while the rest export", async () => {
    const client = new EngineClient("", fixtureFetch(byId));
    const good = entries[0].id;
    const result = await exportSelection(client, "f1", [good, "Stale-99"]);
    expect(result.files.map((f) => f.name)).toEqual([`${good}.json`]);
    expect(result.errors).toHaveLength(1);
    expect(result.errors[0].id).toBe("Stale-99");
    expect(result.errors[0].status).toBe(404);
  });

  it("manifest records names and sizes", async () => {
    const client = new EngineClient("", fixtureFetch(byId));
    const ids = entries.slice(0, 3).map((e) => e.id);
    const result = await exportSelection(client, "f1", ids);
    expect(result.manifest).toEqual(
      ids.map((id) => ({
        id,
        file: `${id}.json`,
        bytes: byId.get(id)!.length,
      })),
    );
  });
});
