/** Export selected visualizations as spec-document files.
 *
 * Bytes come straight from the engine's export endpoint and are bundled
 * untouched, so downloaded files are byte-identical to the HTTP responses.
 */

import { ApiError, EngineClient } from "./api.js";

export interface ExportedFile {
  name: string;
  bytes: Uint8Array;
}

export interface ExportResult {
  files: ExportedFile[];
  manifest: { id: string; file: string; bytes: number }[];
  errors: { id: string; message: string; status: number | null }[];
}

export async function exportSelection(
  client: EngineClient,
  frameId: string,
  visIds: string[],
): Promise<ExportResult> {
  const files: ExportedFile[] = [];
  const manifest: ExportResult["manifest"] = [];
  const errors: ExportResult["errors"] = [];
  for (const id of visIds) {
    try {
      const bytes = await client.visSpecBytes(frameId, id);
      const name = `${id}.json`;
      files.push({ name, bytes });
      manifest.push({ id, file: name, bytes: bytes.length });
    } catch (err) {
      // stale or missing ids fail individually; the rest still export
      if (err instanceof ApiError) {
        errors.push({ id, message: err.message, status: err.status });
      } else {
        errors.push({ id, message: String(err), status: null });
      }
    }
  }
  return { files, manifest, errors };
}

/** Trigger browser downloads for an export result (one file per vis). */
export function downloadFiles(doc: Document, result: ExportResult): void {
  const bundle = [
    ...result.files,
    {
      name: "manifest.json",
      bytes: new TextEncoder().encode(JSON.stringify(result.manifest, null, 2)),
    },
  ];
  for (const file of bundle) {
    const buffer = file.bytes.buffer.slice(
      file.bytes.byteOffset,
      file.bytes.byteOffset + file.bytes.byteLength,
    ) as ArrayBuffer;
    const blob = new Blob([buffer], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const a = doc.createElement("a");
    a.href = url;
    a.download = file.name;
    a.click();
    URL.revokeObjectURL(url);
  }
}
