/** Application wiring: upload, table/recommendations toggle, intent editor,
 * streamed tabs, selection and export. */

import { EngineClient } from "./api.js";
import { downloadFiles, exportSelection } from "./export.js";
import { renderDashboard, renderIntentWarnings, renderTable } from "./render.js";
import {
  applyStreamEvent,
  beginStream,
  initialState,
  selectTab,
  setMode,
  toggleSelection,
  type ViewState,
} from "./state.js";

const client = new EngineClient("");
let state: ViewState = initialState();
let sessionId: string | null = null;
let cancelStream: (() => void) | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function redraw(): void {
  el("mode-table").classList.toggle("active", state.mode === "table");
  el("mode-recs").classList.toggle("active", state.mode === "recommendations");
  el("table-view").hidden = state.mode !== "table";
  el("recs-view").hidden = state.mode !== "recommendations";
  renderDashboard(document, el("recs-view"), state, {
    onSelectTab: (action) => {
      state = selectTab(state, action);
      redraw();
    },
    onToggleVis: (visId) => {
      state = toggleSelection(state, visId);
      el<HTMLButtonElement>("export-btn").disabled = state.selection.size === 0;
      redraw();
    },
  });
  el<HTMLButtonElement>("export-btn").disabled = state.selection.size === 0;
}

async function refreshTable(): Promise<void> {
  if (state.frameId === null) return;
  const page = await client.tablePage(state.frameId, 0, 50);
  renderTable(document, el("table-view"), page);
}

function openStream(): void {
  const frameId = state.frameId;
  if (frameId === null) return;
  if (cancelStream !== null) cancelStream();
  state = beginStream(state);
  redraw();
  cancelStream = client.streamRecommendations(frameId, null, (event) => {
    state = applyStreamEvent(state, event);
    redraw();
  });
}

async function boot(): Promise<void> {
  el("upload-btn").addEventListener("click", async () => {
    const picker = el<HTMLInputElement>("csv-file");
    const file = picker.files?.[0];
    if (file === undefined) return;
    sessionId = sessionId ?? (await client.createSession());
    const frameId = await client.uploadCsv(sessionId, await file.text(), file.name);
    state = { ...initialState(), frameId, mode: "table" };
    await refreshTable();
    openStream();
    redraw();
  });

  el("mode-table").addEventListener("click", () => {
    state = setMode(state, "table");
    redraw();
  });
  el("mode-recs").addEventListener("click", () => {
    state = setMode(state, "recommendations");
    redraw();
  });

  el("intent-apply").addEventListener("click", async () => {
    if (state.frameId === null) return;
    const raw = el<HTMLInputElement>("intent-input").value;
    const clauses = raw
      .split(",")
      .map((c) => c.trim())
      .filter((c) => c.length > 0);
    try {
      const result = await client.setIntent(state.frameId, clauses);
      renderIntentWarnings(
        document,
        el("intent-warnings"),
        result.warnings.map((w) => w.message),
      );
      openStream();
    } catch (err) {
      renderIntentWarnings(document, el("intent-warnings"), [String(err)]);
    }
  });

  el("export-btn").addEventListener("click", async () => {
    if (state.frameId === null || state.selection.size === 0) return;
    const result = await exportSelection(client, state.frameId, [...state.selection]);
    if (result.errors.length > 0) {
      renderIntentWarnings(
        document,
        el("intent-warnings"),
        result.errors.map((e) => `export ${e.id}: ${e.message}`),
      );
    }
    downloadFiles(document, result);
  });
}

if (typeof document !== "undefined" && document.getElementById("upload-btn") !== null) {
  void boot();
}
