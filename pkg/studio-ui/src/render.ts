/** DOM rendering: table/recommendation toggle, tabs, vis cards, banners. */

import { renderChart } from "./charts.js";
import { orderedTabs, type TabState, type ViewState } from "./state.js";
import type { TablePage } from "./types.js";

export interface RenderCallbacks {
  onSelectTab: (action: string) => void;
  onToggleVis: (visId: string) => void;
}

const NOOP: RenderCallbacks = { onSelectTab: () => {}, onToggleVis: () => {} };

export function renderDashboard(
  doc: Document,
  container: HTMLElement,
  state: ViewState,
  callbacks: RenderCallbacks = NOOP,
): void {
  container.textContent = "";
  if (state.error !== null) {
    const banner = doc.createElement("div");
    banner.className = "banner error";
    banner.textContent = `stream error: ${state.error}`;
    container.appendChild(banner);
  }
  const tabs = orderedTabs(state);
  const bar = doc.createElement("div");
  bar.className = "tab-bar";
  for (const tab of tabs) {
    const button = doc.createElement("button");
    button.className = "tab" + (tab.action === state.activeTab ? " active" : "");
    button.dataset.action = tab.action;
    const badge = tab.vises.length > 0 ? ` (${tab.vises.length})` : " (0)";
    button.textContent = tab.action + badge;
    button.addEventListener("click", () => callbacks.onSelectTab(tab.action));
    bar.appendChild(button);
  }
  if (state.streamOpen) {
    const spinner = doc.createElement("span");
    spinner.className = "spinner";
    spinner.textContent = "computing...";
    bar.appendChild(spinner);
  }
  container.appendChild(bar);

  const active = tabs.find((t) => t.action === state.activeTab) ?? tabs[0];
  if (active !== undefined) {
    container.appendChild(renderTabPanel(doc, active, state, callbacks));
  }
}

function renderTabPanel(
  doc: Document,
  tab: TabState,
  state: ViewState,
  callbacks: RenderCallbacks,
): HTMLElement {
  const panel = doc.createElement("div");
  panel.className = "tab-panel";
  panel.dataset.action = tab.action;
  if (tab.note !== null) {
    const note = doc.createElement("p");
    note.className = "note";
    note.textContent = tab.note;
    panel.appendChild(note);
  }
  if (tab.vises.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent = "no qualifying columns";
    panel.appendChild(empty);
    return panel;
  }
  const grid = doc.createElement("div");
  grid.className = "vis-grid";
  for (const vis of tab.vises) {
    const card = doc.createElement("figure");
    card.className = "vis-card" + (state.selection.has(vis.id) ? " selected" : "");
    card.dataset.visId = vis.id;
    card.addEventListener("click", () => callbacks.onToggleVis(vis.id));
    card.appendChild(renderChart(doc, vis.spec));
    const caption = doc.createElement("figcaption");
    const score =
      vis.score === null ? "" : ` [${vis.score.toFixed(3)}]`;
    caption.textContent = vis.spec.title + score;
    card.appendChild(caption);
    grid.appendChild(card);
  }
  panel.appendChild(grid);
  return panel;
}

export function renderTable(doc: Document, container: HTMLElement, page: TablePage): void {
  container.textContent = "";
  const table = doc.createElement("table");
  table.className = "data-table";
  const head = doc.createElement("tr");
  head.appendChild(doc.createElement("th"));
  for (const col of page.columns) {
    const th = doc.createElement("th");
    th.textContent = col.name;
    th.title = col.storage_type;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (let i = 0; i < page.rows.length; i++) {
    const tr = doc.createElement("tr");
    const label = doc.createElement("th");
    label.textContent = page.row_labels[i];
    tr.appendChild(label);
    for (const cell of page.rows[i]) {
      const td = doc.createElement("td");
      td.textContent = cell === null ? "" : String(cell);
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  const meta = doc.createElement("p");
  meta.className = "table-meta";
  meta.textContent = `rows ${page.offset + 1}-${page.offset + page.rows.length} of ${page.total_rows} (v${page.version})`;
  container.appendChild(table);
  container.appendChild(meta);
}

export function renderIntentWarnings(
  doc: Document,
  container: HTMLElement,
  warnings: string[],
): void {
  container.textContent = "";
  for (const w of warnings) {
    const item = doc.createElement("div");
    item.className = "intent-warning";
    item.textContent = w;
    container.appendChild(item);
  }
}
