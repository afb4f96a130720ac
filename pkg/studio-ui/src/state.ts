/** View state and the stream-event reducer.
 *
 * Tabs appear the moment their recommendation event arrives, but the tab
 * bar always renders in the canonical display order regardless of arrival
 * order. Stream errors surface as a banner and never discard tabs that are
 * already on screen.
 */

import type { RecommendationEvent, StreamEvent, VisEntry } from "./types.js";

export const CANONICAL_ORDER = [
  "Current",
  "Enhance",
  "Filter",
  "Correlation",
  "Distribution",
  "Occurrence",
  "Temporal",
  "Geographic",
  "Series",
  "Structure",
  "History",
];

export interface TabState {
  action: string;
  vises: VisEntry[];
  note: string | null;
  truncated: boolean;
}

export interface ViewState {
  frameId: string | null;
  mode: "table" | "recommendations";
  activeTab: string | null;
  intentDraft: string;
  intentWarnings: string[];
  selection: Set<string>;
  streamOpen: boolean;
  done: boolean;
  error: string | null;
  tabs: Map<string, TabState>;
  arrival: string[];
}

export function initialState(): ViewState {
  return {
    frameId: null,
    mode: "table",
    activeTab: null,
    intentDraft: "",
    intentWarnings: [],
    selection: new Set(),
    streamOpen: false,
    done: false,
    error: null,
    tabs: new Map(),
    arrival: [],
  };
}

export function beginStream(state: ViewState): ViewState {
  return {
    ...state,
    tabs: new Map(),
    arrival: [],
    selection: new Set(),
    streamOpen: true,
    done: false,
    error: null,
    activeTab: null,
  };
}

export function applyStreamEvent(state: ViewState, event: StreamEvent): ViewState {
  if (event.event === "recommendation") {
    const rec = event.data as RecommendationEvent;
    const tabs = new Map(state.tabs);
    tabs.set(rec.action, {
      action: rec.action,
      vises: rec.vises,
      note: rec.note,
      truncated: rec.truncated,
    });
    const arrival = state.arrival.includes(rec.action)
      ? state.arrival
      : [...state.arrival, rec.action];
    const activeTab = state.activeTab ?? rec.action;
    return { ...state, tabs, arrival, activeTab };
  }
  if (event.event === "done") {
    return { ...state, streamOpen: false, done: true };
  }
  // error: keep everything already rendered, surface the message
  return { ...state, streamOpen: false, error: event.data.message };
}

/** Tabs in canonical display order; unknown actions follow in arrival order. */
export function orderedTabs(state: ViewState): TabState[] {
  const names = [...state.tabs.keys()];
  const known = CANONICAL_ORDER.filter((n) => state.tabs.has(n));
  const custom = state.arrival.filter((n) => !CANONICAL_ORDER.includes(n) && names.includes(n));
  return [...known, ...custom].map((n) => state.tabs.get(n)!);
}

export function selectTab(state: ViewState, action: string): ViewState {
  if (!state.tabs.has(action)) return state;
  return { ...state, activeTab: action };
}

export function toggleSelection(state: ViewState, visId: string): ViewState {
  const rendered = new Set(
    [...state.tabs.values()].flatMap((t) => t.vises.map((v) => v.id)),
  );
  if (!rendered.has(visId)) return state;
  const selection = new Set(state.selection);
  if (selection.has(visId)) selection.delete(visId);
  else selection.add(visId);
  return { ...state, selection };
}

export function setMode(state: ViewState, mode: "table" | "recommendations"): ViewState {
  return { ...state, mode };
}
