/** Wire types mirroring the engine's HTTP/SSE schema. */

export interface ChannelEncoding {
  field: string;
  type?: string;
  aggregate?: string;
  bin?: string;
}

export interface VisSpecDoc {
  mark: "bar" | "point" | "line" | "rect";
  encoding: Partial<Record<"x" | "x2" | "y" | "y2" | "color", ChannelEncoding>>;
  data: { values: Record<string, unknown>[] };
  title: string;
  usermeta?: { kind?: string };
}

export interface VisEntry {
  id: string;
  score: number | null;
  approximate: boolean;
  spec: VisSpecDoc;
}

export interface RecommendationEvent {
  action: string;
  note: string | null;
  truncated: boolean;
  vises: VisEntry[];
}

export type StreamEvent =
  | { event: "recommendation"; data: RecommendationEvent }
  | { event: "done"; data: { actions: number; diagnostics?: string[] } }
  | { event: "error"; data: { message: string } };

export interface TablePage {
  frame_id: string;
  version: number;
  total_rows: number;
  offset: number;
  columns: { name: string; storage_type: string }[];
  row_labels: string[];
  rows: unknown[][];
}

export interface IntentResponse {
  cleared: boolean;
  warnings: { message: string; clause_index: number; suggestion: string | null }[];
  intent_version: number;
}
