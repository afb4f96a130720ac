/** Minimal deterministic SVG renderer for the engine's spec-doc subset.
 *
 * Data arrives pre-aggregated and pre-binned; this renderer only maps
 * values to pixels and never re-bins or re-aggregates. Marks: bar (plain,
 * grouped-by-color, binned histogram, map fallback), point, line, rect.
 */

import type { VisSpecDoc } from "./types.js";

export const CHART_WIDTH = 280;
export const CHART_HEIGHT = 170;
const PAD = { left: 44, right: 8, top: 8, bottom: 30 };

export const PALETTE = [
  "#4c78a8",
  "#f58518",
  "#54a24b",
  "#e45756",
  "#72b7b2",
  "#b279a2",
  "#eeca3b",
  "#9d755d",
];

type Row = Record<string, unknown>;

function num(v: unknown): number {
  return typeof v === "number" ? v : Number(v);
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number) {
  const span = hi - lo || 1;
  return (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

function svgEl(doc: Document, tag: string, attrs: Record<string, string>): SVGElement {
  const el = doc.createElementNS("http://www.w3.org/2000/svg", tag) as SVGElement;
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

function fmt(v: number): string {
  if (Number.isInteger(v)) return String(v);
  return Math.abs(v) >= 100 ? v.toFixed(0) : v.toPrecision(3);
}

function colorScale(values: unknown[]): (v: unknown) => string {
  const seen: string[] = [];
  for (const v of values) {
    const key = String(v);
    if (!seen.includes(key)) seen.push(key);
  }
  return (v) => PALETTE[seen.indexOf(String(v)) % PALETTE.length];
}

export function renderChart(doc: Document, spec: VisSpecDoc): SVGElement {
  const svg = svgEl(doc, "svg", {
    width: String(CHART_WIDTH),
    height: String(CHART_HEIGHT),
    viewBox: `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`,
    class: `chart mark-${spec.mark}${spec.usermeta?.kind === "map" ? " kind-map" : ""}`,
  });
  const rows = spec.data.values;
  if (rows.length === 0) {
    const note = svgEl(doc, "text", { x: "8", y: "20", class: "empty-note" });
    note.textContent = "no data";
    svg.appendChild(note);
    return svg;
  }
  if (spec.mark === "bar" && spec.encoding.x?.bin === "binned") {
    renderHistogram(doc, svg, spec, rows);
  } else if (spec.mark === "bar") {
    renderBars(doc, svg, spec, rows);
  } else if (spec.mark === "point") {
    renderPoints(doc, svg, spec, rows);
  } else if (spec.mark === "line") {
    renderLine(doc, svg, spec, rows);
  } else {
    renderRects(doc, svg, spec, rows);
  }
  return svg;
}

function innerBox() {
  return {
    x0: PAD.left,
    x1: CHART_WIDTH - PAD.right,
    y0: CHART_HEIGHT - PAD.bottom,
    y1: PAD.top,
  };
}

function axisLabels(doc: Document, svg: SVGElement, xLabel: string, yLabel: string) {
  const x = svgEl(doc, "text", {
    x: String(CHART_WIDTH / 2),
    y: String(CHART_HEIGHT - 6),
    "text-anchor": "middle",
    class: "axis-label x",
  });
  x.textContent = xLabel;
  const y = svgEl(doc, "text", {
    x: "10",
    y: String(CHART_HEIGHT / 2),
    transform: `rotate(-90 10 ${CHART_HEIGHT / 2})`,
    "text-anchor": "middle",
    class: "axis-label y",
  });
  y.textContent = yLabel;
  svg.appendChild(x);
  svg.appendChild(y);
}

function renderBars(doc: Document, svg: SVGElement, spec: VisSpecDoc, rows: Row[]) {
  const { x0, x1, y0, y1 } = innerBox();
  const xf = spec.encoding.x!.field;
  const yf = spec.encoding.y!.field;
  const colorField = spec.encoding.color?.field;
  const groups = colorField && colorField !== yf ? colorScale(rows.map((r) => r[colorField])) : null;
  const cats: string[] = [];
  for (const r of rows) {
    const c = String(r[xf]);
    if (!cats.includes(c)) cats.push(c);
  }
  const values = rows.map((r) => num(r[yf]));
  const [, hi] = extent([0, ...values]);
  const yScale = linearScale(0, hi, y0, y1);
  const band = (x1 - x0) / Math.max(cats.length, 1);

  for (const [i, r] of rows.entries()) {
    const cat = String(r[xf]);
    const slot = cats.indexOf(cat);
    const v = num(r[yf]);
    const barWidth = Math.max(band * 0.8, 1);
    const rect = svgEl(doc, "rect", {
      x: fmt(x0 + slot * band + band * 0.1),
      y: fmt(yScale(Math.max(v, 0))),
      width: fmt(barWidth),
      height: fmt(Math.abs(yScale(0) - yScale(v))),
      fill: groups && colorField ? groups(r[colorField]) : PALETTE[0],
      "data-category": cat,
      "data-value": fmt(v),
      "data-index": String(i),
    });
    svg.appendChild(rect);
  }
  axisLabels(doc, svg, xf, yf);
}

function renderHistogram(doc: Document, svg: SVGElement, spec: VisSpecDoc, rows: Row[]) {
  const { x0, x1, y0, y1 } = innerBox();
  const startField = spec.encoding.x!.field;
  const endField = spec.encoding.x2?.field ?? startField;
  const yf = spec.encoding.y!.field;
  const starts = rows.map((r) => num(r[startField]));
  const ends = rows.map((r) => num(r[endField]));
  const counts = rows.map((r) => num(r[yf]));
  const [lo, hi] = extent([...starts, ...ends]);
  const xScale = linearScale(lo, hi, x0, x1);
  const yScale = linearScale(0, Math.max(...counts, 1), y0, y1);
  for (let i = 0; i < rows.length; i++) {
    const rect = svgEl(doc, "rect", {
      x: fmt(xScale(starts[i])),
      y: fmt(yScale(counts[i])),
      width: fmt(Math.max(xScale(ends[i]) - xScale(starts[i]) - 1, 0.5)),
      height: fmt(y0 - yScale(counts[i])),
      fill: PALETTE[0],
      "data-bin-start": fmt(starts[i]),
      "data-count": fmt(counts[i]),
    });
    svg.appendChild(rect);
  }
  axisLabels(doc, svg, startField.replace(/_start$/, ""), yf);
}

function renderPoints(doc: Document, svg: SVGElement, spec: VisSpecDoc, rows: Row[]) {
  const { x0, x1, y0, y1 } = innerBox();
  const xf = spec.encoding.x!.field;
  const yf = spec.encoding.y!.field;
  const colorField = spec.encoding.color?.field;
  const xs = rows.map((r) => num(r[xf]));
  const ys = rows.map((r) => num(r[yf]));
  const [xlo, xhi] = extent(xs);
  const [ylo, yhi] = extent(ys);
  const xScale = linearScale(xlo, xhi, x0, x1);
  const yScale = linearScale(ylo, yhi, y0, y1);
  const groups = colorField ? colorScale(rows.map((r) => r[colorField])) : null;
  for (const [i, r] of rows.entries()) {
    svg.appendChild(
      svgEl(doc, "circle", {
        cx: fmt(xScale(xs[i])),
        cy: fmt(yScale(ys[i])),
        r: "2.2",
        fill: groups && colorField ? groups(r[colorField]) : PALETTE[0],
        "fill-opacity": "0.7",
      }),
    );
  }
  axisLabels(doc, svg, xf, yf);
}

function renderLine(doc: Document, svg: SVGElement, spec: VisSpecDoc, rows: Row[]) {
  const { x0, x1, y0, y1 } = innerBox();
  const xf = spec.encoding.x!.field;
  const yf = spec.encoding.y!.field;
  const xIsTime = spec.encoding.x?.type === "temporal";
  const xs = rows.map((r, i) => (xIsTime ? Date.parse(String(r[xf])) : i));
  const ys = rows.map((r) => num(r[yf]));
  const [xlo, xhi] = extent(xs);
  const [ylo, yhi] = extent([0, ...ys]);
  const xScale = linearScale(xlo, xhi, x0, x1);
  const yScale = linearScale(ylo, yhi, y0, y1);
  const points = xs.map((x, i) => `${fmt(xScale(x))},${fmt(yScale(ys[i]))}`).join(" ");
  svg.appendChild(
    svgEl(doc, "polyline", {
      points,
      fill: "none",
      stroke: PALETTE[0],
      "stroke-width": "1.6",
    }),
  );
  axisLabels(doc, svg, xf, yf);
}

function renderRects(doc: Document, svg: SVGElement, spec: VisSpecDoc, rows: Row[]) {
  const { x0, x1, y0, y1 } = innerBox();
  const xsf = spec.encoding.x!.field;
  const xef = spec.encoding.x2?.field ?? xsf;
  const ysf = spec.encoding.y!.field;
  const yef = spec.encoding.y2?.field ?? ysf;
  const cf = spec.encoding.color?.field;
  const xStarts = rows.map((r) => num(r[xsf]));
  const xEnds = rows.map((r) => num(r[xef]));
  const yStarts = rows.map((r) => num(r[ysf]));
  const yEnds = rows.map((r) => num(r[yef]));
  const colors = cf ? rows.map((r) => num(r[cf])) : rows.map(() => 1);
  const [xlo, xhi] = extent([...xStarts, ...xEnds]);
  const [ylo, yhi] = extent([...yStarts, ...yEnds]);
  const [clo, chi] = extent(colors);
  const xScale = linearScale(xlo, xhi, x0, x1);
  const yScale = linearScale(ylo, yhi, y0, y1);
  const shade = linearScale(clo, chi, 0.12, 1.0);
  for (let i = 0; i < rows.length; i++) {
    svg.appendChild(
      svgEl(doc, "rect", {
        x: fmt(xScale(xStarts[i])),
        y: fmt(yScale(yEnds[i])),
        width: fmt(Math.max(xScale(xEnds[i]) - xScale(xStarts[i]), 0.5)),
        height: fmt(Math.max(yScale(yStarts[i]) - yScale(yEnds[i]), 0.5)),
        fill: PALETTE[0],
        "fill-opacity": fmt(shade(colors[i])),
      }),
    );
  }
  axisLabels(doc, svg, xsf.replace(/_start$/, ""), ysf.replace(/_start$/, ""));
}
