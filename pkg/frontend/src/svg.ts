/**
 * Minimal deterministic SVG plotting: polylines, scatter markers and
 * shaded bands on linear or log axes.  No DOM, no randomness, fixed
 * fonts and sizes, so identical inputs give byte-identical files.
 *
 * The numeric content of every series is embedded verbatim in a
 * <metadata> block (JSON, full binary64 precision): rendering is pure
 * presentation and the plotted data can always be extracted exactly.
 */

export type SeriesKind = "line" | "points" | "band";
export type Marker = "circle" | "triangle" | "square";

export interface Series {
  label: string;
  kind: SeriesKind;
  x: number[];
  y: number[];
  /** band extent; required for kind = "band" */
  ylo?: number[];
  yhi?: number[];
  color: string;
  dashed?: boolean;
  marker?: Marker;
}

export interface PlotSpec {
  title: string;
  xlabel: string;
  ylabel: string;
  series: Series[];
  width?: number;
  height?: number;
  xrange?: [number, number];
  yrange?: [number, number];
  ylog?: boolean;
}

const MARGIN = { left: 64, right: 16, top: 34, bottom: 46 };

function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / target)));
  let step = step0;
  for (const mult of [1, 2, 5, 10]) {
    step = step0 * mult;
    if (span / step <= target) break;
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let d = Math.ceil(Math.log10(lo)); Math.pow(10, d) <= hi * (1 + 1e-12); d++) {
    ticks.push(Math.pow(10, d));
  }
  return ticks.length ? ticks : [lo];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return String(Number(v.toPrecision(6)));
}

/** Coordinates rounded to 0.01 px: presentation only, data lives in <metadata>. */
const px = (v: number) => (Math.round(v * 100) / 100).toString();

export function renderSvg(spec: PlotSpec): string {
  const width = spec.width ?? 720;
  const height = spec.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = spec.series.flatMap((s) => s.x);
  const ysAll = spec.series.flatMap((s) =>
    s.kind === "band" ? [...(s.ylo ?? []), ...(s.yhi ?? [])] : s.y
  );
  const finite = (v: number) => Number.isFinite(v) && (!spec.ylog || v > 0);
  const ys = ysAll.filter(finite);
  if (xs.length === 0 || ys.length === 0) throw new Error("nothing to plot");

  let [x0, x1] = spec.xrange ?? [Math.min(...xs), Math.max(...xs)];
  if (x1 <= x0) x1 = x0 + 1;
  let [y0, y1] = spec.yrange ?? [Math.min(...ys), Math.max(...ys)];
  if (!spec.yrange && !spec.ylog) {
    const pad = 0.05 * (y1 - y0 || 1);
    y0 -= pad;
    y1 += pad;
  }
  if (y1 <= y0) y1 = y0 + 1;

  const sx = (v: number) => MARGIN.left + ((v - x0) / (x1 - x0)) * plotW;
  const sy = spec.ylog
    ? (v: number) => MARGIN.top + plotH - ((Math.log10(v) - Math.log10(y0)) / (Math.log10(y1) - Math.log10(y0))) * plotH
    : (v: number) => MARGIN.top + plotH - ((v - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica,Arial,sans-serif">`
  );
  const payload = spec.series.map((s) => ({
    label: s.label,
    kind: s.kind,
    x: s.x,
    y: s.y,
    ...(s.ylo ? { ylo: s.ylo } : {}),
    ...(s.yhi ? { yhi: s.yhi } : {}),
  }));
  parts.push(`<metadata id="source-data">${JSON.stringify(payload)}</metadata>`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<defs><clipPath id="plot-area"><rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}"/></clipPath></defs>`
  );
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="black" stroke-width="1"/>`
  );

  const xticks = niceTicks(x0, x1);
  for (const v of xticks) {
    const X = px(sx(v));
    parts.push(`<line x1="${X}" y1="${px(MARGIN.top + plotH)}" x2="${X}" y2="${px(MARGIN.top + plotH + 5)}" stroke="black"/>`);
    parts.push(`<text x="${X}" y="${px(MARGIN.top + plotH + 18)}" font-size="11" text-anchor="middle">${fmt(v)}</text>`);
  }
  const yticks = spec.ylog ? logTicks(y0, y1) : niceTicks(y0, y1);
  for (const v of yticks) {
    const Y = px(sy(v));
    parts.push(`<line x1="${px(MARGIN.left - 5)}" y1="${Y}" x2="${MARGIN.left}" y2="${Y}" stroke="black"/>`);
    parts.push(`<text x="${px(MARGIN.left - 8)}" y="${Y}" font-size="11" text-anchor="end" dominant-baseline="middle">${fmt(v)}</text>`);
  }
  parts.push(`<text x="${px(MARGIN.left + plotW / 2)}" y="${height - 8}" font-size="13" text-anchor="middle">${escapeXml(spec.xlabel)}</text>`);
  parts.push(`<text x="16" y="${px(MARGIN.top + plotH / 2)}" font-size="13" text-anchor="middle" transform="rotate(-90 16 ${px(MARGIN.top + plotH / 2)})">${escapeXml(spec.ylabel)}</text>`);
  parts.push(`<text x="${px(MARGIN.left + plotW / 2)}" y="20" font-size="14" text-anchor="middle">${escapeXml(spec.title)}</text>`);

  const inX = (v: number) => v >= x0 - 1e-12 && v <= x1 + 1e-12;
  parts.push(`<g clip-path="url(#plot-area)">`);
  for (const s of spec.series) {
    if (s.kind === "band") {
      const pts: string[] = [];
      for (let i = 0; i < s.x.length; i++) {
        if (inX(s.x[i]) && finite(s.yhi![i])) pts.push(`${px(sx(s.x[i]))},${px(sy(clampY(s.yhi![i], y0, y1, spec.ylog)))}`);
      }
      for (let i = s.x.length - 1; i >= 0; i--) {
        if (inX(s.x[i]) && finite(s.ylo![i])) pts.push(`${px(sx(s.x[i]))},${px(sy(clampY(s.ylo![i], y0, y1, spec.ylog)))}`);
      }
      if (pts.length > 2) {
        parts.push(`<polygon points="${pts.join(" ")}" fill="${s.color}" fill-opacity="0.35" stroke="none"/>`);
      }
    } else if (s.kind === "line") {
      const segs: string[][] = [[]];
      for (let i = 0; i < s.x.length; i++) {
        if (inX(s.x[i]) && finite(s.y[i])) {
          segs[segs.length - 1].push(`${px(sx(s.x[i]))},${px(sy(s.y[i]))}`);
        } else if (segs[segs.length - 1].length) {
          segs.push([]);
        }
      }
      const dash = s.dashed ? ` stroke-dasharray="6,4"` : "";
      for (const seg of segs) {
        if (seg.length > 1) {
          parts.push(`<polyline points="${seg.join(" ")}" fill="none" stroke="${s.color}" stroke-width="1.6"${dash}/>`);
        }
      }
    } else {
      for (let i = 0; i < s.x.length; i++) {
        if (!inX(s.x[i]) || !finite(s.y[i])) continue;
        const X = sx(s.x[i]);
        const Y = sy(s.y[i]);
        parts.push(markerShape(s.marker ?? "circle", X, Y, s.color));
      }
    }
  }

  parts.push(`</g>`);

  // legend
  let ly = MARGIN.top + 10;
  for (const s of spec.series) {
    if (!s.label) continue;
    const lx = MARGIN.left + plotW - 170;
    if (s.kind === "line") {
      parts.push(`<line x1="${lx}" y1="${px(ly)}" x2="${lx + 24}" y2="${px(ly)}" stroke="${s.color}" stroke-width="1.6"${s.dashed ? ` stroke-dasharray="6,4"` : ""}/>`);
    } else if (s.kind === "points") {
      parts.push(markerShape(s.marker ?? "circle", lx + 12, ly, s.color));
    } else {
      parts.push(`<rect x="${lx}" y="${px(ly - 5)}" width="24" height="10" fill="${s.color}" fill-opacity="0.35"/>`);
    }
    parts.push(`<text x="${lx + 30}" y="${px(ly)}" font-size="11" dominant-baseline="middle">${escapeXml(s.label)}</text>`);
    ly += 16;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function clampY(v: number, y0: number, y1: number, ylog?: boolean): number {
  const lo = ylog ? y0 : Math.min(y0, y1);
  return Math.min(Math.max(v, lo), Math.max(y0, y1));
}

function markerShape(marker: Marker, X: number, Y: number, color: string): string {
  if (marker === "triangle") {
    const p = `${px(X)},${px(Y - 3.5)} ${px(X - 3.2)},${px(Y + 2.6)} ${px(X + 3.2)},${px(Y + 2.6)}`;
    return `<polygon points="${p}" fill="${color}"/>`;
  }
  if (marker === "square") {
    return `<rect x="${px(X - 2.6)}" y="${px(Y - 2.6)}" width="5.2" height="5.2" fill="${color}"/>`;
  }
  return `<circle cx="${px(X)}" cy="${px(Y)}" r="2.8" fill="${color}"/>`;
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Exact numeric payload embedded at render time (for round-trip checks). */
export function extractSourceData(svg: string): { label: string; kind: string; x: number[]; y: number[]; ylo?: number[]; yhi?: number[] }[] {
  const m = svg.match(/<metadata id="source-data">(.*?)<\/metadata>/s);
  if (!m) throw new Error("no embedded source data found");
  return JSON.parse(m[1]);
}
