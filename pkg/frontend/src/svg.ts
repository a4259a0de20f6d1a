/**
 * Minimal deterministic SVG line charts.
 *
 * Everything is emitted as plain markup with fixed-precision coordinates,
 * so identical inputs always produce identical bytes.
 */

export interface Series {
  label: string;
  points: Array<[number, number]>;
  emphasis?: boolean;          // baseline curve: thicker, drawn on top
}

export interface PanelSpec {
  title: string;
  yLabel: string;
  series: Series[];
  yMax?: number;               // fixed axis ceiling (default: data max)
  yPercent?: boolean;
}

const PALETTE = ['#d62728', '#1f77b4', '#2ca02c', '#9467bd', '#ff7f0e',
  '#8c564b', '#17becf', '#bcbd22'];
const BASELINE_COLOR = '#000000';

const W = 460;
const H = 320;
const MARGIN = { left: 62, right: 14, top: 30, bottom: 40 };

function fmt(x: number): string {
  return x.toFixed(2).replace(/\.?0+$/, '');
}

function niceTicks(max: number, count = 4): number[] {
  if (max <= 0) return [0, 1];
  const raw = max / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag)
    .find((s) => max / s <= count) ?? 10 * mag;
  const ticks = [];
  for (let v = 0; v <= max * 1.0001; v += step) ticks.push(v);
  return ticks;
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

/** One chart panel at the given offset; returns SVG fragment. */
export function renderPanel(spec: PanelSpec, ox: number, oy: number,
                            xLabel: string): string {
  const xs = spec.series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = spec.series.flatMap((s) => s.points.map((p) => p[1]));
  const xMax = Math.max(1e-9, ...xs);
  const yMax = spec.yMax ?? Math.max(1e-9, ...ys) * 1.05;
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => MARGIN.left + (x / xMax) * plotW;
  const py = (y: number) => MARGIN.top + plotH - (y / yMax) * plotH;

  const out: string[] = [];
  out.push(`<g transform="translate(${ox},${oy})">`);
  out.push(`<text x="${MARGIN.left}" y="18" font-size="13" ` +
           `font-weight="bold">${esc(spec.title)}</text>`);
  out.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
           `height="${plotH}" fill="none" stroke="#999" stroke-width="0.7"/>`);

  for (const tick of niceTicks(yMax)) {
    const y = py(tick);
    out.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" ` +
             `x2="${MARGIN.left + plotW}" y2="${fmt(y)}" stroke="#ddd" ` +
             `stroke-width="0.5"/>`);
    const label = spec.yPercent ? `${fmt(tick * 100)}%` : fmt(tick);
    out.push(`<text x="${MARGIN.left - 5}" y="${fmt(y + 3)}" font-size="9" ` +
             `text-anchor="end">${label}</text>`);
  }
  for (const tick of niceTicks(xMax)) {
    const x = px(tick);
    out.push(`<text x="${fmt(x)}" y="${MARGIN.top + plotH + 14}" ` +
             `font-size="9" text-anchor="middle">${fmt(tick)}</text>`);
  }
  out.push(`<text x="${MARGIN.left + plotW / 2}" y="${H - 8}" font-size="10" ` +
           `text-anchor="middle">${esc(xLabel)}</text>`);
  out.push(`<text x="14" y="${MARGIN.top + plotH / 2}" font-size="10" ` +
           `text-anchor="middle" transform="rotate(-90 14 ` +
           `${MARGIN.top + plotH / 2})">${esc(spec.yLabel)}</text>`);

  const plain = spec.series.filter((s) => !s.emphasis);
  const emphasized = spec.series.filter((s) => s.emphasis);
  [...plain, ...emphasized].forEach((s) => {
    const color = s.emphasis
      ? BASELINE_COLOR
      : PALETTE[plain.indexOf(s) % PALETTE.length];
    const pts = s.points.map(([x, y]) => `${fmt(px(x))},${fmt(py(y))}`)
      .join(' ');
    out.push(`<polyline points="${pts}" fill="none" stroke="${color}" ` +
             `stroke-width="${s.emphasis ? 2.2 : 1.3}"/>`);
  });
  out.push('</g>');
  return out.join('\n');
}

export interface FigureSpec {
  panels: PanelSpec[];
  columns: number;
  xLabel: string;
  legend: Array<{ label: string; emphasis?: boolean }>;
}

export function renderFigure(spec: FigureSpec): string {
  const columns = spec.columns;
  const rows = Math.ceil(spec.panels.length / columns);
  const legendH = 22;
  const width = columns * W;
  const height = rows * H + legendH;
  const out: string[] = [];
  out.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
           `height="${height}" viewBox="0 0 ${width} ${height}" ` +
           `font-family="Helvetica, Arial, sans-serif">`);
  out.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);

  let x = 10;
  const plain = spec.legend.filter((e) => !e.emphasis);
  for (const entry of spec.legend) {
    const color = entry.emphasis
      ? BASELINE_COLOR
      : PALETTE[plain.indexOf(entry) % PALETTE.length];
    out.push(`<line x1="${x}" y1="12" x2="${x + 18}" y2="12" ` +
             `stroke="${color}" stroke-width="${entry.emphasis ? 2.2 : 1.3}"/>`);
    out.push(`<text x="${x + 22}" y="15" font-size="10">` +
             `${esc(entry.label)}</text>`);
    x += 30 + entry.label.length * 6;
  }

  spec.panels.forEach((panel, i) => {
    const ox = (i % columns) * W;
    const oy = legendH + Math.floor(i / columns) * H;
    out.push(renderPanel(panel, ox, oy, spec.xLabel));
  });
  out.push('</svg>');
  return out.join('\n') + '\n';
}
