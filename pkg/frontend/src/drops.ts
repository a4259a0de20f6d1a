/**
 * Expected drop-fraction chart for selective forwarding: one line per drop
 * ratio, fraction of all packets lost vs how many of the n senders route
 * through the attacker.
 */

import { FigureSpec, renderFigure, Series } from './svg.js';

export function expectedDropFraction(k: number, n: number, r: number): number {
  if (n < 1 || k < 0 || k > n || r < 0 || r > 1) {
    throw new RangeError(`bad arguments k=${k}, n=${n}, r=${r}`);
  }
  return (k * r) / n;
}

export function dropSeries(n: number, ratios: number[]): Series[] {
  return ratios.map((r) => ({
    label: `drop ratio ${r}`,
    points: Array.from({ length: n + 1 },
                       (_, k) => [k, expectedDropFraction(k, n, r)] as [number, number]),
  }));
}

export function dropFigure(n: number, ratios: number[]): string {
  const spec: FigureSpec = {
    panels: [{
      title: `expected packets dropped (${n} senders)`,
      yLabel: 'packets dropped',
      series: dropSeries(n, ratios),
      yMax: 1.0,
      yPercent: true,
    }],
    columns: 1,
    xLabel: 'senders routing through the attacker',
    legend: ratios.map((r) => ({ label: `drop ratio ${r}` })),
  };
  return renderFigure(spec);
}
