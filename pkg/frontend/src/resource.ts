/**
 * Four-panel resource figure: honest-mean CPU / LPM / TX / RX over time,
 * baseline run drawn in black, one colored curve per attack run.
 */

import { assertSameGrid, honestMean, Metric, METRIC_LABELS, parseRun, Run }
  from './csv.js';
import { FigureSpec, renderFigure, Series } from './svg.js';

export const DEFAULT_PANELS: Metric[] = ['cpu', 'lpm', 'tx', 'rx'];

export function resourceFigure(baselinePath: string, attackPaths: string[],
                               metrics: Metric[] = DEFAULT_PANELS): string {
  const baseline = parseRun(baselinePath);
  const attacks = attackPaths.map(parseRun);
  assertSameGrid([baseline, ...attacks]);

  const curveLabel = (run: Run) =>
    run.attack === 'none' ? 'honest network' : run.attack.replace(/_/g, ' ');

  const panels = metrics.map((metric) => {
    const series: Series[] = attacks.map((run) => ({
      label: curveLabel(run),
      points: honestMean(run, metric),
    }));
    series.push({
      label: curveLabel(baseline),
      points: honestMean(baseline, metric),
      emphasis: true,
    });
    return {
      title: METRIC_LABELS[metric],
      yLabel: METRIC_LABELS[metric],
      series,
      yPercent: metric === 'soc',
    };
  });

  const spec: FigureSpec = {
    panels,
    columns: 2,
    xLabel: 'simulation time (s)',
    legend: [
      { label: curveLabel(baseline), emphasis: true },
      ...attacks.map((run) => ({ label: curveLabel(run) })),
    ],
  };
  return renderFigure(spec);
}
