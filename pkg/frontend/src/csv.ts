/**
 * Reader for rplsim run CSVs.
 *
 * The column set is fixed; anything else is rejected with the offending
 * column named, so figures can never silently render the wrong data.
 */

import * as fs from 'fs';

export const CSV_COLUMNS = [
  'run_id', 'scenario', 'attack', 'seed', 't_s', 'node_id', 'role',
  't_cpu_us', 't_lpm_us', 't_tx_us', 't_rx_us', 'energy_mj', 'avg_power_mw',
  'soc_pct', 'pkts_sent', 'pkts_app_rx', 'pkts_dropped',
] as const;

export interface SampleRow {
  t: number;              // seconds
  node: number;
  role: string;
  cpu: number;            // seconds in each state
  lpm: number;
  tx: number;
  rx: number;
  power: number;          // mW
  soc: number | null;     // fraction, null for infinite-power nodes
}

export interface Run {
  path: string;
  runId: string;
  scenario: string;
  attack: string;
  seed: number;
  rows: SampleRow[];
}

export class SchemaError extends Error {}

export function parseRun(path: string): Run {
  const text = fs.readFileSync(path, 'utf-8');
  const lines = text.split('\n').filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const header = lines[0].split(',');
  for (let i = 0; i < Math.max(header.length, CSV_COLUMNS.length); i++) {
    if (header[i] !== CSV_COLUMNS[i]) {
      throw new SchemaError(
        `${path}: column ${i + 1} is ${header[i] ?? '(missing)'}, ` +
        `expected ${CSV_COLUMNS[i] ?? '(nothing)'}`);
    }
  }
  const rows: SampleRow[] = [];
  let meta: Pick<Run, 'runId' | 'scenario' | 'attack' | 'seed'> | null = null;
  for (const line of lines.slice(1)) {
    const parts = line.split(',');
    if (parts.length !== CSV_COLUMNS.length) {
      throw new SchemaError(
        `${path}: row has ${parts.length} fields, expected ${CSV_COLUMNS.length}`);
    }
    meta = {
      runId: parts[0], scenario: parts[1], attack: parts[2],
      seed: Number(parts[3]),
    };
    rows.push({
      t: Number(parts[4]),
      node: Number(parts[5]),
      role: parts[6],
      cpu: Number(parts[7]) / 1e6,
      lpm: Number(parts[8]) / 1e6,
      tx: Number(parts[9]) / 1e6,
      rx: Number(parts[10]) / 1e6,
      power: Number(parts[12]),
      soc: parts[13] === '' ? null : Number(parts[13]) / 100,
    });
  }
  return { path, ...meta!, rows };
}

export type Metric = 'cpu' | 'lpm' | 'tx' | 'rx' | 'power' | 'soc';

export const METRIC_LABELS: Record<Metric, string> = {
  cpu: 'CPU time (s)',
  lpm: 'low-power time (s)',
  tx: 'TX time (s)',
  rx: 'RX time (s)',
  power: 'average power (mW)',
  soc: 'state of charge',
};

/** Per-sample arithmetic mean over honest nodes. */
export function honestMean(run: Run, metric: Metric): Array<[number, number]> {
  const byTime = new Map<number, number[]>();
  for (const row of run.rows) {
    if (row.role !== 'honest') continue;
    const value = row[metric];
    if (value === null) continue;
    const bucket = byTime.get(row.t);
    if (bucket) bucket.push(value);
    else byTime.set(row.t, [value]);
  }
  return [...byTime.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([t, vals]) => [t, vals.reduce((s, v) => s + v, 0) / vals.length]);
}

/** All runs must share one sample grid for curves to be comparable. */
export function assertSameGrid(runs: Run[]): void {
  const grid = (run: Run) =>
    [...new Set(run.rows.map((r) => r.t))].sort((a, b) => a - b).join(',');
  const first = grid(runs[0]);
  for (const run of runs.slice(1)) {
    if (grid(run) !== first) {
      throw new SchemaError(
        `${run.path}: sample grid differs from ${runs[0].path}`);
    }
  }
}
