#!/usr/bin/env node
/**
 * figgen: static SVG figures from rplsim run CSVs.
 *
 *   figgen resource --baseline base.csv --attacks a.csv,b.csv --out fig5.svg
 *   figgen drops --n 5 --ratios 0.25,0.5,0.75,1.0 --out fig6.svg
 *
 * Inputs are never modified; rerunning with the same inputs writes
 * byte-identical SVG.
 */

import * as fs from 'fs';
import { SchemaError, Metric } from './csv.js';
import { dropFigure } from './drops.js';
import { DEFAULT_PANELS, resourceFigure } from './resource.js';

const USAGE = `usage:
  figgen resource --baseline <csv> [--attacks <csv,csv,...>] [--panels cpu,lpm,tx,rx] --out <svg>
  figgen drops --n <senders> --ratios <r,r,...> --out <svg>`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith('--') || value === undefined) {
      throw new Error(`bad argument ${key}`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

function need(flags: Map<string, string>, key: string): string {
  const value = flags.get(key);
  if (value === undefined) throw new Error(`missing --${key}`);
  return value;
}

const VALID_PANELS = new Set(['cpu', 'lpm', 'tx', 'rx', 'power', 'soc']);

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    let svg: string;
    if (command === 'resource') {
      const baseline = need(flags, 'baseline');
      const attacks = (flags.get('attacks') ?? '')
        .split(',').filter((s) => s.length > 0);
      const panels = (flags.get('panels') ?? DEFAULT_PANELS.join(','))
        .split(',');
      for (const p of panels) {
        if (!VALID_PANELS.has(p)) throw new Error(`unknown panel ${p}`);
      }
      svg = resourceFigure(baseline, attacks, panels as Metric[]);
    } else if (command === 'drops') {
      const n = Number(need(flags, 'n'));
      const ratios = need(flags, 'ratios').split(',').map(Number);
      if (!Number.isInteger(n) || n < 1 || ratios.some((r) => isNaN(r))) {
        throw new Error('drops needs an integer --n and numeric --ratios');
      }
      svg = dropFigure(n, ratios);
    } else {
      console.error(USAGE);
      return 1;
    }
    fs.writeFileSync(need(flags, 'out'), svg);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof RangeError ||
        err instanceof Error) {
      console.error(`figgen: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
  process.exit(main(process.argv.slice(2)));
}
