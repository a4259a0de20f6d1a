"""Command-line front end.

    rplsim simulate --scenario canonical7 --seed 1 --out run.csv
    rplsim compare --baseline base.csv --attack attack.csv --out report.csv
    rplsim sweep --scenario stretch11 --batteries 2xAAA,CR2032,CR123A
    rplsim presets

Progress goes to stderr; data goes to files and stdout.  Exit codes:
0 success, 1 validation or usage error, 2 internal failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .kernel import TICKS_PER_SECOND, seconds
from .metrics import compare_report, final_honest_mean, read_csv, write_csv, \
    ScenarioMismatch
from .runner import run_scenario
from .scenario import ParseError, ValidationError, load_scenario_path, \
    preset_names, load_preset

BATTERY_CATALOG = {
    "2xAAA": 1000.0,
    "CR2032": 225.0,
    "CR123A": 1500.0,
    "CR2": 800.0,
}


class CliError(Exception):
    """Validation-level failure; exits with code 1."""


def _load(path: str):
    try:
        return load_scenario_path(path)
    except FileNotFoundError:
        raise CliError(f"scenario file not found: {path}")
    except (ParseError, ValidationError) as exc:
        raise CliError(f"invalid scenario {path}: {exc}")


def _fmt_s(ticks: int) -> str:
    return f"{ticks / TICKS_PER_SECOND:.3f}"


def cmd_simulate(args) -> int:
    config = _load(args.scenario)
    duration = seconds(args.duration) if args.duration is not None else None
    metrics = run_scenario(config, seed=args.seed, duration=duration)
    out = args.out or f"{metrics.run_id}.csv"
    write_csv(metrics, out)
    print(f"wrote {out}", file=sys.stderr)

    final = metrics.final_samples()
    for node_id in metrics.honest_ids():
        s = final[node_id]
        if node_id in metrics.empty_nodes:
            soc = "Empty"
        elif s.soc is None:
            soc = "inf"
        else:
            soc = f"{s.soc * 100:.2f}%"
        print(f"node {node_id} (honest): cpu={_fmt_s(s.t_cpu)}s "
              f"lpm={_fmt_s(s.t_lpm)}s tx={_fmt_s(s.t_tx)}s rx={_fmt_s(s.t_rx)}s "
              f"power={s.power_mw:.4f}mW soc={soc}")
    print(f"honest mean: cpu={final_honest_mean(metrics, 'cpu') / 1e6:.3f}s "
          f"lpm={final_honest_mean(metrics, 'lpm') / 1e6:.3f}s "
          f"tx={final_honest_mean(metrics, 'tx') / 1e6:.3f}s "
          f"rx={final_honest_mean(metrics, 'rx') / 1e6:.3f}s "
          f"power={final_honest_mean(metrics, 'power'):.4f}mW")
    return 0


def cmd_compare(args) -> int:
    try:
        baseline = read_csv(args.baseline)
        attacked = read_csv(args.attack)
        report = compare_report(baseline, attacked)
    except (ScenarioMismatch, FileNotFoundError, ValueError) as exc:
        raise CliError(str(exc))
    sys.stdout.write(report.format_text())
    if args.out:
        report.to_csv(args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _sweep_one(job):
    config, battery_name, capacity, attack_on, seed, duration = job
    battery = replace(config.battery_default, capacity_mah=capacity)
    attack = config.attack if attack_on else replace(config.attack, start_at=None)
    cfg = replace(config, battery_default=battery, attack=attack)
    metrics = run_scenario(cfg, seed=seed, duration=duration)
    honest = set(metrics.honest_ids())
    consumed = [v for k, v in metrics.battery_consumed.items() if k in honest]
    mean_pct = 100.0 * sum(consumed) / len(consumed) if consumed else 0.0
    empty = sorted(set(metrics.empty_nodes) & honest)
    return battery_name, attack_on, mean_pct, empty


def cmd_sweep(args) -> int:
    config = _load(args.scenario)
    duration = seconds(args.duration) if args.duration is not None else None
    batteries = []
    for name in args.batteries.split(","):
        name = name.strip()
        if name in BATTERY_CATALOG:
            batteries.append((name, BATTERY_CATALOG[name]))
        else:
            try:
                batteries.append((name, float(name)))
            except ValueError:
                raise CliError(
                    f"unknown battery {name!r}; expected one of "
                    f"{sorted(BATTERY_CATALOG)} or an explicit mAh value")
    jobs = [(config, name, cap, attack_on, args.seed, duration)
            for name, cap in batteries for attack_on in (False, True)]
    workers = min(len(jobs), os.cpu_count() or 1,
                  int(os.environ.get("RPLSIM_THREADS", str(len(jobs)))))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]

    cells = {(name, on): (pct, empty) for name, on, pct, empty in results}
    attack_label = config.attack.kind.value
    print(f"{'battery':<18}{'no attack':>16}{attack_label + ' attack':>26}")
    for name, cap in batteries:
        row = [f"{name} ({cap:g} mAh)"]
        for on in (False, True):
            pct, empty = cells[(name, on)]
            row.append("Empty" if empty else f"{pct:.2f}%")
        print(f"{row[0]:<18}{row[1]:>16}{row[2]:>26}")
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("battery,capacity_mah,attack,consumed_pct_mean,empty_nodes\n")
            for name, cap in batteries:
                for on in (False, True):
                    pct, empty = cells[(name, on)]
                    fh.write(f"{name},{cap:g},{'on' if on else 'off'},"
                             f"{pct:.4f},{';'.join(map(str, empty))}\n")
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_presets(_args) -> int:
    for name in preset_names():
        config = load_preset(name)
        print(f"{name:<24} {config.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rplsim",
        description="Deterministic simulator for battery-draining attacks "
                    "on RPL networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write its CSV")
    p.add_argument("--scenario", required=True,
                   help="scenario file path or preset name")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--duration", type=float, default=None, metavar="S",
                   help="override run length in seconds")
    p.add_argument("--out", default=None,
                   help="output CSV (default <scenario>_<attack>_<seed>.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="percent-change report of two run CSVs")
    p.add_argument("--baseline", required=True)
    p.add_argument("--attack", required=True)
    p.add_argument("--out", default=None, help="also write the report as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep",
                       help="run a scenario per battery, with and without "
                            "its attack")
    p.add_argument("--scenario", required=True)
    p.add_argument("--batteries", required=True,
                   help="comma-separated names (2xAAA, CR2032, CR123A, CR2) "
                        "or mAh values")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--duration", type=float, default=None, metavar="S")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list shipped scenarios")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
