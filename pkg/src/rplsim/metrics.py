"""Run metrics: per-node sample series, packet counters, CSV output and
baseline-vs-attack comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

from .kernel import TICKS_PER_SECOND


class NoHonestNodes(Exception):
    pass


class ZeroBaseline(Exception):
    pass


class InvalidArgs(Exception):
    pass


class ScenarioMismatch(Exception):
    pass


CSV_COLUMNS = ["run_id", "scenario", "attack", "seed", "t_s", "node_id", "role",
               "t_cpu_us", "t_lpm_us", "t_tx_us", "t_rx_us", "energy_mj",
               "avg_power_mw", "soc_pct", "pkts_sent", "pkts_app_rx",
               "pkts_dropped"]


@dataclass
class NodeSample:
    t: int
    node: int
    role: str
    t_cpu: int
    t_lpm: int
    t_tx: int
    t_rx: int
    energy_mj: float
    power_mw: float
    soc: Optional[float]
    sent: int
    app_rx: int
    dropped: int


@dataclass
class PacketCounters:
    sent: int = 0
    delivered_app: int = 0
    dropped_medium: int = 0
    dropped_attacker: int = 0
    dropped_noroute: int = 0
    in_flight: int = 0

    def conserved(self) -> bool:
        return self.sent == (self.delivered_app + self.dropped_medium
                             + self.dropped_attacker + self.dropped_noroute
                             + self.in_flight)


@dataclass
class RunMetrics:
    scenario: str
    attack: str
    seed: int
    duration: int
    sample_interval: int
    roles: dict[int, str]
    samples: list[NodeSample]
    counters: PacketCounters = field(default_factory=PacketCounters)
    delivered_by_origin: dict[int, int] = field(default_factory=dict)
    battery_consumed: dict[int, float] = field(default_factory=dict)
    empty_nodes: list[int] = field(default_factory=list)

    @property
    def run_id(self) -> str:
        return f"{self.scenario}_{self.attack}_{self.seed}"

    def honest_ids(self) -> list[int]:
        return sorted(i for i, role in self.roles.items() if role == "honest")

    def final_samples(self) -> dict[int, NodeSample]:
        """Last sample per node."""
        last: dict[int, NodeSample] = {}
        for s in self.samples:
            last[s.node] = s
        return last

    def drop_fraction(self) -> float:
        if self.counters.sent == 0:
            return 0.0
        dropped = (self.counters.dropped_attacker + self.counters.dropped_medium
                   + self.counters.dropped_noroute)
        return dropped / self.counters.sent


METRIC_FIELDS = {
    "cpu": "t_cpu",
    "lpm": "t_lpm",
    "tx": "t_tx",
    "rx": "t_rx",
    "power": "power_mw",
    "energy": "energy_mj",
}


def honest_mean(metrics: RunMetrics, metric: str) -> list[tuple[int, float]]:
    """Per-sample arithmetic mean over honest nodes; server and attacker are
    excluded."""
    honest = set(metrics.honest_ids())
    if not honest:
        raise NoHonestNodes("run has no honest nodes")
    attr = METRIC_FIELDS.get(metric, metric)
    by_time: dict[int, list[float]] = {}
    for s in metrics.samples:
        if s.node in honest:
            by_time.setdefault(s.t, []).append(float(getattr(s, attr)))
    return [(t, sum(vals) / len(vals)) for t, vals in sorted(by_time.items())]


def final_honest_mean(metrics: RunMetrics, metric: str) -> float:
    series = honest_mean(metrics, metric)
    if not series:
        raise NoHonestNodes("run has no samples")
    return series[-1][1]


def percent_increase(baseline: float, attacked: float) -> float:
    if baseline <= 0:
        raise ZeroBaseline("baseline must be positive")
    return (attacked - baseline) / baseline * 100.0


def expected_drop_fraction(k: int, n: int, r: float) -> float:
    """Network-wide fraction of data packets dropped when k of n equal-rate
    senders route through an attacker dropping ratio r."""
    if n < 1 or not 0 <= k <= n or not 0.0 <= r <= 1.0:
        raise InvalidArgs(f"bad arguments k={k}, n={n}, r={r}")
    return k * r / n


# ----------------------------------------------------------------------
# CSV I/O

def _fmt_t(ticks: int) -> str:
    if ticks % TICKS_PER_SECOND == 0:
        return str(ticks // TICKS_PER_SECOND)
    return repr(ticks / TICKS_PER_SECOND)


def write_csv(metrics: RunMetrics, path: str) -> None:
    """Deterministic sample dump: one row per (time, node), LF endings."""
    run_id = metrics.run_id
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        rows = sorted(metrics.samples, key=lambda s: (s.t, s.node))
        for s in rows:
            soc = "" if s.soc is None else f"{s.soc * 100:.4f}"
            fh.write(",".join([
                run_id, metrics.scenario, metrics.attack, str(metrics.seed),
                _fmt_t(s.t), str(s.node), s.role,
                str(s.t_cpu), str(s.t_lpm), str(s.t_tx), str(s.t_rx),
                f"{s.energy_mj:.6f}", f"{s.power_mw:.6f}", soc,
                str(s.sent), str(s.app_rx), str(s.dropped)]) + "\n")


def read_csv(path: str) -> RunMetrics:
    """Rebuild the sample series from a CSV produced by write_csv.

    Packet-ledger totals are not stored in the CSV, so counters in the
    returned metrics stay zero; comparisons only use the samples.
    """
    samples: list[NodeSample] = []
    roles: dict[int, str] = {}
    meta = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ScenarioMismatch(
                f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            t = round(float(row["t_s"]) * TICKS_PER_SECOND)
            node = int(row["node_id"])
            roles[node] = row["role"]
            soc = float(row["soc_pct"]) / 100 if row["soc_pct"] else None
            samples.append(NodeSample(
                t=t, node=node, role=row["role"],
                t_cpu=int(row["t_cpu_us"]), t_lpm=int(row["t_lpm_us"]),
                t_tx=int(row["t_tx_us"]), t_rx=int(row["t_rx_us"]),
                energy_mj=float(row["energy_mj"]),
                power_mw=float(row["avg_power_mw"]), soc=soc,
                sent=int(row["pkts_sent"]), app_rx=int(row["pkts_app_rx"]),
                dropped=int(row["pkts_dropped"])))
            meta = (row["scenario"], row["attack"], int(row["seed"]))
    if meta is None:
        raise ScenarioMismatch(f"{path}: no data rows")
    times = sorted({s.t for s in samples})
    interval = times[1] - times[0] if len(times) > 1 else times[0]
    consumed = {s.node: 1.0 - s.soc for s in samples
                if s.soc is not None and s.t == times[-1]}
    return RunMetrics(
        scenario=meta[0], attack=meta[1], seed=meta[2], duration=times[-1],
        sample_interval=interval, roles=roles, samples=samples,
        battery_consumed=consumed)


# ----------------------------------------------------------------------
# comparison report

NEGLIGIBLE_PCT = 10.0


@dataclass
class CompareRow:
    metric: str
    baseline: float
    attacked: float
    change_pct: float        # sign per direction label
    direction: str           # "increase" or "decrease"

    @property
    def negligible(self) -> bool:
        return abs(self.change_pct) < NEGLIGIBLE_PCT


@dataclass
class CompareReport:
    scenario: str
    baseline_attack: str
    attacked_attack: str
    rows: list[CompareRow]

    def format_text(self) -> str:
        lines = [
            f"scenario: {self.scenario}",
            f"baseline: {self.baseline_attack}    attacked: {self.attacked_attack}",
            "",
            f"{'metric':<22}{'baseline':>14}{'attacked':>14}{'change':>12}  note",
        ]
        for r in self.rows:
            note = "negligible" if r.negligible else ""
            lines.append(f"{r.metric:<22}{r.baseline:>14.6f}{r.attacked:>14.6f}"
                         f"{r.change_pct:>11.1f}%  {note}".rstrip())
        return "\n".join(lines) + "\n"

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("metric,baseline,attacked,change_pct,direction,negligible\n")
            for r in self.rows:
                fh.write(f"{r.metric},{r.baseline!r},{r.attacked!r},"
                         f"{r.change_pct:.1f},{r.direction},"
                         f"{str(r.negligible).lower()}\n")


def _mean(values: list[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def compare_report(baseline: RunMetrics, attacked: RunMetrics) -> CompareReport:
    """Percent changes of final honest-mean resources, attack vs baseline.

    The two runs must cover the same node ids on the same sample grid; the
    malicious role may sit on a different node (each run's own honest set is
    averaged), since that is exactly what attack presets vary.
    """
    if set(baseline.roles) != set(attacked.roles):
        raise ScenarioMismatch(
            f"node sets differ: {sorted(baseline.roles)} vs "
            f"{sorted(attacked.roles)}")
    if baseline.duration != attacked.duration:
        raise ScenarioMismatch("durations differ")
    if baseline.sample_interval != attacked.sample_interval:
        raise ScenarioMismatch("sample intervals differ")

    rows = []
    for label, metric, direction in [
            ("cpu_time_s", "cpu", "increase"),
            ("lpm_time_s", "lpm", "decrease"),
            ("tx_time_s", "tx", "increase"),
            ("rx_time_s", "rx", "increase"),
            ("avg_power_mw", "power", "increase")]:
        scale = 1e-6 if label.endswith("_s") else 1.0
        b = final_honest_mean(baseline, metric) * scale
        a = final_honest_mean(attacked, metric) * scale
        pct = percent_increase(b, a)
        if direction == "decrease":
            pct = -pct
        rows.append(CompareRow(label, b, a, pct, direction))

    b_cons = _mean([v * 100 for k, v in baseline.battery_consumed.items()
                    if k in set(baseline.honest_ids())])
    a_cons = _mean([v * 100 for k, v in attacked.battery_consumed.items()
                    if k in set(attacked.honest_ids())])
    if b_cons is not None and a_cons is not None and b_cons > 0:
        rows.append(CompareRow("battery_consumed_pct", b_cons, a_cons,
                               percent_increase(b_cons, a_cons), "increase"))
    scenario = baseline.scenario if baseline.scenario == attacked.scenario \
        else f"{baseline.scenario} vs {attacked.scenario}"
    return CompareReport(
        scenario=scenario,
        baseline_attack=baseline.attack,
        attacked_attack=attacked.attack,
        rows=rows)
