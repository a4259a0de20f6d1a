import pytest
from hypothesis import given, strategies as st

from rplsim.kernel import seconds
from rplsim.metrics import (CSV_COLUMNS, InvalidArgs, NodeSample,
                            NoHonestNodes, PacketCounters, RunMetrics,
                            ScenarioMismatch, ZeroBaseline, compare_report,
                            expected_drop_fraction, honest_mean,
                            percent_increase, read_csv, write_csv)
from rplsim.runner import run_scenario
from rplsim.scenario import load_preset


def sample(t, node, role, **kw):
    base = dict(t_cpu=0, t_lpm=t, t_tx=0, t_rx=0, energy_mj=0.0, power_mw=0.0,
                soc=None, sent=0, app_rx=0, dropped=0)
    base.update(kw)
    return NodeSample(t=t, node=node, role=role, **base)


def toy_metrics(tx_values, t=seconds(10)):
    samples = [sample(t, i + 2, "honest", t_tx=v)
               for i, v in enumerate(tx_values)]
    samples.append(sample(t, 1, "server", t_tx=999))
    roles = {s.node: s.role for s in samples}
    return RunMetrics(scenario="toy", attack="none", seed=1, duration=t,
                      sample_interval=t, roles=roles, samples=samples)


def test_honest_mean_symmetry():
    m = toy_metrics([5, 5, 5])
    assert honest_mean(m, "tx") == [(seconds(10), 5.0)]


def test_honest_mean_simple_average_excludes_server():
    m = toy_metrics([seconds(1), seconds(2), seconds(3), seconds(4), seconds(5)])
    assert honest_mean(m, "tx")[-1][1] == seconds(3)


def test_honest_mean_requires_honest_nodes():
    m = toy_metrics([1])
    m.roles = {1: "server", 2: "malicious"}
    with pytest.raises(NoHonestNodes):
        honest_mean(m, "tx")


def test_honest_mean_commutes_with_truncation():
    m = run_scenario(load_preset("canonical7"), duration=seconds(300))
    full = honest_mean(m, "rx")
    cut = seconds(120)
    m.samples = [s for s in m.samples if s.t <= cut]
    prefix = honest_mean(m, "rx")
    assert prefix == [p for p in full if p[0] <= cut]


# percent changes against the reference comparison table
def test_percent_increase_reference_rows():
    assert percent_increase(9.202, 44.726) == pytest.approx(386.0, abs=0.1)
    assert percent_increase(9.202, 105.834) == pytest.approx(1050.1, abs=0.1)


def test_percent_increase_identity_and_inverse():
    assert percent_increase(7.0, 7.0) == 0.0
    with pytest.raises(ZeroBaseline):
        percent_increase(0.0, 5.0)


@given(st.floats(0.001, 1e6), st.floats(-99.0, 1e4))
def test_percent_increase_roundtrip(x, p):
    assert percent_increase(x, x * (1 + p / 100)) == pytest.approx(p, abs=1e-6)


def test_expected_drop_fraction_values():
    assert expected_drop_fraction(4, 5, 1.0) == pytest.approx(0.80)
    assert expected_drop_fraction(0, 5, 0.7) == 0.0
    assert expected_drop_fraction(2, 5, 0.5) == pytest.approx(0.20)


def test_expected_drop_fraction_validation():
    for k, n, r in ((-1, 5, 0.5), (6, 5, 0.5), (1, 0, 0.5), (1, 5, 1.5)):
        with pytest.raises(InvalidArgs):
            expected_drop_fraction(k, n, r)


@given(st.integers(1, 20), st.floats(0, 1))
def test_expected_drop_fraction_linear(n, r):
    for k in range(n + 1):
        assert expected_drop_fraction(k, n, r) == pytest.approx(
            k * expected_drop_fraction(1, n, r))


def test_expected_drop_fraction_brute_force_oracle():
    # equal-rate senders, seeded RNG: simulate the dropping decision directly
    import random
    rng = random.Random(7)
    k, n, r = 2, 5, 0.5
    rounds = 40_000
    dropped = sum(1 for i in range(rounds)
                  if i % n < k and rng.random() < r)
    assert dropped / rounds == pytest.approx(expected_drop_fraction(k, n, r),
                                             abs=0.01)


def test_packet_conservation_identity():
    c = PacketCounters(sent=10, delivered_app=6, dropped_attacker=3,
                       in_flight=1)
    assert c.conserved()
    c.sent = 11
    assert not c.conserved()


# ----------------------------------------------------------------------
# CSV

def test_write_csv_deterministic_and_schema(tmp_path):
    m = run_scenario(load_preset("canonical7"), duration=seconds(120))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(m, p1)
    write_csv(run_scenario(load_preset("canonical7"), duration=seconds(120)), p2)
    assert p1.read_bytes() == p2.read_bytes()
    header, first, *_ = p1.read_text().splitlines()
    assert header.split(",") == CSV_COLUMNS
    assert "\r" not in p1.read_text()


def test_csv_row_count_matches_grid(tmp_path):
    m = run_scenario(load_preset("canonical7"), duration=seconds(120))
    p = tmp_path / "a.csv"
    write_csv(m, p)
    lines = p.read_text().splitlines()
    assert len(lines) == 1 + 7 * 12        # header + nodes x samples


def test_csv_soc_empty_for_infinite_power(tmp_path):
    m = run_scenario(load_preset("canonical7"), duration=seconds(60))
    p = tmp_path / "a.csv"
    write_csv(m, p)
    import csv as csvmod
    with open(p) as fh:
        for row in csvmod.DictReader(fh):
            if row["role"] in ("server", "malicious"):
                assert row["soc_pct"] == ""
            else:
                assert row["soc_pct"] != ""


def test_csv_roundtrip_preserves_samples(tmp_path):
    m = run_scenario(load_preset("canonical7"), duration=seconds(120))
    p = tmp_path / "a.csv"
    write_csv(m, p)
    back = read_csv(p)
    assert back.scenario == m.scenario and back.seed == m.seed
    assert back.roles == m.roles
    assert len(back.samples) == len(m.samples)
    assert honest_mean(back, "tx") == honest_mean(m, "tx")


# ----------------------------------------------------------------------
# comparison report

def test_compare_baseline_with_itself_all_zero(tmp_path):
    m = run_scenario(load_preset("canonical7"), duration=seconds(300))
    p = tmp_path / "a.csv"
    write_csv(m, p)
    report = compare_report(read_csv(p), read_csv(p))
    assert report.rows
    for row in report.rows:
        assert row.change_pct == 0.0
        assert row.negligible


def test_compare_mismatched_scenarios_rejected():
    a = run_scenario(load_preset("canonical7"), duration=seconds(60))
    b = run_scenario(load_preset("stretch11"), duration=seconds(60))
    with pytest.raises(ScenarioMismatch):
        compare_report(a, b)


def test_compare_selective_forwarding_all_negligible():
    base = run_scenario(load_preset("canonical7"), duration=seconds(1800))
    atk = run_scenario(load_preset("canonical7_selective"),
                       duration=seconds(1800))
    report = compare_report(base, atk)
    for row in report.rows:
        assert row.negligible, row


def test_compare_versioning_cpu_dominates_floods():
    base = run_scenario(load_preset("canonical7"), duration=seconds(1800))
    cpu = {}
    for preset in ("canonical7_version", "canonical7_hello"):
        atk = run_scenario(load_preset(preset), duration=seconds(1800))
        report = compare_report(base, atk)
        cpu[preset] = next(r.change_pct for r in report.rows
                           if r.metric == "cpu_time_s")
    assert cpu["canonical7_version"] > cpu["canonical7_hello"]


def test_report_text_and_csv_render(tmp_path):
    base = run_scenario(load_preset("canonical7"), duration=seconds(300))
    report = compare_report(base, base)
    text = report.format_text()
    assert "metric" in text and "negligible" in text
    out = tmp_path / "r.csv"
    report.to_csv(out)
    assert out.read_text().startswith("metric,baseline,attacked")
