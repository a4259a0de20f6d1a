import subprocess
import sys

import pytest

from rplsim.cli import main
from rplsim.scenario import preset_names


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "rplsim.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_simulate_missing_file_exits_1_and_names_path():
    proc = run_cli("simulate", "--scenario", "/no/such/file.scn")
    assert proc.returncode == 1
    assert "/no/such/file.scn" in proc.stderr


def test_simulate_duration_override_and_summary(tmp_path):
    out = tmp_path / "run.csv"
    proc = run_cli("simulate", "--scenario", "canonical7", "--seed", "1",
                   "--duration", "600", "--out", str(out))
    assert proc.returncode == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 7 * 60
    summary = proc.stdout.splitlines()
    assert sum(1 for l in summary if l.startswith("node ")) == 5
    assert sum(1 for l in summary if l.startswith("honest mean")) == 1


def test_compare_identical_files_zero_report(tmp_path):
    out = tmp_path / "run.csv"
    assert run_cli("simulate", "--scenario", "canonical7", "--duration", "300",
                   "--out", str(out)).returncode == 0
    proc = run_cli("compare", "--baseline", str(out), "--attack", str(out))
    assert proc.returncode == 0
    assert "negligible" in proc.stdout
    for line in proc.stdout.splitlines():
        if line and line[0].isalpha() and "%" in line:
            assert "0.0%" in line


def test_compare_mismatched_scenarios_exits_1(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli("simulate", "--scenario", "canonical7", "--duration", "120",
            "--out", str(a))
    run_cli("simulate", "--scenario", "stretch11", "--duration", "120",
            "--out", str(b))
    proc = run_cli("compare", "--baseline", str(a), "--attack", str(b))
    assert proc.returncode == 1


def test_sweep_unknown_battery_exits_1():
    proc = run_cli("sweep", "--scenario", "stretch11", "--batteries", "AA9")
    assert proc.returncode == 1
    assert "AA9" in proc.stderr


def test_sweep_grid_shape(tmp_path):
    out = tmp_path / "grid.csv"
    proc = run_cli("sweep", "--scenario", "stretch11",
                   "--batteries", "2xAAA,CR2032", "--duration", "300",
                   "--out", str(out))
    assert proc.returncode == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "battery,capacity_mah,attack,consumed_pct_mean,empty_nodes"
    assert len(rows) == 1 + 2 * 2          # two batteries x with/without

def test_presets_lists_every_shipped_scenario():
    proc = run_cli("presets")
    assert proc.returncode == 0
    listed = {line.split()[0] for line in proc.stdout.splitlines() if line}
    assert listed == set(preset_names())


def test_unknown_flag_rejected():
    assert main(["simulate", "--scenario", "canonical7", "--warp", "9"]) == 1
