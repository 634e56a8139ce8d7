import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from wban_ee import cli
from wban_ee.cli import CSV_COLUMNS, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from wban_ee.config import load_config
from wban_ee.errors import ParseError, ValidationError

DATA = Path(__file__).parent / "data"


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_defaults(tmp_path):
    sc, cfg = load_config(write(tmp_path, {"activity": "relaxing"}))
    assert sc.n == 10
    assert sc.tau == 5.0 and sc.slots == 50
    assert sc.activity.name == "relaxing" and sc.activity.sigma_s == 0.0
    for s in sc.sensors:
        assert (s.e_ini, s.e_max, s.e_min) == (0.1, 0.11, 0.01)
        assert (s.psi, s.theta, s.zeta) == (2e-8, 6e-8, 8e-8)
        assert 0.3 <= s.d <= 0.7 and 1.4 <= s.mp <= 4.4
    assert cfg.methods == ["optimal", "sweep"] and cfg.seeds == [1]


def test_sigma_defaults(tmp_path):
    assert load_config(write(tmp_path, {"activity": "walking"}))[0].activity.sigma_s == 2.15
    assert load_config(write(tmp_path, {"activity": "running"}))[0].activity.sigma_s == 3.49


def test_empty_file_means_defaults(tmp_path):
    sc, _ = load_config(write(tmp_path, ""))
    assert sc.n == 10 and sc.activity.name == "relaxing"


def test_override_n(tmp_path):
    sc, _ = load_config(write(tmp_path, {"n_sensors": 2}))
    assert sc.n == 2
    assert sc.sensors[0].e_ini == 0.1 and sc.tau == 5.0


def test_battery_bounds_error(tmp_path):
    with pytest.raises(ValidationError, match="battery bounds"):
        load_config(write(tmp_path, {"sensor": {"e_min_J": 0.2, "e_max_J": 0.11}}))


def test_parse_error_has_location(tmp_path):
    with pytest.raises(ParseError, match=r":3:1:"):
        load_config(write(tmp_path, '{\n "slots": 3,\n}'))


@pytest.mark.parametrize(
    "cfg,match",
    [
        ({"slot": 3}, "unknown field"),
        ({"sensor": {"e_max": 0.1}}, r"sensor: unknown field"),
        ({"slots": "ten"}, "slots must be an integer"),
        ({"activity": "swimming"}, "activity"),
        ({"run": {"methods": ["greedy"]}}, "unknown method"),
        ({"run": {"methods": []}}, "at least one method"),
        ({"harvest": {"states": ["a", "b", "c"]}}, "3 states"),
        ({"harvest": {"transition": [[0.5, 0.4], [0.5, 0.5]]}}, "sum to 1"),
        ({"n_sensors": 2, "distances_m": [0.5]}, "distances_m"),
        ({"overflow_policy": "spill"}, "overflow_policy"),
    ],
)
def test_validation_errors(tmp_path, cfg, match):
    with pytest.raises(ValidationError, match=match):
        load_config(write(tmp_path, cfg))


def test_explicit_harvest_chain(tmp_path):
    sc, _ = load_config(write(tmp_path, {
        "n_sensors": 2,
        "harvest": {"states": ["low", "mid", "high"], "transition": [[0.5, 0.5, 0], [0.2, 0.6, 0.2], [0, 0.5, 0.5]],
                    "rates_mW": [1, 2, 4]},
        "distances_m": [0.4, 0.6],
    }))
    assert sc.chains[0].states == ("low", "mid", "high")
    np.testing.assert_allclose(sc.chains[1].rates, [1e-3, 2e-3, 4e-3])
    assert [s.d for s in sc.sensors] == [0.4, 0.6]


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "nope.json")


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_csvs_and_summary(tmp_path):
    cfg = write(tmp_path, {"n_sensors": 3, "slots": 6, "activity": "walking"})
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--methods", "optimal,sweep", "--seeds", "1"]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["optimal_seed1.csv", "summary.json", "sweep_seed1.csv"]
    with open(out / "optimal_seed1.csv") as fh:
        assert fh.readline().strip() == ",".join(CSV_COLUMNS)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reference_method"] == "optimal"
    assert len(summary["ee_ratio_per_slot"]["1"]["sweep"]) == 6


def test_summary_matches_csv(tmp_path):
    cfg = write(tmp_path, {"n_sensors": 4, "slots": 8, "activity": "running"})
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--methods", "optimal,baseline", "--seeds", "3,4"]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["runs"]) == 4
    for run in summary["runs"]:
        rows = read_rows(out / run["csv"])
        assert {r["method"] for r in rows} == {run["method"]}
        per_slot = {}
        for r in rows:
            per_slot[int(r["slot"])] = float(r["network_ee_bpJ"])
        ee = [per_slot[t] for t in sorted(per_slot)]
        assert run["slots"] == len(ee)
        assert run["mean_ee_bpJ"] == math.fsum(ee) / len(ee)
        assert run["min_ee_bpJ"] == min(ee) and run["max_ee_bpJ"] == max(ee)
        assert run["total_overflow_J"] == math.fsum(float(r["overflow_J"]) for r in rows)
        assert run["depletion_events"] == sum(float(r["power_W"]) == 0.0 for r in rows)
        assert run["ee_per_slot"] == ee


def test_repeat_is_byte_identical(tmp_path):
    cfg = write(tmp_path, {"n_sensors": 3, "slots": 5, "activity": "walking"})
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", str(cfg), "--out", str(out), "--methods", "optimal,sweep,baseline", "--seeds", "1,2"]) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_parallel_jobs_match_serial(tmp_path):
    cfg = write(tmp_path, {"n_sensors": 3, "slots": 4, "activity": "running"})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--out", str(a), "--seeds", "1,2"]) == 0
    assert main(["run", str(cfg), "--out", str(b), "--seeds", "1,2", "--jobs", "2"]) == 0
    for p in a.glob("*.csv"):
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_golden_file(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(DATA / "golden.json"), "--out", str(out)]) == EXIT_OK
    assert (out / "optimal_seed7.csv").read_bytes() == (DATA / "golden_optimal_seed7.csv").read_bytes()


def test_exhaustive_cap_rejected_before_simulation(tmp_path, monkeypatch, capsys):
    called = []
    monkeypatch.setattr(cli, "run_scenario", lambda *a, **k: called.append(1))
    cfg = write(tmp_path, {"n_sensors": 20})
    assert main(["run", str(cfg), "--methods", "exhaustive", "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not called
    assert "exhaustive" in capsys.readouterr().err


def test_cli_overrides(tmp_path):
    cfg = write(tmp_path, {"n_sensors": 2})
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--slots", "3", "--activity", "running",
                 "--methods", "sweep", "--seeds", "9"]) == 0
    rows = read_rows(out / "sweep_seed9.csv")
    assert len(rows) == 6
    assert any(float(r["shadow_factor"]) != 1.0 for r in rows)


def test_runtime_error_exit_code(tmp_path, monkeypatch, capsys):
    from wban_ee.errors import InfeasibleSlot

    def boom(sc):
        raise InfeasibleSlot("slot 0: bad bounds")

    monkeypatch.setattr(cli, "run_scenario", boom)
    cfg = write(tmp_path, {"n_sensors": 2, "slots": 2})
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_RUNTIME
    assert "slot 0" in capsys.readouterr().err


def test_validate_command(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, {"n_sensors": 4}))]) == EXIT_OK
    assert "ok: 4 sensors" in capsys.readouterr().out
    assert main(["validate", str(write(tmp_path, "{oops"))]) == EXIT_CONFIG


def test_steady_state_command(tmp_path, capsys):
    cfg = write(tmp_path, {"n_sensors": 3, "activity": "walking"})
    assert main(["steady-state", str(cfg)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "sensor,pi,g_avg_W"
    assert len(lines) == 4
    sc, _ = load_config(cfg)
    for line, chain in zip(lines[1:], sc.chains):
        _, pi, g = line.split(",")
        pi = [float(x) for x in pi.split()]
        p_up, p_down = chain.transition[0, 1], chain.transition[1, 0]
        assert pi[0] == pytest.approx(p_down / (p_up + p_down), abs=1e-12)
        assert float(g) == pytest.approx(pi[0] * 1e-3 + pi[1] * 3e-3, rel=1e-12)


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 6e-08, 34935036.20075423, 0.0):
        assert float(cli.fmt(v)) == v
    assert cli.fmt(np.float64(0.1)) == "0.1"
    assert cli.fmt(7) == "7"
