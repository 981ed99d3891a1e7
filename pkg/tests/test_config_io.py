import csv
from pathlib import Path

import pytest
import yaml

from constrained_lq.config import (config_to_dict, dump_config, load_config, parse_config,
                                   scenario_from_config)
from constrained_lq.controller import backward_pass
from constrained_lq.errors import ConfigParseError, ValidationError
from constrained_lq.export import (write_bench, write_gains, write_summary, write_summary_steps,
                                   write_trajectory, write_value_log)
from constrained_lq.model import HARD, Mode
from constrained_lq.simulator import monte_carlo, rollout

from helpers import identity_scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("name", ["hard.yaml", "intermittent.yaml", "switched.yaml", "csv_solar.yaml"])
def test_round_trip(name):
    cfg = load_config(SCENARIOS / name)
    again = parse_config(dump_config(cfg), base_dir=cfg.base_dir)
    assert again == cfg
    assert config_to_dict(again) == config_to_dict(cfg)
    raw = yaml.safe_load((SCENARIOS / name).read_text())
    dumped = config_to_dict(cfg)
    for key in ("agents", "seed", "horizon", "classes"):
        if key in raw:
            assert dumped[key] == raw[key]


def test_shipped_scenarios_build():
    sc = scenario_from_config(load_config(SCENARIOS / "hard.yaml"))
    assert sc.fleet.n_tot == 50 and sc.horizon == 24
    sc = scenario_from_config(load_config(SCENARIOS / "csv_solar.yaml"))
    assert sc.fleet.n_tot == 10 and sc.horizon == 24
    assert sc.schedule.hard_steps()


def test_empty_horizon_rejected():
    with pytest.raises(ValidationError, match="empty horizon"):
        parse_config("agents: 3\nhorizon: 0\nsolar: {daylight: [0, 0]}\n")


@pytest.mark.parametrize("text, field", [
    ("agents: 3\nhorizon: 4\nweights: {r: abc}\n", "weights.r"),
    ("agents: 3\nhorizon: 4\nbogus: 1\n", "bogus"),
    ("horizon: 4\n", "agents"),
    ("agents: 2.5\nhorizon: 4\n", "agents"),
    ("agents: 3\nhorizon: 4\nfleet: {a_range: [1]}\n", "fleet.a_range"),
])
def test_malformed_config_names_field(text, field):
    with pytest.raises(ConfigParseError) as exc:
        parse_config(text)
    assert exc.value.field == field
    assert field in str(exc.value)


def test_yaml_syntax_error_has_line():
    with pytest.raises(ConfigParseError) as exc:
        parse_config("agents: 3\nhorizon: [4\n")
    assert exc.value.line is not None


def test_validation_names_invariant():
    with pytest.raises(ValidationError) as exc:
        parse_config("agents: 3\nhorizon: 24\nweights: {r: 0}\n")
    assert "R positive definite" in str(exc.value)


def _header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def _golden(name):
    return (GOLDEN / name).read_text().strip().split(",")


def test_golden_headers(tmp_path):
    sc = identity_scenario(2, [HARD, Mode.soft(1.0)], [1.0, 0.0], w=0.5)
    sc = sc.__class__(sc.fleet, sc.cost, sc.schedule, sc.x0, 0, ("alpha", "beta"))
    gs = backward_pass(sc)
    rec = rollout(sc, gs, seed=0)
    summary = monte_carlo(sc, gs, 3, workers=1)
    assert _header(write_gains(tmp_path / "g.csv", gs)) == _golden("gains_2x2.header")
    assert _header(write_value_log(tmp_path / "v.csv", gs)) == _golden("value_log.header")
    assert _header(write_trajectory(tmp_path / "t.csv", sc, rec.states, rec.inputs, rec.step_costs)) \
        == _golden("trajectory_2x2.header")
    assert _header(write_summary(tmp_path / "s.csv", summary)) == _golden("summary.header")
    assert _header(write_summary_steps(tmp_path / "ss.csv", summary)) == _golden("summary_steps_ab.header")
    assert _header(write_bench(tmp_path / "b.csv", [])) == _golden("bench.header")


def test_trajectory_terminal_row_has_empty_input_cells(tmp_path):
    sc = identity_scenario(2, [HARD], [1.0])
    rec = rollout(sc, backward_pass(sc), seed=0)
    with open(write_trajectory(tmp_path / "t.csv", sc, rec.states, rec.inputs, rec.step_costs)) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert rows[1]["u_0"] == "" and rows[1]["residual"] == ""
    assert float(rows[1]["step_cost"]) == pytest.approx(rec.step_costs[1])
    assert float(rows[0]["total_input"]) == pytest.approx(1.0, abs=1e-12)
