from pathlib import Path

import orjson
import pytest
from click.testing import CliRunner
from unittest.mock import patch

from cli import cli
from execution.config import load_config
from execution.simulator import execute
from execution.trace_io import write_trace

ROOT = Path(__file__).resolve().parent.parent
GOALS = ROOT / "catalog" / "goals"

RELIABLE = "\n".join(
    f"[models.{name}]\nbase_duration_s = 4.0\nsuccess_prob = 1.0\n"
    for name in ("move", "pick_up", "put_down", "assemble_square", "assemble_cap", "fasten", "push")
)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def easy_run(easy_plans, runner, tmp_path):
    config = tmp_path / "reliable.toml"
    config.write_text("seed = 5\nplanning_time_override_s = 190.0\n\n" + RELIABLE)
    out_dir = tmp_path / "out"

    def fake_plan(goal, *args, **kwargs):
        return easy_plans[goal.goal_id]

    with patch("bench.protocol.plan", side_effect=fake_plan):
        result = runner.invoke(
            cli,
            [
                "run",
                "--class", "easy",
                "--catalog", str(ROOT / "catalog"),
                "--domains", str(ROOT / "domains"),
                "--config", str(config),
                "--out", str(out_dir),
            ],
        )
    assert result.exit_code == 0, result.output
    return out_dir, result


def test_run_prints_the_class_summary(easy_run):
    _, result = easy_run
    lines = result.output.strip().splitlines()
    assert any(line.startswith("easy-1: 100.0%") for line in lines)
    assert any(line.startswith("easy: 100.0%") for line in lines)


def test_report_agrees_with_its_traces(easy_run, runner):
    out_dir, _ = easy_run
    result = runner.invoke(cli, ["report", "--in", str(out_dir)])
    assert result.exit_code == 0


def test_tampered_report_fails(easy_run, runner):
    out_dir, _ = easy_run
    path = out_dir / "report.json"
    document = orjson.loads(path.read_bytes())
    document["summary"]["mean_time_s"] += 1.0
    path.write_bytes(orjson.dumps(document))
    result = runner.invoke(cli, ["report", "--in", str(out_dir)])
    assert result.exit_code == 1
    assert "SUMMARY_MISMATCH" in result.output


def test_report_of_a_missing_directory_is_an_io_failure(runner, tmp_path):
    result = runner.invoke(cli, ["report", "--in", str(tmp_path / "absent")])
    assert result.exit_code == 2


def test_replay_prints_a_csv(easy_plans, catalog, runner, tmp_path):
    fine_plan, _ = easy_plans["easy-1"]
    config = load_config(ROOT / "configs" / "baseline_emulation.toml")
    trace = execute(fine_plan, catalog.goal("easy-1"), catalog, config)
    path = tmp_path / "easy-1-r1.jsonl"
    write_trace(trace, path)
    result = runner.invoke(
        cli, ["replay", "--trace", str(path), "--goal", str(GOALS / "easy-1.xml")]
    )
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert lines[0] == "time_s,completion_pct"
    assert lines[1] == "0.0,0.0"


def test_plan_of_a_missing_goal_file(runner, tmp_path):
    result = runner.invoke(
        cli,
        [
            "plan",
            "--goal", str(tmp_path / "nope.xml"),
            "--catalog", str(ROOT / "catalog"),
            "--domains", str(ROOT / "domains"),
            "--out", str(tmp_path / "plan.json"),
        ],
    )
    assert result.exit_code == 2


def test_plan_writes_a_plan_file(runner, tmp_path):
    out = tmp_path / "plan.json"
    result = runner.invoke(
        cli,
        [
            "plan",
            "--goal", str(GOALS / "easy-1.xml"),
            "--catalog", str(ROOT / "catalog"),
            "--domains", str(ROOT / "domains"),
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    document = orjson.loads(out.read_bytes())
    assert document["goal_id"] == "easy-1"
    assert sum(1 for a in document["actions"] if a["action"] == "fasten") == 3
