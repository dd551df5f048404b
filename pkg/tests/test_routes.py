from pathlib import Path

import pytest
from unittest.mock import patch
from fastapi.testclient import TestClient

from execution.config import parse_config
from execution.simulator import execute
from execution.trace_io import trace_bytes
from main import app
from routes.plans import workcell
from settings import get_settings

ROOT = Path(__file__).resolve().parent.parent

SKILLS = ("move", "pick_up", "put_down", "assemble_square", "assemble_cap", "fasten", "push")

RELIABLE_TOML = """
seed = 3
planning_time_override_s = 190.0

[models.move]
base_duration_s = 3.0
success_prob = 1.0

[models.pick_up]
base_duration_s = 6.0
success_prob = 1.0

[models.put_down]
base_duration_s = 5.0
success_prob = 1.0

[models.assemble_square]
base_duration_s = 25.0
success_prob = 1.0

[models.assemble_cap]
base_duration_s = 30.0
success_prob = 1.0

[models.fasten]
base_duration_s = 30.0
success_prob = 1.0

[models.push]
base_duration_s = 8.0
success_prob = 1.0
"""


@pytest.fixture
def client(monkeypatch, tmp_path):
    monkeypatch.setenv("RAMP_CATALOG", str(ROOT / "catalog"))
    monkeypatch.setenv("RAMP_DOMAINS", str(ROOT / "domains"))
    monkeypatch.setenv("RAMP_RESULTS_ROOT", str(tmp_path))
    get_settings.cache_clear()
    workcell.cache_clear()
    yield TestClient(app)
    get_settings.cache_clear()
    workcell.cache_clear()


@pytest.fixture
def cached_plan(easy_plans):
    def fake_plan(goal, *args, **kwargs):
        return easy_plans[goal.goal_id]

    with patch("bench.protocol.plan", side_effect=fake_plan):
        yield


def test_plan_a_catalog_goal(client, easy_plans):
    response = client.post("/plan", json={"goal_id": "easy-1"})
    assert response.status_code == 200
    body = response.json()
    fine_plan, _ = easy_plans["easy-1"]
    assert body["goal_id"] == "easy-1"
    assert [a["text"] for a in body["actions"]][-1].startswith("fasten(")
    assert len(body["actions"]) == len(fine_plan.flattened)
    assert body["stats"]["coarse_horizon"] == 24


def test_plan_an_unknown_goal(client):
    response = client.post("/plan", json={"goal_id": "easy-9"})
    assert response.status_code == 404
    assert response.json()["code"] == "UNKNOWN_GOAL"


def test_plan_needs_a_goal(client):
    response = client.post("/plan", json={})
    assert response.status_code == 422
    assert response.json()["code"] == "MISSING_GOAL"


def test_plan_rejects_broken_xml(client):
    response = client.post("/plan", json={"goal_xml": "<assembly id='x'"})
    assert response.status_code == 422
    assert response.json()["code"] == "PARSE_ERROR"


def test_replay_a_trace(client, easy_plans, catalog):
    fine_plan, _ = easy_plans["easy-1"]
    config = parse_config(
        {
            "seed": 1,
            "planning_time_override_s": 190.0,
            "models": {
                name: {"base_duration_s": 2.0, "success_prob": 1.0}
                for name in SKILLS
            },
        }
    )
    trace = execute(fine_plan, catalog.goal("easy-1"), catalog, config)
    response = client.post(
        "/replay", json={"goal_id": "easy-1", "trace": trace_bytes(trace).decode("utf-8")}
    )
    assert response.status_code == 200
    curve = response.json()["curve"]
    assert curve[0] == {"t_s": 0.0, "completion_pct": 0.0}
    assert curve[-1]["completion_pct"] == 100.0
    assert len(curve) == 4


def test_replay_rejects_a_malformed_trace(client):
    response = client.post("/replay", json={"goal_id": "easy-1", "trace": "{}\n{}\n"})
    assert response.status_code == 422
    assert response.json()["code"] == "MALFORMED_TRACE"


def test_run_then_report(client, cached_plan, tmp_path):
    out_dir = tmp_path / "easy"
    response = client.post(
        "/run",
        json={"assembly_class": "easy", "out_dir": str(out_dir), "config_toml": RELIABLE_TOML},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["summary"]["mean_success_pct"] == 100.0
    assert [g["goal_id"] for g in body["goals"]] == ["easy-1", "easy-2", "easy-3"]
    assert body["seed"] == 3

    response = client.get("/report", params={"directory": str(out_dir)})
    assert response.status_code == 200
    assert response.json()["agree"] is True


def test_run_with_a_broken_config(client, tmp_path):
    response = client.post(
        "/run",
        json={"assembly_class": "easy", "out_dir": str(tmp_path), "config_toml": "seed = 1\n"},
    )
    assert response.status_code == 422
    assert response.json()["code"] == "CONFIG_ERROR"


def test_report_of_a_missing_directory(client, tmp_path):
    response = client.get("/report", params={"directory": str(tmp_path / "absent")})
    assert response.status_code == 404
    assert response.json()["code"] == "MISSING_FILE"


def test_run_directory_is_relative_to_the_results_root(client, cached_plan, tmp_path):
    response = client.post(
        "/run",
        json={"assembly_class": "easy", "out_dir": "nested/easy", "config_toml": RELIABLE_TOML},
    )
    assert response.status_code == 200
    assert (tmp_path / "nested" / "easy" / "report.json").is_file()

    response = client.get("/report", params={"directory": "nested/easy"})
    assert response.status_code == 200
    assert response.json()["agree"] is True


@pytest.mark.parametrize("escape", ["../outside", "/etc", "nested/../../outside"])
def test_run_outside_the_results_root_is_refused(client, escape, tmp_path):
    response = client.post(
        "/run",
        json={"assembly_class": "easy", "out_dir": escape, "config_toml": RELIABLE_TOML},
    )
    assert response.status_code == 403
    assert response.json()["code"] == "PATH_FORBIDDEN"
    assert not (tmp_path.parent / "outside").exists()


def test_report_outside_the_results_root_is_refused(client):
    response = client.get("/report", params={"directory": "../"})
    assert response.status_code == 403
    assert response.json()["code"] == "PATH_FORBIDDEN"


def test_run_uses_the_shipped_baseline_from_any_directory(
    client, cached_plan, monkeypatch, tmp_path
):
    monkeypatch.chdir(tmp_path)
    response = client.post("/run", json={"assembly_class": "easy", "out_dir": "baseline"})
    assert response.status_code == 200
    assert response.json()["seed"] == 7
    assert (tmp_path / "baseline" / "report.json").is_file()
