"""CLI verbs, exit codes, and stream discipline."""
from __future__ import annotations

import json

import pytest
from click.testing import CliRunner
from conftest import L1_CSV, make_closed_loop_csv

from procdyn.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, project_dir, *args):
    return runner.invoke(main, ["--project", str(project_dir), *args])


@pytest.fixture()
def l1_project(runner, tmp_path):
    csv_path = tmp_path / "events.csv"
    csv_path.write_text(L1_CSV, "utf-8")
    project_dir = tmp_path / "proj"
    result = invoke(runner, project_dir, "ingest", str(csv_path))
    assert result.exit_code == 0, result.output + result.stderr
    return project_dir


@pytest.fixture()
def loop_project(runner, tmp_path):
    csv_path = tmp_path / "loop.csv"
    csv_path.write_text(make_closed_loop_csv(), "utf-8")
    project_dir = tmp_path / "loop"
    invoke(runner, project_dir, "ingest", str(csv_path))
    invoke(runner, project_dir, "sdlog", "--window", "1h")
    return project_dir


def test_ingest_emits_artifact_ref(runner, tmp_path):
    csv_path = tmp_path / "events.csv"
    csv_path.write_text(L1_CSV, "utf-8")
    result = invoke(runner, tmp_path / "p", "ingest", str(csv_path))
    assert result.exit_code == 0
    ref = json.loads(result.stdout)
    assert ref["kind"] == "log"
    assert ref["file"] == "artifacts/log.csv"


def test_summary_prints_artifact_json(runner, l1_project):
    result = invoke(runner, l1_project, "summary")
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["num_events"] == 5
    assert report["num_cases"] == 3
    assert "wrote artifacts/summary.json" in result.stderr


def test_dfg(runner, l1_project):
    result = invoke(runner, l1_project, "dfg")
    assert json.loads(result.stdout)["edges"] == [
        {"source": "A", "target": "B", "count": 2}
    ]


def test_missing_project_exits_3_with_json_on_stderr(runner, tmp_path):
    result = invoke(runner, tmp_path / "nowhere", "summary")
    assert result.exit_code == 3
    assert result.stdout == ""
    err = json.loads(result.stderr)
    assert err["code"] == "missing_input"


def test_bad_window_is_usage_error(runner, l1_project):
    result = invoke(runner, l1_project, "sdlog", "--window", "fortnight")
    assert result.exit_code == 2


def test_unknown_command_is_usage_error(runner, tmp_path):
    result = invoke(runner, tmp_path, "transmogrify")
    assert result.exit_code == 2


def test_lenient_ingest(runner, tmp_path):
    csv_path = tmp_path / "partial.csv"
    csv_path.write_text(
        "case:concept:name,concept:name,org:resource,start_timestamp,time:timestamp\n"
        "c1,A,r1,2020-01-01T08:00:00Z,2020-01-01T08:05:00Z\n"
        "c2,B,r1,not-a-time,2020-01-01T09:00:00Z\n",
        "utf-8",
    )
    strict = invoke(runner, tmp_path / "p1", "ingest", str(csv_path))
    assert strict.exit_code == 3
    err = json.loads(strict.stderr)
    assert err["code"] == "step_failed"
    assert err["detail"]["cause"]["code"] == "bad_timestamp"
    lenient = invoke(runner, tmp_path / "p2", "ingest", str(csv_path), "--lenient")
    assert lenient.exit_code == 0


def test_windows_command(runner, loop_project):
    result = invoke(
        runner, loop_project, "windows", "--candidates", "1h,1d", "--model", "naive_last"
    )
    assert result.exit_code == 0
    stability = json.loads(result.stdout)
    assert {c["label"] for c in stability["candidates"]} == {"1h", "1d"}


def test_full_cli_chain(runner, loop_project, tmp_path):
    result = invoke(runner, loop_project, "relations")
    assert result.exit_code == 0
    candidates = json.loads(result.stdout)["candidates"]
    keys = {(c["source"], c["target"], c["lag"]) for c in candidates}
    assert ("arrival_rate", "finish_rate", 1) in keys

    detail = invoke(
        runner, loop_project, "detail",
        "--source", "arrival_rate", "--target", "finish_rate", "--lag", "1",
    )
    assert json.loads(detail.stdout)["fits"]["linear"]["slope"] == pytest.approx(
        1.0, abs=1e-9
    )

    select_path = tmp_path / "select.json"
    select_path.write_text(
        json.dumps(
            {"relations": [{"source": "arrival_rate", "target": "finish_rate", "lag": 1}]}
        ),
        "utf-8",
    )
    assert invoke(runner, loop_project, "cld", "--select", str(select_path)).exit_code == 0

    mapping_path = tmp_path / "mapping.json"
    mapping_path.write_text(json.dumps({"mapping": {}}), "utf-8")
    assert invoke(runner, loop_project, "sfd", "--mapping", str(mapping_path)).exit_code == 0

    fit = invoke(runner, loop_project, "fit")
    forms = {e["element"]: e["form"] for e in json.loads(fit.stdout)["equations"]}
    assert forms["finish_rate"] == "linear_form"

    simulate = invoke(runner, loop_project, "simulate")
    assert simulate.exit_code == 0
    assert json.loads(simulate.stdout)["kind"] == "trace"

    validate = invoke(runner, loop_project, "validate")
    report = json.loads(validate.stdout)
    assert {v["variable"]: v["verdict"] for v in report["variables"]} == {
        "finish_rate": "pass"
    }


def test_validate_variable_filter(runner, loop_project, tmp_path):
    select_path = tmp_path / "select.json"
    select_path.write_text(
        json.dumps([{"source": "arrival_rate", "target": "finish_rate", "lag": 1}]),
        "utf-8",
    )
    mapping_path = tmp_path / "mapping.json"
    mapping_path.write_text("{}", "utf-8")
    invoke(runner, loop_project, "relations")
    invoke(runner, loop_project, "cld", "--select", str(select_path))
    invoke(runner, loop_project, "sfd", "--mapping", str(mapping_path))
    invoke(runner, loop_project, "fit")
    invoke(runner, loop_project, "simulate", "--horizon", "30")
    result = invoke(
        runner, loop_project, "validate", "--variables", "arrival_rate,finish_rate"
    )
    report = json.loads(result.stdout)
    assert [v["variable"] for v in report["variables"]] == [
        "arrival_rate",
        "finish_rate",
    ]


def test_pipeline_command(runner, tmp_path):
    log_path = tmp_path / "loop.csv"
    log_path.write_text(make_closed_loop_csv(), "utf-8")
    selections_path = tmp_path / "selections.json"
    selections_path.write_text(
        json.dumps(
            {
                "relations": [
                    {"source": "arrival_rate", "target": "finish_rate", "lag": 1}
                ],
                "mapping": {},
            }
        ),
        "utf-8",
    )
    result = invoke(
        runner, tmp_path / "proj", "pipeline",
        "--log", str(log_path), "--selections", str(selections_path),
    )
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    verdicts = {v["variable"]: v["verdict"] for v in report["variables"]}
    assert verdicts == {"finish_rate": "pass"}
