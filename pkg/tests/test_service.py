"""HTTP API: endpoint envelopes, error mapping, artifact downloads."""
from __future__ import annotations

import json

import pytest
from conftest import L1_CSV, make_closed_loop_csv
from fastapi.testclient import TestClient

from procdyn.service import create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "projects")
    with TestClient(app) as c:
        yield c


def make_project(client, pid="p1"):
    response = client.post("/api/projects", json={"id": pid})
    assert response.status_code == 201
    return pid


def test_create_list_and_duplicate(client):
    assert client.get("/api/projects").json() == {"projects": []}
    make_project(client, "alpha")
    make_project(client, "beta")
    listing = client.get("/api/projects").json()
    assert listing == {"projects": [{"id": "alpha"}, {"id": "beta"}]}
    dup = client.post("/api/projects", json={"id": "alpha"})
    assert dup.status_code == 400
    assert dup.json()["code"] == "bad_request"


def test_bad_project_ids_rejected(client):
    assert client.post("/api/projects", json={"id": "has space"}).status_code == 400
    assert client.get("/api/projects/has%20space/summary").status_code == 400
    assert client.get("/api/projects/ghost/summary").status_code == 404


def test_post_log_raw_and_json(client):
    pid = make_project(client)
    raw = client.post(f"/api/projects/{pid}/log", content=L1_CSV.encode())
    assert raw.status_code == 200
    ref = raw.json()["artifact"]
    assert ref["kind"] == "log"
    assert ref["version"] == 1
    again = client.post(
        f"/api/projects/{pid}/log", json={"csv": L1_CSV, "strict": True}
    )
    assert again.json()["artifact"]["version"] == 2


def test_summary_and_dfg_compute_on_first_get(client):
    pid = make_project(client)
    client.post(f"/api/projects/{pid}/log", content=L1_CSV.encode())
    summary = client.get(f"/api/projects/{pid}/summary").json()
    assert summary["num_events"] == 5
    assert summary["num_cases"] == 3
    dfg = client.get(f"/api/projects/{pid}/dfg").json()
    assert dfg["edges"] == [{"source": "A", "target": "B", "count": 2}]
    # repeat GETs reuse the stored artifact instead of appending versions
    client.get(f"/api/projects/{pid}/summary")
    artifact = client.get(f"/api/projects/{pid}/artifacts/summary")
    assert "summary-v2" not in artifact.headers.get("content-disposition", "")


def test_summary_before_log_is_404(client):
    pid = make_project(client)
    response = client.get(f"/api/projects/{pid}/summary")
    assert response.status_code == 404
    body = response.json()
    assert body["code"] == "missing_input"
    assert body["detail"] == {"artifact": "log"}


def test_sdlog_reports_both_artifacts(client):
    pid = make_project(client)
    client.post(f"/api/projects/{pid}/log", content=L1_CSV.encode())
    response = client.post(
        f"/api/projects/{pid}/sdlog", json={"window": "1h", "aspect": "general"}
    )
    body = response.json()
    assert body["artifact"]["kind"] == "sdlog_all"
    assert body["active_artifact"]["kind"] == "sdlog_active"


def test_windows_envelope(client):
    pid = make_project(client)
    client.post(f"/api/projects/{pid}/log", content=make_closed_loop_csv().encode())
    response = client.post(
        f"/api/projects/{pid}/windows",
        json={"candidates": ["1h", "1d"], "model": "naive_last"},
    )
    stability = response.json()["stability"]
    labels = {c["label"] for c in stability["candidates"]}
    assert labels == {"1h", "1d"}
    assert stability["ranking"]


def test_relations_round_trip_and_step_failure(client):
    pid = make_project(client)
    client.post(f"/api/projects/{pid}/log", content=L1_CSV.encode())
    client.post(f"/api/projects/{pid}/sdlog", json={"window": "1h"})
    failed = client.post(f"/api/projects/{pid}/relations", json={})
    assert failed.status_code == 422
    assert failed.json()["code"] == "step_failed"
    assert failed.json()["detail"]["cause"]["code"] == "too_few_steps"


@pytest.fixture()
def loop_client(client):
    pid = make_project(client, "loop")
    client.post(f"/api/projects/{pid}/log", content=make_closed_loop_csv().encode())
    client.post(f"/api/projects/{pid}/sdlog", json={"window": "1h"})
    return client, pid


def test_full_http_chain(loop_client):
    client, pid = loop_client
    posted = client.post(f"/api/projects/{pid}/relations", json={}).json()
    keys = {
        (c["source"], c["target"], c["lag"]) for c in posted["relations"]["candidates"]
    }
    assert ("arrival_rate", "finish_rate", 1) in keys
    stored = client.get(f"/api/projects/{pid}/relations").json()
    assert stored == posted["relations"]

    detail = client.post(
        f"/api/projects/{pid}/pair-detail",
        json={"source": "arrival_rate", "target": "finish_rate", "lag": 1},
    ).json()
    assert detail["fits"]["linear"]["slope"] == pytest.approx(1.0, abs=1e-9)

    cld = client.post(
        f"/api/projects/{pid}/cld",
        json={
            "selections": [
                {"source": "arrival_rate", "target": "finish_rate", "lag": 1}
            ]
        },
    ).json()
    assert [n for n in cld["cld"]["nodes"]] == ["arrival_rate", "finish_rate"]

    sfd = client.post(f"/api/projects/{pid}/sfd", json={"mapping": {}}).json()
    assert set(sfd["sfd"]["auxiliaries"]) == {"arrival_rate", "finish_rate"}

    fit = client.post(f"/api/projects/{pid}/fit", json={}).json()
    forms = {e["element"]: e["form"] for e in fit["equations"]["equations"]}
    assert forms == {"arrival_rate": "replay", "finish_rate": "linear_form"}

    trace = client.post(f"/api/projects/{pid}/simulate", json={}).json()["trace"]
    assert set(trace["values"]) == {"arrival_rate", "finish_rate"}

    report = client.post(f"/api/projects/{pid}/validate", json={}).json()["report"]
    verdicts = {v["variable"]: v["verdict"] for v in report["variables"]}
    assert verdicts == {"finish_rate": "pass"}


def test_validate_before_simulate_is_404(loop_client):
    client, pid = loop_client
    response = client.post(f"/api/projects/{pid}/validate", json={})
    assert response.status_code == 404
    assert response.json()["detail"] == {"artifact": "trace"}


def test_pair_detail_unknown_variable_is_422(loop_client):
    client, pid = loop_client
    response = client.post(
        f"/api/projects/{pid}/pair-detail",
        json={"source": "nope", "target": "finish_rate"},
    )
    assert response.status_code == 422
    assert response.json()["code"] == "unknown_variable"


def test_artifact_download(loop_client):
    client, pid = loop_client
    response = client.get(f"/api/projects/{pid}/artifacts/sdlog_all")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/csv")
    assert response.content.decode().splitlines()[0].startswith("step_start,active,")
    assert client.get(f"/api/projects/{pid}/artifacts/trace").status_code == 404
    assert client.get(f"/api/projects/{pid}/artifacts/blueprints").status_code == 404


def test_ui_mount(tmp_path):
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<h1>ui</h1>", "utf-8")
    app = create_app(tmp_path / "projects", ui_dir=ui)
    with TestClient(app) as client:
        page = client.get("/")
        assert page.status_code == 200
        assert "ui" in page.text
        # API routes still win over the static mount
        assert client.get("/api/projects").json() == {"projects": []}


def test_no_ui_mount_without_dir(client):
    assert client.get("/").status_code == 404


def test_bad_lag_type_is_400(loop_client):
    client, pid = loop_client
    response = client.post(
        f"/api/projects/{pid}/pair-detail",
        json={"source": "arrival_rate", "target": "finish_rate", "lag": "soon"},
    )
    assert response.status_code == 400
    assert response.json()["code"] == "bad_request"
