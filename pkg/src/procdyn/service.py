"""HTTP layer: a thin adapter mapping endpoints onto the step runner.

No statistics or modeling happens here; every route delegates to run_step or
a module operation and shapes the response. Errors surface as
{code, message, detail} JSON with a 4xx status.
"""
from __future__ import annotations

import json
import re
import socket
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .engine import parse_trace_csv
from .errors import MissingInput, PipelineError, PortInUse
from .project import ARTIFACT_KINDS, Project, pair_detail, run_step

_SAFE_ID = re.compile(r"^[A-Za-z0-9_-]+$")

_MEDIA_TYPES = {"csv": "text/csv", "json": "application/json", "mdl": "text/plain"}


def _error_response(err: PipelineError) -> JSONResponse:
    status = 404 if isinstance(err, MissingInput) else 422
    return JSONResponse(err.to_dict(), status_code=status)


def create_app(root: Path | str, ui_dir: Path | str | None = None) -> FastAPI:
    """Service over all projects under ``root``; one directory per project."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="procdyn", docs_url=None, redoc_url=None)

    @app.exception_handler(PipelineError)
    async def pipeline_error_handler(request: Request, err: PipelineError):
        return _error_response(err)

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, err: ValueError):
        return JSONResponse(
            {"code": "bad_request", "message": str(err), "detail": None}, status_code=400
        )

    def open_project(pid: str) -> Project:
        if not _SAFE_ID.match(pid):
            raise ValueError(f"bad project id {pid!r}")
        return Project.load(root / pid)

    async def body_of(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        return json.loads(raw)

    @app.get("/api/projects")
    async def list_projects():
        out = []
        for path in sorted(root.iterdir()):
            if (path / "project.json").exists():
                out.append({"id": path.name})
        return {"projects": out}

    @app.post("/api/projects")
    async def create_project(request: Request):
        payload = await body_of(request)
        pid = payload.get("id", "default")
        if not _SAFE_ID.match(pid):
            raise ValueError(f"bad project id {pid!r}")
        if (root / pid / "project.json").exists():
            raise ValueError(f"project {pid!r} already exists")
        Project.create(root / pid, pid)
        return JSONResponse({"id": pid}, status_code=201)

    @app.post("/api/projects/{pid}/log")
    async def post_log(pid: str, request: Request):
        project = open_project(pid)
        raw = await request.body()
        content_type = request.headers.get("content-type", "")
        if "json" in content_type:
            payload = json.loads(raw)
            params = {"csv": payload["csv"], "mapping": payload.get("mapping")}
            if "strict" in payload:
                params["strict"] = bool(payload["strict"])
        else:
            params = {"csv": raw}
        ref = run_step(project, "ingest", params)
        return {"artifact": ref.to_dict()}

    def artifact_json(project: Project, kind: str, step: str) -> dict:
        # GET endpoints reuse the stored artifact; first access computes it.
        if not project.has(kind):
            run_step(project, step)
        return json.loads(project.read_artifact(kind))

    @app.get("/api/projects/{pid}/summary")
    async def get_summary(pid: str):
        return artifact_json(open_project(pid), "summary", "summary")

    @app.get("/api/projects/{pid}/dfg")
    async def get_dfg(pid: str):
        return artifact_json(open_project(pid), "dfg", "dfg")

    @app.post("/api/projects/{pid}/sdlog")
    async def post_sdlog(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "sdlog", await body_of(request))
        active = project.latest("sdlog_active")
        return {
            "artifact": ref.to_dict(),
            "active_artifact": active.to_dict() if active else None,
        }

    @app.post("/api/projects/{pid}/windows")
    async def post_windows(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "windows", await body_of(request))
        return {
            "artifact": ref.to_dict(),
            "stability": json.loads(project.read_artifact("stability")),
        }

    @app.post("/api/projects/{pid}/relations")
    async def post_relations(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "relations", await body_of(request))
        return {
            "artifact": ref.to_dict(),
            "relations": json.loads(project.read_artifact("relations")),
        }

    @app.get("/api/projects/{pid}/relations")
    async def get_relations(pid: str):
        project = open_project(pid)
        return json.loads(project.read_artifact("relations"))

    @app.post("/api/projects/{pid}/pair-detail")
    async def post_pair_detail(pid: str, request: Request):
        project = open_project(pid)
        payload = await body_of(request)
        detail = pair_detail(
            project, payload["source"], payload["target"], int(payload.get("lag", 0))
        )
        return detail.to_dict()

    @app.post("/api/projects/{pid}/cld")
    async def post_cld(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "cld", await body_of(request))
        return {"artifact": ref.to_dict(), "cld": project.load_model("cld").to_dict()}

    @app.post("/api/projects/{pid}/sfd")
    async def post_sfd(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "sfd", await body_of(request))
        return {"artifact": ref.to_dict(), "sfd": project.load_model("sfd").to_dict()}

    @app.post("/api/projects/{pid}/fit")
    async def post_fit(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "fit", await body_of(request))
        return {
            "artifact": ref.to_dict(),
            "equations": json.loads(project.read_artifact("equations")),
        }

    @app.post("/api/projects/{pid}/simulate")
    async def post_simulate(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "simulate", await body_of(request))
        trace = parse_trace_csv(project.read_artifact("trace"))
        return {"artifact": ref.to_dict(), "trace": trace.to_dict()}

    @app.post("/api/projects/{pid}/validate")
    async def post_validate(pid: str, request: Request):
        project = open_project(pid)
        ref = run_step(project, "validate", await body_of(request))
        return {
            "artifact": ref.to_dict(),
            "report": json.loads(project.read_artifact("validation")),
        }

    @app.get("/api/projects/{pid}/artifacts/{kind}")
    async def get_artifact(pid: str, kind: str):
        project = open_project(pid)
        if kind not in ARTIFACT_KINDS:
            raise MissingInput(f"unknown artifact kind {kind!r}", detail={"artifact": kind})
        ref = project.latest(kind)
        if ref is None:
            raise MissingInput(f"missing artifact {kind!r}", detail={"artifact": kind})
        return FileResponse(
            project.root / ref.file,
            media_type=_MEDIA_TYPES[ARTIFACT_KINDS[kind]],
            filename=Path(ref.file).name,
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(root: Path | str, port: int = 5000, host: str = "127.0.0.1", ui_dir=None) -> None:
    """Run the HTTP service until interrupted."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as err:
        raise PortInUse(f"cannot bind {host}:{port}: {err}") from err
    finally:
        probe.close()
    uvicorn.run(create_app(root, ui_dir), host=host, port=port, log_level="info")
