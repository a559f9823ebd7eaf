"""File-based project store and the step runner shared by the CLI and the service.

Every pipeline stage reads its inputs from persisted artifacts and writes its
output as a new immutable file; re-running a step writes a versioned sibling
(-v2, -v3, ...) and leaves earlier files untouched. project.json is the only
mutable file: it maps artifact kinds to their version history.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .engine import (
    EquationSet,
    SimulationConfig,
    ValidationReport,
    export_trace_csv,
    fit_equations,
    parse_trace_csv,
    simulate,
    validate,
)
from .errors import MissingInput, PipelineError, StepFailed
from .events import build_dfg, export_event_log_csv, parse_event_log, summarize
from .models import CLD, SFD, ElementMapping, build_cld, derive_sfd, export_mdl, parse_mdl
from .relations import RelationCandidate, constant_columns, detail_pair, detect_relations
from .sdlog import (
    AspectSpec,
    TimeWindowSpec,
    export_sdlog_csv,
    filter_active,
    generate_sdlog,
    parse_sdlog_csv,
)
from .windows import WindowCandidate, assess_windows, rank_windows

ARTIFACT_KINDS = {
    "log": "csv",
    "summary": "json",
    "dfg": "json",
    "sdlog_all": "csv",
    "sdlog_active": "csv",
    "stability": "json",
    "relations": "json",
    "selections": "json",
    "cld": "mdl",
    "mapping": "json",
    "sfd": "mdl",
    "equations": "json",
    "trace": "csv",
    "validation": "json",
}

STEP_INPUTS = {
    "ingest": (),
    "summary": ("log",),
    "dfg": ("log",),
    "sdlog": ("log",),
    "windows": ("log",),
    "relations": ("sdlog_active",),
    "cld": ("relations",),
    "sfd": ("cld",),
    "fit": ("sfd", "sdlog_all"),
    "simulate": ("sfd", "equations", "sdlog_all"),
    "validate": ("trace", "sdlog_all"),
}

_UNIT_SUFFIX = {"m": "minute", "h": "hour", "d": "day", "w": "week"}

_LOCKS: dict[str, threading.RLock] = {}
_LOCKS_GUARD = threading.Lock()


def _lock_for(root: Path) -> threading.RLock:
    key = str(root.resolve())
    with _LOCKS_GUARD:
        return _LOCKS.setdefault(key, threading.RLock())


def parse_window(value) -> TimeWindowSpec:
    """Accept '3h'-style strings or {duration, unit} dicts."""
    if isinstance(value, TimeWindowSpec):
        return value
    if isinstance(value, dict):
        return TimeWindowSpec(int(value["duration"]), value["unit"])
    text = str(value).strip().lower()
    if text and text[-1] in _UNIT_SUFFIX and text[:-1].isdigit():
        return TimeWindowSpec(int(text[:-1]), _UNIT_SUFFIX[text[-1]])
    raise ValueError(f"cannot parse window {value!r}; expected forms like 1h, 30m, 1d, 2w")


def json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8")


@dataclass(frozen=True)
class ArtifactRef:
    kind: str
    file: str  # relative to the project root
    version: int
    created_at: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "file": self.file,
            "version": self.version,
            "created_at": self.created_at,
        }


class Project:
    """One pipeline workspace on disk."""

    def __init__(self, root: Path | str, index: dict):
        self.root = Path(root)
        self.index = index
        self.lock = _lock_for(self.root)

    @property
    def id(self) -> str:
        return self.index["id"]

    @classmethod
    def create(cls, root: Path | str, project_id: str | None = None) -> "Project":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        (root / "artifacts").mkdir(exist_ok=True)
        index_path = root / "project.json"
        if index_path.exists():
            raise ValueError(f"project already exists at {root}")
        index = {"id": project_id or root.name, "artifacts": {}}
        project = cls(root, index)
        project._save_index()
        return project

    @classmethod
    def load(cls, root: Path | str) -> "Project":
        root = Path(root)
        index_path = root / "project.json"
        if not index_path.exists():
            raise MissingInput(f"no project at {root}", detail={"root": str(root)})
        return cls(root, json.loads(index_path.read_text("utf-8")))

    @classmethod
    def open_or_create(cls, root: Path | str, project_id: str | None = None) -> "Project":
        root = Path(root)
        if (root / "project.json").exists():
            return cls.load(root)
        return cls.create(root, project_id)

    def _save_index(self) -> None:
        tmp = self.root / "project.json.tmp"
        tmp.write_text(json.dumps(self.index, indent=2, sort_keys=True) + "\n", "utf-8")
        tmp.replace(self.root / "project.json")

    def refs(self, kind: str) -> list[ArtifactRef]:
        out = []
        for i, entry in enumerate(self.index["artifacts"].get(kind, [])):
            out.append(ArtifactRef(kind, entry["file"], i + 1, entry["created_at"]))
        return out

    def latest(self, kind: str) -> ArtifactRef | None:
        refs = self.refs(kind)
        return refs[-1] if refs else None

    def has(self, kind: str) -> bool:
        return bool(self.index["artifacts"].get(kind))

    def read_artifact(self, kind: str) -> bytes:
        ref = self.latest(kind)
        if ref is None:
            raise MissingInput(f"missing artifact {kind!r}", detail={"artifact": kind})
        return (self.root / ref.file).read_bytes()

    def write_artifact(self, kind: str, data: bytes) -> ArtifactRef:
        if kind not in ARTIFACT_KINDS:
            raise ValueError(f"unknown artifact kind {kind!r}")
        with self.lock:
            history = self.index["artifacts"].setdefault(kind, [])
            version = len(history) + 1
            suffix = "" if version == 1 else f"-v{version}"
            rel = f"artifacts/{kind}{suffix}.{ARTIFACT_KINDS[kind]}"
            path = self.root / rel
            if path.exists():
                raise ValueError(f"artifact file already exists: {path}")
            path.write_bytes(data)
            created = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
            history.append({"file": rel, "created_at": created})
            self._save_index()
            return ArtifactRef(kind, rel, version, created)

    # Typed readers over the persisted artifacts.

    def load_log(self):
        return parse_event_log(self.read_artifact("log"))

    def load_sdlog(self, kind: str = "sdlog_all"):
        return parse_sdlog_csv(self.read_artifact(kind))

    def load_model(self, kind: str):
        model = parse_mdl(self.read_artifact(kind).decode("utf-8"))
        expected = CLD if kind == "cld" else SFD
        if not isinstance(model, expected):
            raise StepFailed(f"artifact {kind!r} holds the wrong model type")
        return model

    def load_equations(self) -> EquationSet:
        return EquationSet.from_dict(json.loads(self.read_artifact("equations")))


def run_step(project: Project, step: str, params: dict | None = None) -> ArtifactRef:
    """Execute one pipeline step against the project's persisted artifacts."""
    if step not in STEP_INPUTS:
        raise ValueError(f"unknown step {step!r}")
    params = params or {}
    with project.lock:
        for kind in STEP_INPUTS[step]:
            if not project.has(kind):
                raise MissingInput(f"missing artifact {kind!r}", detail={"artifact": kind})
        try:
            return _execute(project, step, params)
        except (MissingInput, StepFailed):
            raise
        except PipelineError as err:
            raise StepFailed(f"{step}: {err}", detail={"step": step, "cause": err.to_dict()})


def _execute(project: Project, step: str, params: dict) -> ArtifactRef:
    if step == "ingest":
        source = params.get("csv")
        if source is None:
            path = params.get("path")
            if path is None:
                raise ValueError("ingest needs csv bytes or a path")
            source = Path(path).read_bytes()
        log = parse_event_log(source, params.get("mapping"), params.get("strict", True))
        return project.write_artifact("log", export_event_log_csv(log))

    if step == "summary":
        report = summarize(project.load_log())
        return project.write_artifact("summary", json_bytes(report.to_dict()))

    if step == "dfg":
        dfg = build_dfg(project.load_log())
        return project.write_artifact("dfg", json_bytes(dfg.to_dict()))

    if step == "sdlog":
        window = parse_window(params.get("window", "1h"))
        entities = params.get("entities")
        aspect = AspectSpec(
            params.get("aspect", "general"),
            tuple(entities) if entities else None,
        )
        sdlog = generate_sdlog(project.load_log(), window, aspect)
        ref = project.write_artifact("sdlog_all", export_sdlog_csv(sdlog))
        project.write_artifact("sdlog_active", export_sdlog_csv(filter_active(sdlog)))
        return ref

    if step == "windows":
        candidates = [
            WindowCandidate(parse_window(c), str(c)) for c in params.get("candidates", [])
        ]
        model = params.get("model", "ar_p")
        if model == "ar":
            model = "ar_p"
        report = assess_windows(
            project.load_log(),
            candidates,
            model,
            float(params.get("split_ratio", 0.8)),
            bool(params.get("smooth", False)),
        )
        payload = report.to_dict()
        try:
            payload["ranking"] = rank_windows(report)
        except PipelineError:
            payload["ranking"] = []
        return project.write_artifact("stability", json_bytes(payload))

    if step == "relations":
        sdlog = project.load_sdlog("sdlog_active")
        candidates = detect_relations(
            sdlog,
            int(params.get("max_lag", 5)),
            float(params.get("threshold", 0.7)),
            int(params.get("min_support", 10)),
        )
        payload = {
            "skipped_constant": constant_columns(sdlog),
            "candidates": [c.to_dict() for c in candidates],
        }
        return project.write_artifact("relations", json_bytes(payload))

    if step == "cld":
        selections = params.get("selections") or []
        detected = json.loads(project.read_artifact("relations"))["candidates"]
        by_key = {(c["source"], c["target"], c["lag"]): c for c in detected}
        chosen: list[RelationCandidate] = []
        for sel in selections:
            key = (sel["source"], sel["target"], int(sel["lag"]))
            cand = by_key.get(key)
            if cand is None:
                raise StepFailed(
                    f"build_cld: unknown relation {key[0]} -> {key[1]} lag {key[2]}",
                    detail={"selection": sel},
                )
            chosen.append(
                RelationCandidate(
                    cand["source"],
                    cand["target"],
                    cand["lag"],
                    cand["kind"],
                    cand["coefficient"],
                    cand["support"],
                    cand.get("auto", False),
                )
            )
        cld = build_cld(chosen)
        project.write_artifact("selections", json_bytes({"selections": selections}))
        return project.write_artifact("cld", export_mdl(cld).encode("utf-8"))

    if step == "sfd":
        mapping_data = params.get("mapping") or {}
        cld = project.load_model("cld")
        sfd = derive_sfd(cld, ElementMapping.from_dict(mapping_data))
        project.write_artifact("mapping", json_bytes(mapping_data))
        return project.write_artifact("sfd", export_mdl(sfd).encode("utf-8"))

    if step == "fit":
        sfd = project.load_model("sfd")
        sdlog = project.load_sdlog("sdlog_all")
        policy = params.get("exogenous_policy", "replay")
        equations = fit_equations(sfd, sdlog, policy)
        payload = equations.to_dict()
        payload["exogenous_policy"] = policy
        return project.write_artifact("equations", json_bytes(payload))

    if step == "simulate":
        sfd = project.load_model("sfd")
        sdlog = project.load_sdlog("sdlog_all")
        equations = project.load_equations()
        horizon = int(params.get("horizon") or sdlog.num_steps - 1)
        config = SimulationConfig(
            horizon=horizon,
            initial_values=params.get("initial_values"),
            exogenous_policy=params.get("exogenous_policy", "replay"),
        )
        trace = simulate(sfd, equations, sdlog, config)
        return project.write_artifact("trace", export_trace_csv(trace))

    if step == "validate":
        trace = parse_trace_csv(project.read_artifact("trace"))
        sdlog = project.load_sdlog("sdlog_all")
        variables = params.get("variables") or _endogenous_variables(project, trace, sdlog)
        report = validate(
            trace,
            sdlog,
            variables,
            float(params.get("mape_threshold", 0.2)),
            float(params.get("ks_threshold", 0.3)),
        )
        return project.write_artifact("validation", json_bytes(report.to_dict()))

    raise ValueError(f"unknown step {step!r}")


def _endogenous_variables(project: Project, trace, sdlog) -> list[str]:
    """Default validation scope: stocks and fitted elements present in the SD-log."""
    sfd = project.load_model("sfd")
    equations = project.load_equations().equations
    names = [s.name for s in sfd.stocks]
    names += [n for n, eq in equations.items() if eq.form == "linear_form"]
    return [n for n in names if n in sdlog.values and n in trace.values]


def pair_detail(project: Project, source: str, target: str, lag: int):
    """Diagnostics for one pair, computed on demand from the active SD-log."""
    if not project.has("sdlog_active"):
        raise MissingInput("missing artifact 'sdlog_active'", detail={"artifact": "sdlog_active"})
    return detail_pair(project.load_sdlog("sdlog_active"), source, target, lag)


def full_pipeline(
    root: Path | str,
    log_path: Path | str,
    window,
    aspect: str,
    selections_path: Path | str,
) -> ValidationReport:
    """Non-interactive batch path: ingest through validate in one call.

    The selections file supplies what the UI would collect interactively:
    {"relations": [{source, target, lag}, ...], "mapping": {node: {...}}}
    plus optional relation_params, horizon, exogenous_policy, validate params.
    """
    config = json.loads(Path(selections_path).read_text("utf-8"))
    project = Project.open_or_create(root)
    run_step(project, "ingest", {"path": str(log_path)})
    run_step(project, "summary")
    run_step(project, "dfg")
    run_step(project, "sdlog", {"window": window, "aspect": aspect})
    run_step(project, "relations", config.get("relation_params", {}))
    run_step(project, "cld", {"selections": config.get("relations", [])})
    run_step(project, "sfd", {"mapping": config.get("mapping", {})})
    run_step(project, "fit", {"exogenous_policy": config.get("exogenous_policy", "replay")})
    run_step(
        project,
        "simulate",
        {
            "horizon": config.get("horizon"),
            "exogenous_policy": config.get("exogenous_policy", "replay"),
        },
    )
    run_step(
        project,
        "validate",
        {
            "variables": config.get("validate_variables"),
            "mape_threshold": config.get("mape_threshold", 0.2),
            "ks_threshold": config.get("ks_threshold", 0.3),
        },
    )
    data = json.loads(project.read_artifact("validation"))
    return ValidationReport.from_dict(data)
