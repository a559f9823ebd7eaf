"""Command-line interface over the step runner.

Exit codes: 0 success, 2 usage error, 3 step failure. Machine-readable JSON
goes to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import PipelineError
from .project import Project, full_pipeline, pair_detail, run_step
from .service import serve as serve_service


def _fail(err: PipelineError) -> None:
    click.echo(json.dumps(err.to_dict()), err=True)
    sys.exit(3)


def _emit(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _run(project_dir: Path, step: str, params: dict, create: bool = False) -> None:
    try:
        project = Project.open_or_create(project_dir) if create else Project.load(project_dir)
        ref = run_step(project, step, params)
    except PipelineError as err:
        _fail(err)
        return
    except ValueError as err:
        raise click.UsageError(str(err))
    if ref.file.endswith(".json"):
        click.echo((project.root / ref.file).read_text("utf-8").rstrip())
        click.echo(f"wrote {ref.file}", err=True)
    else:
        _emit(ref.to_dict())


def _load_json(path: str):
    return json.loads(Path(path).read_text("utf-8"))


@click.group()
@click.option(
    "--project",
    "project_dir",
    default=".",
    type=click.Path(file_okay=False, path_type=Path),
    help="Project directory (parent of all projects for `serve`).",
)
@click.pass_context
def main(ctx: click.Context, project_dir: Path) -> None:
    """Event logs in, validated stock-flow simulations out."""
    ctx.obj = project_dir


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mapping", default=None, help="JSON object remapping column names.")
@click.option("--lenient", is_flag=True, help="Skip unparseable rows instead of failing.")
@click.pass_obj
def ingest(project_dir: Path, csv_path: str, mapping: str | None, lenient: bool) -> None:
    """Parse an event-log CSV and persist it as the log artifact."""
    params: dict = {"path": csv_path, "strict": not lenient}
    if mapping:
        params["mapping"] = json.loads(mapping)
    _run(project_dir, "ingest", params, create=True)


@main.command()
@click.pass_obj
def summary(project_dir: Path) -> None:
    """Log summary attributes."""
    _run(project_dir, "summary", {})


@main.command()
@click.pass_obj
def dfg(project_dir: Path) -> None:
    """Directly-follows graph."""
    _run(project_dir, "dfg", {})


@main.command()
@click.option("--window", default="1h", help="Step width, e.g. 30m, 1h, 1d, 2w.")
@click.option(
    "--aspect",
    default="general",
    type=click.Choice(["general", "organizational", "activity"]),
)
@click.option("--entities", default=None, help="Comma-separated entity restriction.")
@click.pass_obj
def sdlog(project_dir: Path, window: str, aspect: str, entities: str | None) -> None:
    """Aggregate the log into per-step process variables."""
    params: dict = {"window": window, "aspect": aspect}
    if entities:
        params["entities"] = [e.strip() for e in entities.split(",") if e.strip()]
    _run(project_dir, "sdlog", params)


@main.command()
@click.option("--candidates", required=True, help="Comma-separated windows, e.g. 1h,7h,1d.")
@click.option("--model", default="ar", help="naive_last | mean | linear_trend | ar.")
@click.option("--split-ratio", default=0.8, show_default=True)
@click.option("--smooth", is_flag=True, help="Apply centered moving-average smoothing.")
@click.pass_obj
def windows(project_dir: Path, candidates: str, model: str, split_ratio: float, smooth: bool) -> None:
    """Score candidate time windows by forecast error."""
    _run(
        project_dir,
        "windows",
        {
            "candidates": [c.strip() for c in candidates.split(",") if c.strip()],
            "model": model,
            "split_ratio": split_ratio,
            "smooth": smooth,
        },
    )


@main.command()
@click.option("--threshold", default=0.7, show_default=True)
@click.option("--max-lag", default=5, show_default=True)
@click.option("--min-support", default=10, show_default=True)
@click.pass_obj
def relations(project_dir: Path, threshold: float, max_lag: int, min_support: int) -> None:
    """Detect strong lagged relations between SD-log variables."""
    _run(
        project_dir,
        "relations",
        {"threshold": threshold, "max_lag": max_lag, "min_support": min_support},
    )


@main.command()
@click.option("--source", required=True)
@click.option("--target", required=True)
@click.option("--lag", default=0, show_default=True)
@click.pass_obj
def detail(project_dir: Path, source: str, target: str, lag: int) -> None:
    """Diagnostics for one variable pair at one lag."""
    try:
        project = Project.load(project_dir)
        result = pair_detail(project, source, target, lag)
    except PipelineError as err:
        _fail(err)
        return
    _emit(result.to_dict())


@main.command()
@click.option(
    "--select",
    "select_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file listing the chosen relations.",
)
@click.pass_obj
def cld(project_dir: Path, select_path: str) -> None:
    """Build the causal-loop diagram from selected relations."""
    data = _load_json(select_path)
    selections = data["relations"] if isinstance(data, dict) else data
    _run(project_dir, "cld", {"selections": selections})


@main.command()
@click.option(
    "--mapping",
    "mapping_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file mapping CLD nodes to SFD elements.",
)
@click.pass_obj
def sfd(project_dir: Path, mapping_path: str) -> None:
    """Derive the stock-flow diagram from the CLD plus an element mapping."""
    data = _load_json(mapping_path)
    mapping = data["mapping"] if isinstance(data, dict) and "mapping" in data else data
    _run(project_dir, "sfd", {"mapping": mapping})


@main.command()
@click.option(
    "--exogenous",
    default="replay",
    type=click.Choice(["replay", "hold_mean"]),
    show_default=True,
)
@click.pass_obj
def fit(project_dir: Path, exogenous: str) -> None:
    """Fit element equations from the SD-log."""
    _run(project_dir, "fit", {"exogenous_policy": exogenous})


@main.command()
@click.option("--horizon", default=None, type=int, help="Steps to simulate (default: SD-log length - 1).")
@click.option(
    "--exogenous",
    default="replay",
    type=click.Choice(["replay", "hold_mean"]),
    show_default=True,
)
@click.pass_obj
def simulate(project_dir: Path, horizon: int | None, exogenous: str) -> None:
    """Simulate the fitted stock-flow model."""
    _run(project_dir, "simulate", {"horizon": horizon, "exogenous_policy": exogenous})


@main.command()
@click.option("--variables", default=None, help="Comma-separated variables (default: endogenous).")
@click.option("--mape-threshold", default=0.2, show_default=True)
@click.option("--ks-threshold", default=0.3, show_default=True)
@click.pass_obj
def validate(
    project_dir: Path, variables: str | None, mape_threshold: float, ks_threshold: float
) -> None:
    """Compare the simulation trace against the SD-log."""
    params: dict = {"mape_threshold": mape_threshold, "ks_threshold": ks_threshold}
    if variables:
        params["variables"] = [v.strip() for v in variables.split(",") if v.strip()]
    _run(project_dir, "validate", params)


@main.command()
@click.option("--port", default=5000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--ui",
    "ui_dir",
    default=None,
    type=click.Path(file_okay=False),
    help="Static UI bundle to serve at / (default: ./frontend/dist when present).",
)
@click.pass_obj
def serve(project_dir: Path, port: int, host: str, ui_dir: str | None) -> None:
    """Serve the HTTP API (and the UI bundle when present)."""
    if ui_dir is None:
        fallback = Path.cwd() / "frontend" / "dist"
        ui_dir = str(fallback) if fallback.is_dir() else None
    try:
        serve_service(project_dir, port=port, host=host, ui_dir=ui_dir)
    except PipelineError as err:
        _fail(err)


@main.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--window", default="1h", show_default=True)
@click.option(
    "--aspect",
    default="general",
    type=click.Choice(["general", "organizational", "activity"]),
)
@click.option(
    "--selections",
    "selections_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file with chosen relations, the element mapping, and run options.",
)
@click.pass_obj
def pipeline(
    project_dir: Path, log_path: str, window: str, aspect: str, selections_path: str
) -> None:
    """Run ingest through validate in one non-interactive call."""
    try:
        report = full_pipeline(project_dir, log_path, window, aspect, selections_path)
    except PipelineError as err:
        _fail(err)
        return
    _emit(report.to_dict())


if __name__ == "__main__":
    main()
