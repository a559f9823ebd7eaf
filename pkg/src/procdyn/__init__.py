"""Process-variable extraction, relation mining, and stock-flow simulation."""
from .engine import (
    Equation,
    EquationSet,
    SimulationConfig,
    SimulationTrace,
    Term,
    ValidationReport,
    VariableValidation,
    export_trace_csv,
    fit_equations,
    ks_statistic,
    mape,
    parse_trace_csv,
    rmse,
    simulate,
    validate,
)
from .errors import PipelineError
from .events import (
    DFG,
    Event,
    EventLog,
    LogSummary,
    build_dfg,
    export_event_log_csv,
    parse_event_log,
    summarize,
)
from .models import (
    CLD,
    SFD,
    Constant,
    Edge,
    ElementMapping,
    ElementSpec,
    Flow,
    Link,
    Stock,
    build_cld,
    derive_sfd,
    export_mdl,
    parse_mdl,
    validate_sfd,
)
from .project import ArtifactRef, Project, full_pipeline, pair_detail, parse_window, run_step
from .relations import PairDetail, RelationCandidate, detail_pair, detect_relations
from .sdlog import (
    AspectSpec,
    SDLog,
    TimeWindowSpec,
    export_sdlog_csv,
    filter_active,
    generate_sdlog,
    moving_average,
    parse_sdlog_csv,
)
from .service import create_app, serve
from .windows import (
    CandidateScore,
    Forecaster,
    StabilityReport,
    WindowCandidate,
    assess_windows,
    fit_forecaster,
    rank_windows,
    score_series,
)

__version__ = "0.1.0"

__all__ = [
    "AspectSpec",
    "ArtifactRef",
    "CLD",
    "CandidateScore",
    "Constant",
    "DFG",
    "Edge",
    "ElementMapping",
    "ElementSpec",
    "Equation",
    "EquationSet",
    "Event",
    "EventLog",
    "Flow",
    "Forecaster",
    "Link",
    "LogSummary",
    "PairDetail",
    "PipelineError",
    "Project",
    "RelationCandidate",
    "SDLog",
    "SFD",
    "SimulationConfig",
    "SimulationTrace",
    "StabilityReport",
    "Stock",
    "Term",
    "TimeWindowSpec",
    "ValidationReport",
    "VariableValidation",
    "WindowCandidate",
    "assess_windows",
    "build_cld",
    "build_dfg",
    "create_app",
    "derive_sfd",
    "detail_pair",
    "detect_relations",
    "export_event_log_csv",
    "export_mdl",
    "export_sdlog_csv",
    "export_trace_csv",
    "filter_active",
    "fit_equations",
    "fit_forecaster",
    "full_pipeline",
    "generate_sdlog",
    "ks_statistic",
    "mape",
    "moving_average",
    "pair_detail",
    "parse_event_log",
    "parse_mdl",
    "parse_sdlog_csv",
    "parse_trace_csv",
    "parse_window",
    "rank_windows",
    "rmse",
    "score_series",
    "run_step",
    "serve",
    "simulate",
    "summarize",
    "validate",
    "validate_sfd",
]
