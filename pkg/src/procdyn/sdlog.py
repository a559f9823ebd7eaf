"""SD-log generation: aggregate an event log into per-step process variables.

Steps are half-open windows [start, start + width) anchored at the first event
start truncated down to the window unit, covering everything up to the last
completion. Events are attributed to the step containing their completion;
cases arrive at their first event's start and finish at their last event's
completion, which makes num_in_process an exact stock.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .errors import AllStepsInactive, EmptyLog
from .events import Event, EventLog, format_timestamp, parse_timestamp

UNIT_SECONDS = {"minute": 60, "hour": 3600, "day": 86400, "week": 604800}

ASPECTS = ("general", "organizational", "activity")

GENERAL_VARIABLES = (
    "arrival_rate",
    "finish_rate",
    "num_in_process",
    "avg_service_time",
    "avg_waiting_time",
    "num_unique_resources",
    "num_events",
)

# Per-entity expansion cap: top-N entities by event count, rest pooled.
DEFAULT_TOP_N = 10
POOLED_ENTITY = "_other"


@dataclass(frozen=True)
class TimeWindowSpec:
    duration: int
    unit: str
    origin: datetime | None = None

    def __post_init__(self):
        if self.unit not in UNIT_SECONDS:
            raise ValueError(f"unknown window unit {self.unit!r}")
        if self.duration < 1:
            raise ValueError("window duration must be >= 1")

    @property
    def width_seconds(self) -> int:
        return self.duration * UNIT_SECONDS[self.unit]

    def resolve_origin(self, first_start: datetime) -> datetime:
        if self.origin is not None:
            if self.origin > first_start:
                raise ValueError("window origin must not be after the first event start")
            return self.origin
        return _truncate_to_unit(first_start, self.unit)

    def label(self) -> str:
        return f"{self.duration}{self.unit[0]}"


@dataclass(frozen=True)
class AspectSpec:
    aspect: str = "general"
    entities: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.aspect not in ASPECTS:
            raise ValueError(f"unknown aspect {self.aspect!r}")
        if self.entities is not None and self.aspect == "general":
            raise ValueError("entity restriction applies only to organizational/activity aspects")


@dataclass
class SDLog:
    """m process variables sampled over k time steps."""

    window: TimeWindowSpec
    step_starts: list[datetime]
    variables: list[str]
    values: dict[str, list[float]]
    active_mask: list[bool]
    aspect: str = "general"
    filtered: bool = False

    @property
    def num_steps(self) -> int:
        return len(self.step_starts)

    def series(self, name: str) -> list[float]:
        return self.values[name]

    def __eq__(self, other) -> bool:
        # Equality over the data the CSV form can carry; the window spec and
        # the filtered flag are not encoded there.
        if not isinstance(other, SDLog):
            return NotImplemented
        return (
            self.step_starts == other.step_starts
            and self.variables == other.variables
            and self.values == other.values
            and self.active_mask == other.active_mask
        )


def _truncate_to_unit(dt: datetime, unit: str) -> datetime:
    dt = dt.astimezone(timezone.utc)
    if unit == "minute":
        return dt.replace(second=0, microsecond=0)
    if unit == "hour":
        return dt.replace(minute=0, second=0, microsecond=0)
    day = dt.replace(hour=0, minute=0, second=0, microsecond=0)
    if unit == "day":
        return day
    return day - timedelta(days=day.weekday())


def _step_of(dt: datetime, origin: datetime, width: int) -> int:
    return int((dt - origin).total_seconds()) // width


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def generate_sdlog(log: EventLog, window: TimeWindowSpec, aspect: AspectSpec) -> SDLog:
    """Aggregate ``log`` into one SD-log for the requested aspect.

    Mean-type variables are 0 on steps without observations; active_mask marks
    steps overlapped by at least one event. A window wider than the log span
    yields k = 1.
    """
    if not log.events:
        raise EmptyLog("cannot aggregate an empty log")
    first_start = min(ev.start for ev in log.events)
    last_complete = max(ev.complete for ev in log.events)
    origin = window.resolve_origin(first_start)
    width = window.width_seconds
    k = _step_of(last_complete, origin, width) + 1
    step_starts = [origin + timedelta(seconds=width * i) for i in range(k)]

    by_complete: list[list[Event]] = [[] for _ in range(k)]
    for ev in log.events:
        by_complete[_step_of(ev.complete, origin, width)].append(ev)

    active = [False] * k
    for ev in log.events:
        lo = _step_of(ev.start, origin, width)
        hi = _step_of(ev.complete, origin, width)
        for t in range(lo, hi + 1):
            active[t] = True

    if aspect.aspect == "general":
        values = _general_variables(log, by_complete, origin, width, k)
    elif aspect.aspect == "organizational":
        values = _per_entity_variables(
            by_complete, lambda ev: ev.resource, "workload", "avg_service_time", aspect.entities
        )
    else:
        values = _per_entity_variables(
            by_complete, lambda ev: ev.activity, "frequency", "avg_duration", aspect.entities
        )
    return SDLog(
        window=TimeWindowSpec(window.duration, window.unit, origin),
        step_starts=step_starts,
        variables=list(values.keys()),
        values=values,
        active_mask=active,
        aspect=aspect.aspect,
    )


def _general_variables(
    log: EventLog,
    by_complete: list[list[Event]],
    origin: datetime,
    width: int,
    k: int,
) -> dict[str, list[float]]:
    arrival = [0.0] * k
    finish = [0.0] * k
    in_process = [0.0] * k
    waits: list[list[float]] = [[] for _ in range(k)]

    for evs in log.cases().values():
        a = _step_of(evs[0].start, origin, width)
        f = _step_of(evs[-1].complete, origin, width)
        arrival[a] += 1
        finish[f] += 1
        # In process at the end of each step from arrival until the step
        # before the finish; equals cumulative arrivals minus finishes.
        for t in range(a, f):
            in_process[t] += 1
        for prev, nxt in zip(evs, evs[1:]):
            waits[_step_of(nxt.start, origin, width)].append(
                (nxt.start - prev.complete).total_seconds() / 60.0
            )

    resources_in_step: list[set[str]] = [set() for _ in range(k)]
    for ev in log.events:
        if ev.resource is None:
            continue
        lo = _step_of(ev.start, origin, width)
        hi = _step_of(ev.complete, origin, width)
        for t in range(lo, hi + 1):
            resources_in_step[t].add(ev.resource)

    return {
        "arrival_rate": arrival,
        "finish_rate": finish,
        "num_in_process": in_process,
        "avg_service_time": [
            _mean([ev.duration_minutes for ev in bucket]) for bucket in by_complete
        ],
        "avg_waiting_time": [_mean(ws) for ws in waits],
        "num_unique_resources": [float(len(rs)) for rs in resources_in_step],
        "num_events": [float(len(bucket)) for bucket in by_complete],
    }


def _sanitize(entity: str) -> str:
    # Entity names become CSV columns and model element names; strip anything
    # that would break either.
    cleaned = "".join(ch if ch.isalnum() else "_" for ch in entity).strip("_")
    return cleaned or "unnamed"


def _per_entity_variables(
    by_complete: list[list[Event]],
    entity_of,
    count_name: str,
    avg_name: str,
    restrict: tuple[str, ...] | None,
) -> dict[str, list[float]]:
    counts: dict[str, int] = {}
    for bucket in by_complete:
        for ev in bucket:
            ent = entity_of(ev)
            if ent is not None:
                counts[ent] = counts.get(ent, 0) + 1

    if restrict is not None:
        keep = sorted(set(restrict))
        pooled: set[str] = set()
    else:
        ranked = sorted(counts, key=lambda e: (-counts[e], e))
        keep = sorted(ranked[:DEFAULT_TOP_N])
        pooled = set(ranked[DEFAULT_TOP_N:])

    def bucket_of(ev) -> str | None:
        ent = entity_of(ev)
        if ent is None:
            return None
        if ent in pooled:
            return POOLED_ENTITY
        return ent if ent in keep else None

    columns = list(keep) + ([POOLED_ENTITY] if pooled else [])
    labels: dict[str, str] = {}
    used: set[str] = set()
    for name in columns:
        base = POOLED_ENTITY if name == POOLED_ENTITY else _sanitize(name)
        label, n = base, 2
        while label in used:
            label, n = f"{base}_{n}", n + 1
        used.add(label)
        labels[name] = label
    values: dict[str, list[float]] = {}
    for name in columns:
        values[f"{count_name}_{labels[name]}"] = [
            float(sum(1 for ev in bucket if bucket_of(ev) == name)) for bucket in by_complete
        ]
    for name in columns:
        values[f"{avg_name}_{labels[name]}"] = [
            _mean([ev.duration_minutes for ev in bucket if bucket_of(ev) == name])
            for bucket in by_complete
        ]
    return values


def filter_active(sdlog: SDLog) -> SDLog:
    """Keep only active steps; step timestamps are preserved as-is."""
    keep = [i for i, a in enumerate(sdlog.active_mask) if a]
    if not keep:
        raise AllStepsInactive("every step of the SD-log is inactive")
    return SDLog(
        window=sdlog.window,
        step_starts=[sdlog.step_starts[i] for i in keep],
        variables=list(sdlog.variables),
        values={v: [sdlog.values[v][i] for i in keep] for v in sdlog.variables},
        active_mask=[True] * len(keep),
        aspect=sdlog.aspect,
        filtered=True,
    )


def moving_average(series: list[float], width: int = 3) -> list[float]:
    """Centered moving average with edge clamping; width must be odd."""
    if width <= 1:
        return list(series)
    if width % 2 == 0:
        raise ValueError("smoothing width must be odd")
    half = width // 2
    n = len(series)
    return [_mean(series[max(0, i - half) : min(n, i + half + 1)]) for i in range(n)]


def _format_value(x: float) -> str:
    if x == int(x):
        return str(int(x))
    return repr(x)


def export_sdlog_csv(sdlog: SDLog) -> bytes:
    """CSV form: ``step_start,active,<variables...>``, one row per step, active as 0/1."""
    out = io.StringIO()
    out.write("step_start,active," + ",".join(sdlog.variables) + "\n")
    for i, start in enumerate(sdlog.step_starts):
        row = [format_timestamp(start), "1" if sdlog.active_mask[i] else "0"]
        row.extend(_format_value(sdlog.values[v][i]) for v in sdlog.variables)
        out.write(",".join(row) + "\n")
    return out.getvalue().encode("utf-8")


def _infer_window(step_starts: list[datetime]) -> TimeWindowSpec:
    # The CSV does not carry the window spec; recover it from the smallest
    # spacing between steps (filtered logs may have gaps). Single-step logs
    # default to one hour.
    if len(step_starts) < 2:
        return TimeWindowSpec(1, "hour")
    gap = min(int((b - a).total_seconds()) for a, b in zip(step_starts, step_starts[1:]))
    for unit in ("week", "day", "hour", "minute"):
        if gap % UNIT_SECONDS[unit] == 0:
            return TimeWindowSpec(gap // UNIT_SECONDS[unit], unit)
    return TimeWindowSpec(max(gap // 60, 1), "minute")


def parse_sdlog_csv(data: bytes | str, aspect: str = "general") -> SDLog:
    """Inverse of :func:`export_sdlog_csv` up to the window spec."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyLog("empty SD-log CSV")
    header = lines[0].split(",")
    if header[:2] != ["step_start", "active"]:
        raise ValueError("SD-log CSV must start with step_start,active columns")
    variables = header[2:]
    step_starts: list[datetime] = []
    active: list[bool] = []
    values: dict[str, list[float]] = {v: [] for v in variables}
    for line in lines[1:]:
        parts = line.split(",")
        step_starts.append(parse_timestamp(parts[0]))
        active.append(parts[1] == "1")
        for v, raw in zip(variables, parts[2:]):
            values[v].append(float(raw))
    return SDLog(
        window=_infer_window(step_starts),
        step_starts=step_starts,
        variables=variables,
        values=values,
        active_mask=active,
        aspect=aspect,
    )
