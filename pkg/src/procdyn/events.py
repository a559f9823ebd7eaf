"""Event log ingestion: CSV parsing, summary attributes, directly-follows graph."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import BadTimestamp, EmptyLog, MissingColumn

# Default source column names for event-log CSVs. `time:timestamp` holds the
# completion time; the start column is optional (missing start := complete).
DEFAULT_COLUMNS = {
    "case": "case:concept:name",
    "activity": "concept:name",
    "resource": "org:resource",
    "complete": "time:timestamp",
    "start": "start_timestamp",
}


def parse_timestamp(value: str) -> datetime:
    """Parse ISO-8601 or ``YYYY-MM-DD HH:MM:SS`` into a UTC datetime (second precision)."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    else:
        dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    """UTC datetime -> ISO-8601 with Z suffix."""
    return dt.astimezone(timezone.utc).replace(microsecond=0, tzinfo=None).isoformat() + "Z"


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    resource: str | None
    start: datetime
    complete: datetime

    def __post_init__(self):
        if not self.case_id or not self.activity:
            raise ValueError("case_id and activity must be non-empty")
        if self.start > self.complete:
            raise ValueError(f"event start after complete: {self.start} > {self.complete}")

    @property
    def duration_minutes(self) -> float:
        return (self.complete - self.start).total_seconds() / 60.0


@dataclass
class EventLog:
    """Events sorted by (start, complete, input order)."""

    events: list[Event]
    column_mapping: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    skipped_rows: int = 0

    @classmethod
    def build(cls, events: list[Event], column_mapping: dict[str, str] | None = None) -> "EventLog":
        ordered = sorted(events, key=lambda e: (e.start, e.complete))
        return cls(ordered, dict(column_mapping or DEFAULT_COLUMNS))

    def __len__(self) -> int:
        return len(self.events)

    def cases(self) -> dict[str, list[Event]]:
        """Events grouped per case, preserving the log-wide (start, complete) order."""
        grouped: dict[str, list[Event]] = {}
        for ev in self.events:
            grouped.setdefault(ev.case_id, []).append(ev)
        return grouped


@dataclass(frozen=True)
class LogSummary:
    num_events: int
    num_cases: int
    num_activities: int
    num_resources: int
    first_start: datetime
    last_complete: datetime
    avg_events_per_case: float
    avg_case_duration_minutes: float

    def to_dict(self) -> dict:
        return {
            "num_events": self.num_events,
            "num_cases": self.num_cases,
            "num_activities": self.num_activities,
            "num_resources": self.num_resources,
            "first_start": format_timestamp(self.first_start),
            "last_complete": format_timestamp(self.last_complete),
            "avg_events_per_case": self.avg_events_per_case,
            "avg_case_duration_minutes": self.avg_case_duration_minutes,
        }


@dataclass
class DFG:
    """Directly-follows graph: counts of immediate successor pairs within cases."""

    edges: dict[tuple[str, str], int]
    start_activities: dict[str, int]
    end_activities: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "edges": [
                {"source": s, "target": t, "count": c}
                for (s, t), c in sorted(self.edges.items())
            ],
            "start_activities": dict(sorted(self.start_activities.items())),
            "end_activities": dict(sorted(self.end_activities.items())),
        }


def parse_event_log(
    source: bytes | str,
    mapping: dict[str, str] | None = None,
    strict: bool = True,
) -> EventLog:
    """Parse a CSV event log.

    ``mapping`` names the case/activity/complete columns (resource and start
    optional); defaults to :data:`DEFAULT_COLUMNS`. In strict mode any
    unparseable row raises; lenient mode skips and counts bad rows.
    """
    cols = dict(DEFAULT_COLUMNS)
    cols.update(mapping or {})
    text = source.decode("utf-8-sig") if isinstance(source, bytes) else source
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise EmptyLog("CSV has no header row")
    fields = set(reader.fieldnames)
    for key in ("case", "activity", "complete"):
        if cols[key] not in fields:
            raise MissingColumn(f"mapped column {cols[key]!r} for {key!r} not in CSV header")
    has_resource = cols["resource"] in fields
    has_start = cols["start"] in fields

    events: list[Event] = []
    skipped = 0
    for idx, row in enumerate(reader):
        try:
            case_id = (row.get(cols["case"]) or "").strip()
            activity = (row.get(cols["activity"]) or "").strip()
            if not case_id or not activity:
                raise ValueError("empty case or activity")
            raw_complete = (row.get(cols["complete"]) or "").strip()
            try:
                complete = parse_timestamp(raw_complete)
            except ValueError:
                raise BadTimestamp(
                    f"row {idx}: cannot parse timestamp {raw_complete!r}",
                    detail={"row": idx, "value": raw_complete},
                )
            start = complete
            if has_start:
                raw_start = (row.get(cols["start"]) or "").strip()
                if raw_start:
                    try:
                        start = parse_timestamp(raw_start)
                    except ValueError:
                        raise BadTimestamp(
                            f"row {idx}: cannot parse timestamp {raw_start!r}",
                            detail={"row": idx, "value": raw_start},
                        )
            resource = None
            if has_resource:
                resource = (row.get(cols["resource"]) or "").strip() or None
            events.append(Event(case_id, activity, resource, start, complete))
        except (BadTimestamp, ValueError):
            if strict:
                raise
            skipped += 1
    if not events:
        raise EmptyLog("no parseable event rows")
    log = EventLog.build(events, cols)
    log.skipped_rows = skipped
    return log


def export_event_log_csv(log: EventLog) -> bytes:
    """Emit the canonical CSV form (default column names); re-parse reproduces the log."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([
        DEFAULT_COLUMNS["case"],
        DEFAULT_COLUMNS["activity"],
        DEFAULT_COLUMNS["resource"],
        DEFAULT_COLUMNS["start"],
        DEFAULT_COLUMNS["complete"],
    ])
    for ev in log.events:
        writer.writerow([
            ev.case_id,
            ev.activity,
            ev.resource or "",
            format_timestamp(ev.start),
            format_timestamp(ev.complete),
        ])
    return out.getvalue().encode("utf-8")


def summarize(log: EventLog) -> LogSummary:
    """Main attributes of the log: counts, span, per-case averages."""
    if not log.events:
        raise EmptyLog("cannot summarize an empty log")
    cases = log.cases()
    durations = [
        (evs[-1].complete - evs[0].start).total_seconds() / 60.0 for evs in cases.values()
    ]
    resources = {ev.resource for ev in log.events if ev.resource is not None}
    return LogSummary(
        num_events=len(log.events),
        num_cases=len(cases),
        num_activities=len({ev.activity for ev in log.events}),
        num_resources=len(resources),
        first_start=min(ev.start for ev in log.events),
        last_complete=max(ev.complete for ev in log.events),
        avg_events_per_case=len(log.events) / len(cases),
        avg_case_duration_minutes=sum(durations) / len(durations),
    )


def build_dfg(log: EventLog) -> DFG:
    """Count directly-follows pairs within each case."""
    if not log.events:
        raise EmptyLog("cannot build DFG from an empty log")
    edges: dict[tuple[str, str], int] = {}
    starts: dict[str, int] = {}
    ends: dict[str, int] = {}
    for evs in log.cases().values():
        starts[evs[0].activity] = starts.get(evs[0].activity, 0) + 1
        ends[evs[-1].activity] = ends.get(evs[-1].activity, 0) + 1
        for prev, nxt in zip(evs, evs[1:]):
            key = (prev.activity, nxt.activity)
            edges[key] = edges.get(key, 0) + 1
    return DFG(edges, starts, ends)
