"""Shared fixtures: hand-enumerated small log, synthetic generators."""
from __future__ import annotations

import math
import random
from datetime import datetime, timedelta, timezone

import pytest

from procdyn import Event, EventLog, parse_event_log

# One line per end-to-end criterion, shown after the test summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

# Five events, three cases, two activities, two resources. Every derived
# number in the tests that use this fixture was enumerated by hand from
# these rows.
L1_CSV = """\
case:concept:name,concept:name,org:resource,start_timestamp,time:timestamp
c1,A,r1,2020-01-01T08:10:00Z,2020-01-01T08:20:00Z
c1,B,r2,2020-01-01T08:30:00Z,2020-01-01T08:50:00Z
c2,A,r1,2020-01-01T08:40:00Z,2020-01-01T08:55:00Z
c2,B,r2,2020-01-01T09:05:00Z,2020-01-01T09:30:00Z
c3,A,r1,2020-01-01T09:10:00Z,2020-01-01T09:25:00Z
"""


@pytest.fixture
def l1_csv() -> str:
    return L1_CSV


@pytest.fixture
def l1_log() -> EventLog:
    return parse_event_log(L1_CSV)


def _iso(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).replace(tzinfo=None).isoformat() + "Z"


def make_closed_loop_csv(steps: int = 60, base: int = 20, amplitude: int = 6) -> str:
    """Event log whose hourly SD-log follows an exact linear lagged system.

    a[t] cases start in hour t and complete in hour t+1, so:
    arrival_rate[t] = a[t], finish_rate[t] = a[t-1], num_in_process[t] = a[t].
    """
    origin = datetime(2020, 3, 1, tzinfo=timezone.utc)
    rows = ["case:concept:name,concept:name,org:resource,start_timestamp,time:timestamp"]
    cid = 0
    for t in range(steps):
        count = round(base + amplitude * math.sin(2 * math.pi * t / 24))
        for i in range(count):
            cid += 1
            start = origin + timedelta(hours=t, minutes=i % 50)
            rows.append(
                f"c{cid},work,r1,{_iso(start)},{_iso(start + timedelta(hours=1))}"
            )
    return "\n".join(rows) + "\n"


@pytest.fixture
def closed_loop_log() -> EventLog:
    return parse_event_log(make_closed_loop_csv())


ACTIVITIES = ["receive", "triage", "resolve", "close", "escalate"]
RESOURCES = ["ann", "bob", "cat", None]

NAME_POOL = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta",
    "eta", "theta", "iota", "kappa",
]
LINK_KINDS = ["linear", "monotonic", "nonlinear"]


def make_random_log(rng: random.Random, max_events: int = 50) -> EventLog:
    """Random small log; only guarantees the Event invariants."""
    origin = datetime(2022, 6, 1, tzinfo=timezone.utc)
    events: list[Event] = []
    num_cases = rng.randint(1, 8)
    budget = rng.randint(num_cases, max_events)
    per_case = [1] * num_cases
    for _ in range(budget - num_cases):
        per_case[rng.randrange(num_cases)] += 1
    for c, count in enumerate(per_case):
        cursor = origin + timedelta(minutes=rng.randint(0, 5000))
        for _ in range(count):
            start = cursor + timedelta(minutes=rng.randint(0, 180))
            complete = start + timedelta(minutes=rng.randint(0, 240))
            events.append(
                Event(
                    case_id=f"case{c}",
                    activity=rng.choice(ACTIVITIES),
                    resource=rng.choice(RESOURCES),
                    start=start,
                    complete=complete,
                )
            )
            cursor = complete
    return EventLog.build(events)


def make_random_cld(rng: random.Random):
    from procdyn.models import CLD, Edge

    nodes = rng.sample(NAME_POOL, rng.randint(1, 10))
    triples = [
        (s, t, lag) for s in nodes for t in nodes for lag in range(4) if s != t or lag > 0
    ]
    edges = [
        Edge(s, t, rng.choice("+-"), lag, rng.random(), rng.choice(LINK_KINDS))
        for s, t, lag in rng.sample(triples, min(rng.randint(0, 12), len(triples)))
    ]
    return CLD(nodes=nodes, edges=edges)


def make_random_sfd(rng: random.Random):
    """Random valid SFD: flows always attached, constants never targeted,
    lag-0 links among non-stocks only forward along a fixed order."""
    from procdyn.models import SFD, Constant, Flow, Link, Stock

    names = rng.sample(NAME_POOL, rng.randint(1, 10))
    n = len(names)
    n_stocks = rng.randint(1, min(3, n))
    n_flows = rng.randint(0, min(3, n - n_stocks))
    rest = n - n_stocks - n_flows
    n_consts = rng.randint(0, min(2, rest))

    stock_names = names[:n_stocks]
    flow_names = names[n_stocks : n_stocks + n_flows]
    const_names = names[n_stocks + n_flows : n_stocks + n_flows + n_consts]
    aux_names = names[n_stocks + n_flows + n_consts :]

    stocks = [Stock(s, round(rng.uniform(-20, 20), 3)) for s in stock_names]
    flows = []
    for f in flow_names:
        inflow = rng.choice(stock_names) if rng.random() < 0.7 else None
        outflow = rng.choice(stock_names) if (inflow is None or rng.random() < 0.3) else None
        flows.append(Flow(f, inflow, outflow))
    constants = [Constant(c, rng.uniform(-5, 5)) for c in const_names]

    order = {name: i for i, name in enumerate(names)}
    non_stock = set(flow_names) | set(aux_names)
    candidates = []
    for s in names:
        for t in names:
            if t in const_names:
                continue
            for lag in range(4):
                if lag == 0 and s in non_stock and t in non_stock and order[s] >= order[t]:
                    continue
                if s == t and lag == 0:
                    continue
                candidates.append((s, t, lag))
    links = [
        Link(s, t, rng.choice("+-"), lag, rng.choice(LINK_KINDS))
        for s, t, lag in rng.sample(candidates, min(rng.randint(0, 10), len(candidates)))
    ]
    return SFD(stocks, flows, list(aux_names), constants, links)


def make_random_model(rng: random.Random):
    return make_random_cld(rng) if rng.random() < 0.5 else make_random_sfd(rng)


def make_daily_profile_csv(days: int = 30, seed: int = 2024) -> str:
    """One month of single-event cases with a strong business-hours profile.

    Daily totals follow a jittered upward ramp, so a day-level series is
    easy to forecast while sub-day windows alias the within-day cycle.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    origin = datetime(2021, 3, 1, tzinfo=timezone.utc)
    weights = np.array([12.0 if 8 <= h <= 17 else 1.0 for h in range(24)])
    weights = weights / weights.sum()
    rows = ["case:concept:name,concept:name,org:resource,start_timestamp,time:timestamp"]
    case = 0
    for day in range(days):
        count = 60 + 4 * day + int(rng.integers(-2, 3))
        hours = rng.choice(24, size=count, p=weights)
        minutes = rng.integers(0, 59, size=count)  # completions stay inside the day
        for hour, minute in zip(hours, minutes):
            start = origin + timedelta(days=day, hours=int(hour), minutes=int(minute))
            complete = start + timedelta(seconds=60)
            case += 1
            rows.append(
                f"c{case},handle,r1,"
                f"{start.isoformat().replace('+00:00', 'Z')},"
                f"{complete.isoformat().replace('+00:00', 'Z')}"
            )
    return "\n".join(rows) + "\n"
