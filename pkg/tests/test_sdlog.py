"""SD-log generation: step grid, general and per-entity variables, CSV form."""
from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procdyn import (
    AspectSpec,
    SDLog,
    TimeWindowSpec,
    build_dfg,
    export_sdlog_csv,
    filter_active,
    generate_sdlog,
    moving_average,
    parse_sdlog_csv,
    summarize,
)
from procdyn.errors import AllStepsInactive
from procdyn.events import Event, EventLog

from conftest import make_random_log

UTC = timezone.utc


def _hourly(log):
    return generate_sdlog(log, TimeWindowSpec(1, "hour"), AspectSpec("general"))


# Hand enumeration for the five-event fixture, 1-hour steps at 08:00/09:00:
# step 0 completes A(c1, 10 min), B(c1, 20 min), A(c2, 15 min);
# step 1 completes B(c2, 25 min), A(c3, 15 min).
def test_l1_general_variables(l1_log):
    sd = _hourly(l1_log)
    assert sd.num_steps == 2
    assert sd.step_starts[0] == datetime(2020, 1, 1, 8, 0, tzinfo=UTC)
    assert sd.variables == [
        "arrival_rate",
        "finish_rate",
        "num_in_process",
        "avg_service_time",
        "avg_waiting_time",
        "num_unique_resources",
        "num_events",
    ]
    assert sd.values["arrival_rate"] == [2.0, 1.0]
    assert sd.values["finish_rate"] == [1.0, 2.0]
    assert sd.values["num_in_process"] == [1.0, 0.0]
    assert sd.values["avg_service_time"] == [15.0, 20.0]
    assert sd.values["avg_waiting_time"] == [10.0, 10.0]
    assert sd.values["num_unique_resources"] == [2.0, 2.0]
    assert sd.values["num_events"] == [3.0, 2.0]
    assert sd.active_mask == [True, True]


def test_l1_organizational_variables(l1_log):
    sd = generate_sdlog(l1_log, TimeWindowSpec(1, "hour"), AspectSpec("organizational"))
    assert sd.variables == [
        "workload_r1",
        "workload_r2",
        "avg_service_time_r1",
        "avg_service_time_r2",
    ]
    assert sd.values["workload_r1"] == [2.0, 1.0]
    assert sd.values["workload_r2"] == [1.0, 1.0]
    assert sd.values["avg_service_time_r1"] == [12.5, 15.0]
    assert sd.values["avg_service_time_r2"] == [20.0, 25.0]


def test_l1_activity_variables(l1_log):
    sd = generate_sdlog(l1_log, TimeWindowSpec(1, "hour"), AspectSpec("activity"))
    assert sd.variables == [
        "frequency_A",
        "frequency_B",
        "avg_duration_A",
        "avg_duration_B",
    ]
    assert sd.values["frequency_A"] == [2.0, 1.0]
    assert sd.values["avg_duration_B"] == [20.0, 25.0]


def test_entity_restriction(l1_log):
    sd = generate_sdlog(
        l1_log, TimeWindowSpec(1, "hour"), AspectSpec("activity", entities=("B",))
    )
    assert sd.variables == ["frequency_B", "avg_duration_B"]


def test_entities_rejected_for_general_aspect():
    with pytest.raises(ValueError):
        AspectSpec("general", entities=("x",))


@pytest.mark.parametrize(
    "unit,expected",
    [
        ("minute", datetime(2020, 1, 1, 8, 10, tzinfo=UTC)),
        ("hour", datetime(2020, 1, 1, 8, 0, tzinfo=UTC)),
        ("day", datetime(2020, 1, 1, 0, 0, tzinfo=UTC)),
        # 2020-01-01 is a Wednesday; the week starts Monday 2019-12-30
        ("week", datetime(2019, 12, 30, 0, 0, tzinfo=UTC)),
    ],
)
def test_default_origin_truncates_to_unit(l1_log, unit, expected):
    sd = generate_sdlog(l1_log, TimeWindowSpec(1, unit), AspectSpec("general"))
    assert sd.step_starts[0] == expected


def test_explicit_origin_must_not_trail_first_event(l1_log):
    late = datetime(2020, 1, 1, 9, 0, tzinfo=UTC)
    with pytest.raises(ValueError):
        generate_sdlog(l1_log, TimeWindowSpec(1, "hour", origin=late), AspectSpec("general"))


def test_window_wider_than_span_gives_single_step(l1_log):
    sd = generate_sdlog(l1_log, TimeWindowSpec(1, "week"), AspectSpec("general"))
    assert sd.num_steps == 1
    assert sd.values["arrival_rate"] == [3.0]
    assert sd.values["finish_rate"] == [3.0]
    assert sd.values["num_in_process"] == [0.0]


def test_window_validation():
    with pytest.raises(ValueError):
        TimeWindowSpec(0, "hour")
    with pytest.raises(ValueError):
        TimeWindowSpec(1, "fortnight")
    assert TimeWindowSpec(30, "minute").label() == "30m"
    assert TimeWindowSpec(2, "week").width_seconds == 2 * 7 * 86400


def test_active_mask_covers_overlapped_steps():
    # one event spanning 3 hours: no start or completion inside hour 1,
    # but the event overlaps it, so the step is active
    events = [
        Event(
            "c1",
            "long",
            None,
            datetime(2020, 1, 1, 0, 30, tzinfo=UTC),
            datetime(2020, 1, 1, 2, 30, tzinfo=UTC),
        )
    ]
    sd = _hourly(EventLog.build(events))
    assert sd.active_mask == [True, True, True]
    assert sd.values["num_events"] == [0.0, 0.0, 1.0]


def test_inactive_gap_steps():
    events = [
        Event("c1", "A", None, datetime(2020, 1, 1, 0, 10, tzinfo=UTC),
              datetime(2020, 1, 1, 0, 20, tzinfo=UTC)),
        Event("c2", "A", None, datetime(2020, 1, 1, 3, 10, tzinfo=UTC),
              datetime(2020, 1, 1, 3, 20, tzinfo=UTC)),
    ]
    sd = _hourly(EventLog.build(events))
    assert sd.active_mask == [True, False, False, True]
    filtered = filter_active(sd)
    assert filtered.filtered is True
    assert filtered.num_steps == 2
    assert filtered.step_starts == [sd.step_starts[0], sd.step_starts[3]]
    assert filtered.values["arrival_rate"] == [1.0, 1.0]


def test_filter_active_requires_one_active_step(l1_log):
    sd = _hourly(l1_log)
    dead = SDLog(
        window=sd.window,
        step_starts=sd.step_starts,
        variables=sd.variables,
        values=sd.values,
        active_mask=[False] * sd.num_steps,
        aspect=sd.aspect,
    )
    with pytest.raises(AllStepsInactive):
        filter_active(dead)


def test_stock_recurrence_and_totals(closed_loop_log):
    sd = _hourly(closed_loop_log)
    arr, fin, nip = (
        sd.values["arrival_rate"],
        sd.values["finish_rate"],
        sd.values["num_in_process"],
    )
    s = summarize(closed_loop_log)
    assert sum(arr) == s.num_cases
    assert sum(fin) == s.num_cases
    prev = 0.0
    for t in range(sd.num_steps):
        assert nip[t] == prev + arr[t] - fin[t]
        prev = nip[t]


@given(st.integers(min_value=0, max_value=2**31))
@settings(max_examples=60, deadline=None)
def test_conservation_properties_random_logs(seed):
    log = make_random_log(random.Random(seed))
    s = summarize(log)
    dfg = build_dfg(log)
    assert sum(dfg.edges.values()) == s.num_events - s.num_cases
    sd = _hourly(log)
    assert sum(sd.values["arrival_rate"]) == s.num_cases
    assert sum(sd.values["finish_rate"]) == s.num_cases
    assert sum(sd.values["num_events"]) == s.num_events
    prev = 0.0
    for t in range(sd.num_steps):
        assert (
            sd.values["num_in_process"][t]
            == prev + sd.values["arrival_rate"][t] - sd.values["finish_rate"][t]
        )
        prev = sd.values["num_in_process"][t]
    assert prev == 0.0  # every case finishes inside the grid
    # grid invariants
    width = timedelta(seconds=sd.window.width_seconds)
    assert all(b - a == width for a, b in zip(sd.step_starts, sd.step_starts[1:]))
    assert sd.active_mask[0] and sd.active_mask[-1]


def test_top_n_pooling():
    # 12 resources: r00 gets 13 events, r01 12, ... r11 1; top 10 kept,
    # r10 and r11 pooled into _other
    events = []
    t0 = datetime(2020, 5, 1, tzinfo=UTC)
    n = 0
    for r in range(12):
        for _ in range(13 - r):
            events.append(
                Event(f"c{n}", "work", f"r{r:02d}", t0, t0 + timedelta(minutes=5))
            )
            n += 1
    sd = generate_sdlog(
        EventLog.build(events), TimeWindowSpec(1, "hour"), AspectSpec("organizational")
    )
    count_cols = [v for v in sd.variables if v.startswith("workload_")]
    assert count_cols == [f"workload_r{r:02d}" for r in range(10)] + ["workload__other"]
    # r10 contributes 3 events and r11 contributes 2
    assert sd.values["workload__other"] == [5.0]


def test_entity_label_sanitized():
    t0 = datetime(2020, 5, 1, tzinfo=UTC)
    events = [
        Event("c1", "check in", None, t0, t0 + timedelta(minutes=2)),
        Event("c2", "check-in", None, t0, t0 + timedelta(minutes=4)),
    ]
    sd = generate_sdlog(
        EventLog.build(events), TimeWindowSpec(1, "hour"), AspectSpec("activity")
    )
    # both sanitize to check_in; the collision gets a numeric suffix
    assert sorted(v for v in sd.variables if v.startswith("frequency_")) == [
        "frequency_check_in",
        "frequency_check_in_2",
    ]


def test_moving_average_oracle():
    assert moving_average([1.0, 2.0, 3.0, 4.0], 3) == [1.5, 2.0, 3.0, 3.5]
    assert moving_average([5.0], 3) == [5.0]
    assert moving_average([1.0, 2.0], 1) == [1.0, 2.0]
    with pytest.raises(ValueError):
        moving_average([1.0, 2.0], 2)


def test_csv_round_trip(l1_log):
    sd = _hourly(l1_log)
    data = export_sdlog_csv(sd)
    header = data.decode().splitlines()[0]
    assert header.startswith("step_start,active,arrival_rate,")
    again = parse_sdlog_csv(data)
    assert again == sd
    assert export_sdlog_csv(again) == data


def test_csv_round_trip_random_logs():
    rng = random.Random(404)
    for _ in range(20):
        sd = _hourly(make_random_log(rng))
        assert parse_sdlog_csv(export_sdlog_csv(sd)) == sd


def test_csv_active_encoding():
    events = [
        Event("c1", "A", None, datetime(2020, 1, 1, 0, 10, tzinfo=UTC),
              datetime(2020, 1, 1, 0, 20, tzinfo=UTC)),
        Event("c2", "A", None, datetime(2020, 1, 1, 2, 10, tzinfo=UTC),
              datetime(2020, 1, 1, 2, 20, tzinfo=UTC)),
    ]
    sd = _hourly(EventLog.build(events))
    rows = export_sdlog_csv(sd).decode().splitlines()
    assert [r.split(",")[1] for r in rows[1:]] == ["1", "0", "1"]
