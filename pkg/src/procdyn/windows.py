"""Time-window stability scoring.

Each candidate window is judged by how well simple time-series models forecast
the general-aspect SD-log it produces: regular windows give predictable
series. Lower aggregate score = more stable window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AllStepsInactive, NoViableCandidate, SeriesTooShort
from .events import EventLog
from .sdlog import AspectSpec, SDLog, TimeWindowSpec, filter_active, generate_sdlog, moving_average

MODEL_KINDS = ("naive_last", "mean", "linear_trend", "ar_p")

MIN_ACTIVE_STEPS = 10
MAX_AR_ORDER = 5


@dataclass(frozen=True)
class WindowCandidate:
    spec: TimeWindowSpec
    label: str


@dataclass
class Forecaster:
    """One-step-ahead predictor over a history prefix."""

    kind: str
    predict: Callable[[Sequence[float]], float]
    fallback: bool = False  # ar fit was singular; mean model substituted


def _predict_naive_last(history: Sequence[float]) -> float:
    return float(history[-1]) if len(history) else 0.0


def _predict_mean(history: Sequence[float]) -> float:
    return float(np.mean(history)) if len(history) else 0.0


def _predict_linear_trend(history: Sequence[float]) -> float:
    n = len(history)
    if n == 0:
        return 0.0
    if n == 1:
        return float(history[0])
    x = np.arange(n, dtype=float)
    design = np.column_stack([np.ones(n), x])
    coef, *_ = np.linalg.lstsq(design, np.asarray(history, dtype=float), rcond=None)
    return float(coef[0] + coef[1] * n)


def fit_forecaster(series: Sequence[float], model_kind: str) -> Forecaster:
    """Build a one-step forecaster.

    naive_last/mean/linear_trend are parameter-free and recompute from the
    history they are given. ar_p freezes its coefficients here: ordinary least
    squares on lagged values of ``series`` with p = min(5, len/4).
    """
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")
    n = len(series)
    if n < 4:
        raise SeriesTooShort(f"need at least 4 points to fit, got {n}")
    if model_kind == "naive_last":
        return Forecaster(model_kind, _predict_naive_last)
    if model_kind == "mean":
        return Forecaster(model_kind, _predict_mean)
    if model_kind == "linear_trend":
        return Forecaster(model_kind, _predict_linear_trend)

    p = min(MAX_AR_ORDER, n // 4)
    if n < 2 * p + 2:
        raise SeriesTooShort(f"ar_{p} needs at least {2 * p + 2} points, got {n}")
    y = np.asarray(series, dtype=float)
    rows = n - p
    design = np.ones((rows, p + 1))
    for j in range(1, p + 1):
        design[:, j] = y[p - j : n - j]
    target = y[p:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < p + 1:
        return Forecaster("ar_p", _predict_mean, fallback=True)

    def predict(history: Sequence[float]) -> float:
        h = np.asarray(history, dtype=float)
        if len(h) < p:
            pad = np.full(p - len(h), h[0] if len(h) else 0.0)
            h = np.concatenate([pad, h])
        lagged = h[-p:][::-1]  # most recent first, matching design columns
        return float(coef[0] + np.dot(coef[1:], lagged))

    return Forecaster("ar_p", predict)


@dataclass
class CandidateScore:
    label: str
    k: int
    active_fraction: float
    per_variable: dict[str, dict[str, float]] = field(default_factory=dict)
    aggregate_score: float | None = None
    viable: bool = False
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "k": self.k,
            "active_fraction": self.active_fraction,
            "per_variable": self.per_variable,
            "aggregate_score": self.aggregate_score,
            "viable": self.viable,
            "reason": self.reason,
        }


@dataclass
class StabilityReport:
    model_kind: str
    candidates: list[CandidateScore]

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "candidates": [c.to_dict() for c in self.candidates],
        }


def score_series(series: list[float], model_kind: str, split_ratio: float) -> dict[str, float]:
    """Rolling one-step evaluation on the tail after the split point."""
    k = len(series)
    train_len = math.ceil(split_ratio * k)
    if train_len >= k or train_len < 4:
        raise SeriesTooShort(f"split leaves no usable train/test partition for k={k}")
    forecaster = fit_forecaster(series[:train_len], model_kind)
    sq_errors: list[float] = []
    ape: list[float] = []
    skipped_zero = 0
    for t in range(train_len, k):
        pred = forecaster.predict(series[:t])
        err = pred - series[t]
        sq_errors.append(err * err)
        if series[t] == 0:
            skipped_zero += 1
        else:
            ape.append(abs(err) / abs(series[t]))
    return {
        "rmse": float(math.sqrt(sum(sq_errors) / len(sq_errors))),
        "mape": float(sum(ape) / len(ape)) if ape else 0.0,
        "mape_skipped": float(skipped_zero),
    }


def score_sdlog(
    sdlog: SDLog,
    model_kind: str,
    split_ratio: float = 0.8,
    smooth: bool = False,
) -> tuple[dict[str, dict[str, float]], float | None]:
    """Per-variable errors plus the std-normalized aggregate for one SD-log."""
    per_variable: dict[str, dict[str, float]] = {}
    normalized: list[float] = []
    for var in sdlog.variables:
        series = sdlog.values[var]
        if smooth:
            series = moving_average(series, 3)
        metrics = score_series(series, model_kind, split_ratio)
        per_variable[var] = metrics
        std = float(np.std(series))
        if std > 0:
            normalized.append(metrics["rmse"] / std)
    aggregate = float(np.mean(normalized)) if normalized else None
    return per_variable, aggregate


def assess_windows(
    log: EventLog,
    candidates: list[WindowCandidate],
    model_kind: str = "ar_p",
    split_ratio: float = 0.8,
    smooth: bool = False,
) -> StabilityReport:
    """Score every candidate window on the general-aspect SD-log (active steps).

    Candidates whose active SD-log has fewer than 10 steps are kept in the
    report but marked non-viable (insufficient_data) and excluded from ranking.
    """
    if not candidates:
        raise ValueError("at least one candidate window is required")
    labels = [c.label for c in candidates]
    if len(set(labels)) != len(labels):
        raise ValueError("candidate labels must be unique")
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")

    scored: list[CandidateScore] = []
    for cand in candidates:
        sdlog = generate_sdlog(log, cand.spec, AspectSpec("general"))
        total = sdlog.num_steps
        try:
            active = filter_active(sdlog)
        except AllStepsInactive:
            scored.append(CandidateScore(cand.label, 0, 0.0, reason="insufficient_data"))
            continue
        k = active.num_steps
        entry = CandidateScore(cand.label, k, k / total)
        if k < MIN_ACTIVE_STEPS:
            entry.reason = "insufficient_data"
            scored.append(entry)
            continue
        try:
            per_variable, aggregate = score_sdlog(active, model_kind, split_ratio, smooth)
        except SeriesTooShort:
            entry.reason = "insufficient_data"
            scored.append(entry)
            continue
        entry.per_variable = per_variable
        if aggregate is None:
            entry.reason = "all_variables_constant"
        else:
            entry.aggregate_score = aggregate
            entry.viable = True
        scored.append(entry)
    return StabilityReport(model_kind, scored)


def rank_windows(report: StabilityReport) -> list[str]:
    """Viable candidate labels, best (lowest score) first; ties favor more steps."""
    viable = [c for c in report.candidates if c.viable]
    if not viable:
        raise NoViableCandidate("no candidate window produced a usable score")
    return [c.label for c in sorted(viable, key=lambda c: (c.aggregate_score, -c.k))]
