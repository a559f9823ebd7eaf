"""Lagged relation detection between SD-log variables.

For every ordered variable pair and every lag, the source series is aligned
with the lag-shifted target series and tested for linear (Pearson), monotonic
(Spearman) and nonlinear (quadratic-fit) association. One candidate at most is
emitted per ordered pair: the best lag of the strongest qualifying kind, with
kind precedence linear > monotonic > nonlinear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllColumnsConstant, InsufficientSupport, TooFewSteps, UnknownVariable
from .sdlog import SDLog

KINDS = ("linear", "monotonic", "nonlinear")

# Strengths within this tolerance count as ties; the smaller lag wins.
_TIE_EPS = 1e-12


@dataclass(frozen=True)
class RelationCandidate:
    source: str
    target: str
    lag: int
    kind: str
    coefficient: float
    support: int
    auto: bool = False  # self-relation at lag >= 1

    @property
    def polarity(self) -> str:
        return "+" if self.coefficient >= 0 else "-"

    @property
    def strength(self) -> float:
        return abs(self.coefficient)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "lag": self.lag,
            "kind": self.kind,
            "coefficient": self.coefficient,
            "polarity": self.polarity,
            "strength": self.strength,
            "support": self.support,
            "auto": self.auto,
        }


@dataclass
class PairDetail:
    source: str
    target: str
    lag: int
    support: int
    pearson: float | None
    spearman: float | None
    linear_fit: tuple[float, float, float]  # slope, intercept, r2
    quadratic_fit: tuple[float, float, float, float]  # a, b, c, r2
    points: list[tuple[float, float]]

    def to_dict(self) -> dict:
        slope, intercept, lin_r2 = self.linear_fit
        a, b, c, quad_r2 = self.quadratic_fit
        return {
            "source": self.source,
            "target": self.target,
            "lag": self.lag,
            "support": self.support,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "fits": {
                "linear": {"slope": slope, "intercept": intercept, "r2": lin_r2},
                "quadratic": {"a": a, "b": b, "c": c, "r2": quad_r2},
            },
            "points": [[x, y] for x, y in self.points],
        }


def _clamp(value: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, value))


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc)))
    if denom == 0:
        return None
    return _clamp(float(np.dot(xc, yc)) / denom, -1.0, 1.0)


def _ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties averaged."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    sorted_values = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _spearman(x: np.ndarray, y: np.ndarray) -> float | None:
    return _pearson(_ranks(x), _ranks(y))


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    # degenerate inputs report an exactly-flat fit, not solver noise
    if float(np.std(x)) == 0 or float(np.std(y)) == 0:
        return 0.0, float(np.mean(y)), 0.0
    design = np.column_stack([x, np.ones(len(x))])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0]), float(coef[1]), _r2(y, design @ coef)


def _quadratic_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    if float(np.std(x)) == 0 or float(np.std(y)) == 0:
        return 0.0, 0.0, float(np.mean(y)), 0.0
    design = np.column_stack([x * x, x, np.ones(len(x))])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a, b, c = (float(v) for v in coef)
    return a, b, c, _r2(y, design @ coef)


def _r2(y: np.ndarray, predicted: np.ndarray) -> float:
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        return 0.0
    ss_res = float(np.sum((y - predicted) ** 2))
    return _clamp(1.0 - ss_res / ss_tot, 0.0, 1.0)


def _nonlinear_coefficient(x: np.ndarray, y: np.ndarray) -> float:
    """Signed sqrt(R2) of the quadratic fit.

    Sign follows the fitted trend across the observed range; a symmetric fit
    (no net trend) falls back to the curvature sign.
    """
    a, b, c, r2 = _quadratic_fit(x, y)
    lo, hi = float(x.min()), float(x.max())
    left = a * lo * lo + b * lo + c
    right = a * hi * hi + b * hi + c
    trend = right - left
    # solver noise must not decide the sign of a symmetric fit
    tol = 1e-9 * max(abs(left), abs(right), 1.0)
    if abs(trend) > tol:
        sign = math.copysign(1.0, trend)
    else:
        sign = math.copysign(1.0, a) if abs(a) > tol else 1.0
    return sign * math.sqrt(r2)


def constant_columns(sdlog: SDLog) -> list[str]:
    return [v for v in sdlog.variables if float(np.std(sdlog.values[v])) == 0]


def detect_relations(
    sdlog: SDLog,
    max_lag: int = 5,
    threshold: float = 0.7,
    min_support: int = 10,
) -> list[RelationCandidate]:
    """Scan all ordered pairs and lags 0..max_lag for strong relations.

    Zero-variance columns are skipped (see :func:`constant_columns`).
    Self-pairs are tested at lag >= 1 only and flagged ``auto``. Tied
    strengths resolve to the smallest lag.
    """
    k = sdlog.num_steps
    if k < min_support + max_lag:
        raise TooFewSteps(
            f"need at least {min_support + max_lag} steps for max_lag={max_lag}, got {k}"
        )
    columns = {
        v: np.asarray(sdlog.values[v], dtype=float)
        for v in sdlog.variables
        if float(np.std(sdlog.values[v])) > 0
    }
    if not columns:
        raise AllColumnsConstant("every SD-log column has zero variance")

    out: list[RelationCandidate] = []
    names = list(columns)
    for source in names:
        for target in names:
            best: dict[str, tuple[float, int, float, int]] = {}
            start_lag = 1 if source == target else 0
            for lag in range(start_lag, max_lag + 1):
                support = k - lag
                if support < min_support:
                    break
                x = columns[source][: k - lag]
                y = columns[target][lag:]
                if float(np.std(x)) == 0 or float(np.std(y)) == 0:
                    continue
                coefficients = {
                    "linear": _pearson(x, y),
                    "monotonic": _spearman(x, y),
                    "nonlinear": _nonlinear_coefficient(x, y),
                }
                for kind, coef in coefficients.items():
                    if coef is None:
                        continue
                    prev = best.get(kind)
                    if prev is None or abs(coef) > prev[0] + _TIE_EPS:
                        best[kind] = (abs(coef), lag, coef, support)
            for kind in KINDS:  # precedence order
                entry = best.get(kind)
                if entry is not None and entry[0] >= threshold:
                    out.append(
                        RelationCandidate(
                            source=source,
                            target=target,
                            lag=entry[1],
                            kind=kind,
                            coefficient=entry[2],
                            support=entry[3],
                            auto=source == target,
                        )
                    )
                    break
    out.sort(key=lambda r: (r.source, r.target, r.lag))
    return out


def detail_pair(sdlog: SDLog, source: str, target: str, lag: int) -> PairDetail:
    """Full diagnostics for one (source, target, lag) pair."""
    for name in (source, target):
        if name not in sdlog.variables:
            raise UnknownVariable(f"variable {name!r} not in SD-log")
    if lag < 0:
        raise ValueError("lag must be >= 0")
    k = sdlog.num_steps
    support = k - lag
    if support < 3:
        raise InsufficientSupport(f"only {max(support, 0)} aligned points at lag {lag}, need 3")
    x = np.asarray(sdlog.values[source], dtype=float)[: k - lag]
    y = np.asarray(sdlog.values[target], dtype=float)[lag:]
    return PairDetail(
        source=source,
        target=target,
        lag=lag,
        support=support,
        pearson=_pearson(x, y),
        spearman=_spearman(x, y),
        linear_fit=_linear_fit(x, y),
        quadratic_fit=_quadratic_fit(x, y),
        points=[(float(a), float(b)) for a, b in zip(x, y)],
    )
