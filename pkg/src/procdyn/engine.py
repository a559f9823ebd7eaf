"""Equation fitting, explicit-Euler simulation, and validation against the SD-log.

Equations are linear forms in lagged inputs, fit by ordinary least squares on
the SD-log; a squared regressor is added for inputs linked with kind
nonlinear. Stocks carry no equation: they integrate their attached flows with
dt fixed at one SD-log step.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Diverged,
    MissingEquation,
    NotEnoughSteps,
    UnknownVariable,
    UnmatchedElement,
)
from .models import SFD
from .sdlog import SDLog

EXOGENOUS_POLICIES = ("replay", "hold_mean")

DEFAULT_OVERFLOW_GUARD = 1e12


@dataclass(frozen=True)
class Term:
    element: str
    lag: int
    coefficient: float
    power: int = 1

    def to_dict(self) -> dict:
        return {
            "element": self.element,
            "lag": self.lag,
            "coefficient": self.coefficient,
            "power": self.power,
        }


@dataclass(frozen=True)
class Equation:
    element: str
    form: str  # linear_form | replay | constant
    intercept: float = 0.0
    terms: tuple[Term, ...] = ()
    variable: str | None = None  # replay source column
    value: float = 0.0  # constant value
    flag: str | None = None  # e.g. singular_fit

    def to_dict(self) -> dict:
        out: dict = {"element": self.element, "form": self.form}
        if self.form == "linear_form":
            out["intercept"] = self.intercept
            out["terms"] = [t.to_dict() for t in self.terms]
        elif self.form == "replay":
            out["variable"] = self.variable
        else:
            out["value"] = self.value
        if self.flag:
            out["flag"] = self.flag
        return out


@dataclass
class EquationSet:
    equations: dict[str, Equation]

    def to_dict(self) -> dict:
        return {"equations": [self.equations[name].to_dict() for name in sorted(self.equations)]}

    @classmethod
    def from_dict(cls, data: dict) -> "EquationSet":
        equations = {}
        for raw in data["equations"]:
            equations[raw["element"]] = Equation(
                element=raw["element"],
                form=raw["form"],
                intercept=float(raw.get("intercept", 0.0)),
                terms=tuple(
                    Term(t["element"], int(t["lag"]), float(t["coefficient"]), int(t.get("power", 1)))
                    for t in raw.get("terms", [])
                ),
                variable=raw.get("variable"),
                value=float(raw.get("value", 0.0)),
                flag=raw.get("flag"),
            )
        return cls(equations)


@dataclass(frozen=True)
class SimulationConfig:
    horizon: int
    initial_values: dict[str, float] | None = None
    exogenous_policy: str = "replay"
    overflow_guard: float = DEFAULT_OVERFLOW_GUARD

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.exogenous_policy not in EXOGENOUS_POLICIES:
            raise ValueError(f"unknown exogenous policy {self.exogenous_policy!r}")


@dataclass
class SimulationTrace:
    elements: list[str]  # canonical order
    horizon: int
    values: dict[str, list[float]]  # each length horizon + 1
    notes: list[str] = field(default_factory=list)

    def series(self, name: str) -> list[float]:
        return self.values[name]

    def to_dict(self) -> dict:
        return {
            "elements": self.elements,
            "horizon": self.horizon,
            "values": {name: self.values[name] for name in self.elements},
            "notes": self.notes,
        }


def _series_of(sdlog: SDLog, name: str, role: str) -> np.ndarray:
    if name not in sdlog.values:
        raise UnmatchedElement(f"{role} {name!r} has no matching SD-log variable")
    return np.asarray(sdlog.values[name], dtype=float)


def fit_equations(
    sfd: SFD,
    sdlog: SDLog,
    exogenous_policy: str = "replay",
) -> EquationSet:
    """Fit one equation per non-stock element from the SD-log.

    Linked elements get a least-squares linear form over their lagged inputs;
    link kind nonlinear contributes an additional squared regressor. Elements
    without incoming links follow the exogenous policy. A singular or
    underdetermined fit falls back to the sample mean, flagged.
    """
    if exogenous_policy not in EXOGENOUS_POLICIES:
        raise ValueError(f"unknown exogenous policy {exogenous_policy!r}")
    constant_values = {c.name: c.value for c in sfd.constants}
    stock_names = {s.name for s in sfd.stocks}
    incoming: dict[str, list] = {}
    for link in sfd.links:
        incoming.setdefault(link.target, []).append(link)

    equations: dict[str, Equation] = {}
    for name in sfd.element_names():
        if name in stock_names:
            continue
        if name in constant_values:
            equations[name] = Equation(name, "constant", value=constant_values[name])
            continue
        links = incoming.get(name, [])
        # Constant inputs carry no per-step signal; the intercept absorbs them.
        links = [l for l in links if l.source not in constant_values]
        if not links:
            series = _series_of(sdlog, name, "element")
            if exogenous_policy == "replay":
                equations[name] = Equation(name, "replay", variable=name)
            else:
                equations[name] = Equation(name, "constant", value=float(series.mean()))
            continue
        equations[name] = _fit_linear_form(name, links, sdlog)
    return EquationSet(equations)


def _fit_linear_form(name: str, links: list, sdlog: SDLog) -> Equation:
    y = _series_of(sdlog, name, "element")
    k = len(y)
    regressors: list[tuple[str, int, int, np.ndarray]] = []  # element, lag, power, series
    for link in sorted(links, key=lambda l: (l.source, l.lag)):
        x = _series_of(sdlog, link.source, "linked input")
        regressors.append((link.source, link.lag, 1, x))
        if link.kind == "nonlinear":
            regressors.append((link.source, link.lag, 2, x * x))
    max_lag = max(lag for _, lag, _, _ in regressors)
    rows = k - max_lag
    n_params = len(regressors) + 1
    if rows < n_params:
        return Equation(name, "constant", value=float(y.mean()), flag="singular_fit")
    design = np.ones((rows, n_params))
    for j, (_, lag, _, x) in enumerate(regressors, start=1):
        design[:, j] = x[max_lag - lag : k - lag]
    target = y[max_lag:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < n_params:
        return Equation(name, "constant", value=float(y.mean()), flag="singular_fit")
    terms = tuple(
        Term(element, lag, float(coef[j]), power)
        for j, (element, lag, power, _) in enumerate(regressors, start=1)
    )
    return Equation(name, "linear_form", intercept=float(coef[0]), terms=terms)


def _canonical_elements(sfd: SFD) -> list[str]:
    return (
        [s.name for s in sfd.stocks]
        + [f.name for f in sfd.flows]
        + list(sfd.auxiliaries)
        + [c.name for c in sfd.constants]
    )


def _evaluation_order(sfd: SFD, equations: dict[str, Equation], lag0_only: bool) -> list[str]:
    """Topological order of the linear_form elements.

    lag0_only orders the per-step evaluation (lagged inputs come from
    history). The step-0 warm-up orders by every link, because lagged reads
    fall back to step-0 values there; leftover cycles are broken by name and
    unresolved reads default to 0.
    """
    linear = [name for name, eq in equations.items() if eq.form == "linear_form"]
    linear_set = set(linear)
    deps: dict[str, set[str]] = {name: set() for name in linear}
    lag0_deps: dict[str, set[str]] = {name: set() for name in linear}
    for link in sfd.links:
        if link.target in linear_set and link.source in linear_set:
            if link.lag == 0:
                lag0_deps[link.target].add(link.source)
            deps[link.target].add(link.source)
    effective = lag0_deps if lag0_only else deps
    order: list[str] = []
    remaining = set(linear)
    while remaining:
        ready = sorted(n for n in remaining if not (effective[n] & remaining))
        if not ready:
            # Lagged cycle: pick a node whose lag-0 inputs are all settled
            # (one always exists; the lag-0 subgraph is acyclic). Its lagged
            # reads fall back to 0 and are flagged by the caller.
            ready = [sorted(n for n in remaining if not (lag0_deps[n] & remaining))[0]]
        for n in ready:
            order.append(n)
            remaining.discard(n)
    return order


def simulate(
    sfd: SFD,
    equations: EquationSet,
    sdlog: SDLog,
    config: SimulationConfig,
) -> SimulationTrace:
    """Run the model for config.horizon steps; the trace covers steps 0..H.

    Each step evaluates replay/constant elements, then linear forms in
    dependency order, then integrates stocks: S[t+1] = S[t] + (in - out).
    Lagged reads before step 0 use the input's step-0 value.
    """
    eqs = equations.equations
    stock_names = [s.name for s in sfd.stocks]
    non_stock = [n for n in _canonical_elements(sfd) if n not in set(stock_names)]
    for name in non_stock:
        if name not in eqs:
            raise MissingEquation(f"element {name!r} has no equation")

    H = config.horizon
    k = sdlog.num_steps
    uses_replay = any(eq.form == "replay" for eq in eqs.values())
    if uses_replay and H > k:
        raise ValueError(f"horizon {H} exceeds SD-log length {k} under replay")

    guard = config.overflow_guard
    initial = dict(config.initial_values or {})
    values: dict[str, list[float]] = {n: [0.0] * (H + 1) for n in _canonical_elements(sfd)}
    notes: list[str] = []

    def check(name: str, step: int, v: float) -> float:
        if not math.isfinite(v) or abs(v) > guard:
            raise Diverged(
                f"element {name!r} diverged at step {step}",
                detail={"element": name, "step": step, "value": repr(v)},
            )
        return v

    def evaluate(name: str, t: int, warm_up: bool) -> float:
        eq = eqs[name]
        if eq.form == "constant":
            return eq.value
        if eq.form == "replay":
            return float(sdlog.values[eq.variable][min(t, k - 1)])
        total = eq.intercept
        for term in eq.terms:
            idx = t - term.lag
            if idx < 0:
                idx = 0
                if warm_up and term.element not in resolved:
                    notes_set.add(term.element)
                    continue  # unresolved warm-up read counts as 0
            x = values[term.element][idx]
            total += term.coefficient * (x if term.power == 1 else x * x)
        return total

    for stock in sfd.stocks:
        values[stock.name][0] = check(stock.name, 0, initial.get(stock.name, stock.initial_value))

    order_warm_up = _evaluation_order(sfd, eqs, lag0_only=False)
    order = _evaluation_order(sfd, eqs, lag0_only=True)
    replay_or_const = [n for n in non_stock if eqs[n].form != "linear_form"]

    resolved: set[str] = set(stock_names) | set(replay_or_const)
    notes_set: set[str] = set()
    for name in replay_or_const:
        values[name][0] = check(name, 0, evaluate(name, 0, warm_up=True))
    for name in order_warm_up:
        values[name][0] = check(name, 0, evaluate(name, 0, warm_up=True))
        resolved.add(name)
    if notes_set:
        notes.append(
            "step-0 warm-up read unresolved lagged inputs as 0: " + ", ".join(sorted(notes_set))
        )

    inflows = {s.name: [f.name for f in sfd.flows if f.inflow_to == s.name] for s in sfd.stocks}
    outflows = {
        s.name: [f.name for f in sfd.flows if f.outflow_from == s.name] for s in sfd.stocks
    }

    for t in range(1, H + 1):
        for name in stock_names:
            net = sum(values[f][t - 1] for f in inflows[name]) - sum(
                values[f][t - 1] for f in outflows[name]
            )
            values[name][t] = check(name, t, values[name][t - 1] + net)
        for name in replay_or_const:
            values[name][t] = check(name, t, evaluate(name, t, warm_up=False))
        for name in order:
            values[name][t] = check(name, t, evaluate(name, t, warm_up=False))

    return SimulationTrace(_canonical_elements(sfd), H, values, notes)


def export_trace_csv(trace: SimulationTrace) -> bytes:
    out = io.StringIO()
    out.write("step," + ",".join(trace.elements) + "\n")
    for t in range(trace.horizon + 1):
        row = [str(t)] + [repr(trace.values[name][t]) for name in trace.elements]
        out.write(",".join(row) + "\n")
    return out.getvalue().encode("utf-8")


def parse_trace_csv(data: bytes | str) -> SimulationTrace:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    if header[:1] != ["step"]:
        raise ValueError("trace CSV must start with a step column")
    elements = header[1:]
    values: dict[str, list[float]] = {name: [] for name in elements}
    for line in lines[1:]:
        parts = line.split(",")
        for name, raw in zip(elements, parts[1:]):
            values[name].append(float(raw))
    return SimulationTrace(elements, len(lines) - 2, values)


def rmse(real: list[float], sim: list[float]) -> float:
    diffs = [(r - s) ** 2 for r, s in zip(real, sim)]
    return math.sqrt(sum(diffs) / len(diffs))


def mape(real: list[float], sim: list[float]) -> tuple[float, int]:
    """Mean absolute percentage error as a fraction; zero true values skipped."""
    terms = [abs(s - r) / abs(r) for r, s in zip(real, sim) if r != 0]
    skipped = len(real) - len(terms)
    return (sum(terms) / len(terms) if terms else 0.0), skipped


def ks_statistic(a: list[float], b: list[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (no p-value)."""
    xs = np.sort(np.asarray(a, dtype=float))
    ys = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, pooled, side="right") / len(xs)
    cdf_y = np.searchsorted(ys, pooled, side="right") / len(ys)
    return float(np.max(np.abs(cdf_x - cdf_y)))


@dataclass(frozen=True)
class VariableValidation:
    variable: str
    rmse: float
    mape: float
    mape_skipped: int
    mean_real: float
    mean_sim: float
    std_real: float
    std_sim: float
    ks_statistic: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "rmse": self.rmse,
            "mape": self.mape,
            "mape_skipped": self.mape_skipped,
            "mean_real": self.mean_real,
            "mean_sim": self.mean_sim,
            "std_real": self.std_real,
            "std_sim": self.std_sim,
            "ks_statistic": self.ks_statistic,
            "verdict": self.verdict,
        }


@dataclass
class ValidationReport:
    variables: list[VariableValidation]
    mape_threshold: float
    ks_threshold: float
    aligned_steps: int

    def to_dict(self) -> dict:
        return {
            "variables": [v.to_dict() for v in self.variables],
            "mape_threshold": self.mape_threshold,
            "ks_threshold": self.ks_threshold,
            "aligned_steps": self.aligned_steps,
        }

    def verdict_of(self, variable: str) -> str:
        for v in self.variables:
            if v.variable == variable:
                return v.verdict
        raise UnknownVariable(f"variable {variable!r} not in report")

    @classmethod
    def from_dict(cls, data: dict) -> "ValidationReport":
        return cls(
            variables=[
                VariableValidation(
                    variable=v["variable"],
                    rmse=float(v["rmse"]),
                    mape=float(v["mape"]),
                    mape_skipped=int(v["mape_skipped"]),
                    mean_real=float(v["mean_real"]),
                    mean_sim=float(v["mean_sim"]),
                    std_real=float(v["std_real"]),
                    std_sim=float(v["std_sim"]),
                    ks_statistic=float(v["ks_statistic"]),
                    verdict=v["verdict"],
                )
                for v in data["variables"]
            ],
            mape_threshold=float(data["mape_threshold"]),
            ks_threshold=float(data["ks_threshold"]),
            aligned_steps=int(data["aligned_steps"]),
        )


def validate(
    trace: SimulationTrace,
    sdlog: SDLog,
    variables: list[str],
    mape_threshold: float = 0.2,
    ks_threshold: float = 0.3,
) -> ValidationReport:
    """Compare simulated and real series over the aligned steps 1..min(H, k-1).

    Step 0 is the shared initial state and is excluded. A variable passes when
    both mape <= mape_threshold and ks <= ks_threshold.
    """
    H = trace.horizon
    k = sdlog.num_steps
    last = min(H, k - 1)
    if last < 2:
        raise NotEnoughSteps(f"only {max(last, 0)} aligned steps; need at least 2")
    results: list[VariableValidation] = []
    for name in variables:
        if name not in trace.values:
            raise UnknownVariable(f"variable {name!r} missing from the trace")
        if name not in sdlog.values:
            raise UnknownVariable(f"variable {name!r} missing from the SD-log")
        real = [float(v) for v in sdlog.values[name][1 : last + 1]]
        sim = [float(v) for v in trace.values[name][1 : last + 1]]
        error = rmse(real, sim)
        pct, skipped = mape(real, sim)
        ks = ks_statistic(real, sim)
        verdict = "pass" if (pct <= mape_threshold and ks <= ks_threshold) else "fail"
        results.append(
            VariableValidation(
                variable=name,
                rmse=error,
                mape=pct,
                mape_skipped=skipped,
                mean_real=float(np.mean(real)),
                mean_sim=float(np.mean(sim)),
                std_real=float(np.std(real)),
                std_sim=float(np.std(sim)),
                ks_statistic=ks,
                verdict=verdict,
            )
        )
    return ValidationReport(results, mape_threshold, ks_threshold, last)
