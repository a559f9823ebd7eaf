"""Causal-loop and stock-flow model structures, JSON forms, and .mdl text IO.

The .mdl profile is deliberately small: a {UTF-8} header, a group banner
naming the model kind, one equation block per element (expression line, units
line, comment line, terminator), and a .Control group with the run parameters.
Link metadata that has no native equation syntax (lag, strength, kind) lives
in each target element's comment line, which is authoritative on parse.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    EmptySelection,
    FlowWithoutStock,
    InvalidElement,
    Lag0AlgebraicCycle,
    UnknownAttachment,
    UnsupportedConstruct,
)
from .relations import RelationCandidate

POLARITIES = ("+", "-")
ELEMENT_KINDS = ("stock", "flow", "auxiliary", "constant")


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    polarity: str
    lag: int
    strength: float
    kind: str = "linear"

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise ValueError(f"bad polarity {self.polarity!r}")
        if self.lag < 0:
            raise ValueError("lag must be >= 0")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError("strength must be within [0, 1]")

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "polarity": self.polarity,
            "lag": self.lag,
            "strength": self.strength,
            "kind": self.kind,
        }


@dataclass
class CLD:
    nodes: list[str]
    edges: list[Edge]

    def __post_init__(self):
        self.nodes = sorted(set(self.nodes))
        self.edges = sorted(self.edges, key=lambda e: (e.source, e.target, e.lag))
        keys = [(e.source, e.target, e.lag) for e in self.edges]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (source, target, lag) edge")
        known = set(self.nodes)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ValueError(f"edge endpoint not among nodes: {e.source}->{e.target}")

    def to_dict(self) -> dict:
        return {"kind": "cld", "nodes": self.nodes, "edges": [e.to_dict() for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "CLD":
        return cls(
            nodes=list(data["nodes"]),
            edges=[
                Edge(
                    e["source"],
                    e["target"],
                    e["polarity"],
                    int(e["lag"]),
                    float(e["strength"]),
                    e.get("kind", "linear"),
                )
                for e in data["edges"]
            ],
        )


@dataclass(frozen=True)
class Stock:
    name: str
    initial_value: float


@dataclass(frozen=True)
class Flow:
    name: str
    inflow_to: str | None = None
    outflow_from: str | None = None


@dataclass(frozen=True)
class Constant:
    name: str
    value: float


@dataclass(frozen=True)
class Link:
    source: str
    target: str
    polarity: str
    lag: int
    kind: str = "linear"

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "polarity": self.polarity,
            "lag": self.lag,
            "kind": self.kind,
        }


@dataclass
class SFD:
    stocks: list[Stock]
    flows: list[Flow]
    auxiliaries: list[str]
    constants: list[Constant]
    links: list[Link]

    def __post_init__(self):
        self.stocks = sorted(self.stocks, key=lambda s: s.name)
        self.flows = sorted(self.flows, key=lambda f: f.name)
        self.auxiliaries = sorted(self.auxiliaries)
        self.constants = sorted(self.constants, key=lambda c: c.name)
        self.links = sorted(self.links, key=lambda l: (l.source, l.target, l.lag))

    def element_names(self) -> list[str]:
        return (
            [s.name for s in self.stocks]
            + [f.name for f in self.flows]
            + list(self.auxiliaries)
            + [c.name for c in self.constants]
        )

    def kind_of(self, name: str) -> str | None:
        if any(s.name == name for s in self.stocks):
            return "stock"
        if any(f.name == name for f in self.flows):
            return "flow"
        if name in self.auxiliaries:
            return "auxiliary"
        if any(c.name == name for c in self.constants):
            return "constant"
        return None

    def to_dict(self) -> dict:
        return {
            "kind": "sfd",
            "stocks": [{"name": s.name, "initial_value": s.initial_value} for s in self.stocks],
            "flows": [
                {"name": f.name, "inflow_to": f.inflow_to, "outflow_from": f.outflow_from}
                for f in self.flows
            ],
            "auxiliaries": list(self.auxiliaries),
            "constants": [{"name": c.name, "value": c.value} for c in self.constants],
            "links": [l.to_dict() for l in self.links],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SFD":
        return cls(
            stocks=[Stock(s["name"], float(s["initial_value"])) for s in data["stocks"]],
            flows=[
                Flow(f["name"], f.get("inflow_to"), f.get("outflow_from")) for f in data["flows"]
            ],
            auxiliaries=list(data["auxiliaries"]),
            constants=[Constant(c["name"], float(c["value"])) for c in data["constants"]],
            links=[
                Link(
                    l["source"],
                    l["target"],
                    l["polarity"],
                    int(l["lag"]),
                    l.get("kind", "linear"),
                )
                for l in data["links"]
            ],
        )


@dataclass(frozen=True)
class ElementSpec:
    kind: str
    inflow_to: str | None = None
    outflow_from: str | None = None
    initial_value: float = 0.0
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")


@dataclass
class ElementMapping:
    entries: dict[str, ElementSpec] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ElementMapping":
        entries = {}
        for node, spec in data.items():
            entries[node] = ElementSpec(
                kind=spec["kind"],
                inflow_to=spec.get("inflow_to"),
                outflow_from=spec.get("outflow_from"),
                initial_value=float(spec.get("initial_value", 0.0)),
                value=float(spec.get("value", 0.0)),
            )
        return cls(entries)


def build_cld(selected: list[RelationCandidate]) -> CLD:
    """Selected relations -> causal-loop diagram.

    Duplicate (source, target, lag) selections collapse to the strongest.
    """
    if not selected:
        raise EmptySelection("no relations selected")
    best: dict[tuple[str, str, int], RelationCandidate] = {}
    for rel in selected:
        key = (rel.source, rel.target, rel.lag)
        prev = best.get(key)
        if prev is None or rel.strength > prev.strength:
            best[key] = rel
    nodes = sorted({r.source for r in best.values()} | {r.target for r in best.values()})
    edges = [
        Edge(r.source, r.target, r.polarity, r.lag, r.strength, r.kind) for r in best.values()
    ]
    return CLD(nodes=nodes, edges=edges)


def derive_sfd(cld: CLD, mapping: ElementMapping | dict[str, ElementSpec]) -> SFD:
    """Apply an element mapping to a CLD; nodes without an entry become auxiliaries."""
    if isinstance(mapping, dict):
        mapping = ElementMapping(dict(mapping))
    for node in mapping.entries:
        if node not in cld.nodes:
            raise InvalidElement(f"mapping names unknown node {node!r}")
    stocks: list[Stock] = []
    flows: list[Flow] = []
    auxiliaries: list[str] = []
    constants: list[Constant] = []
    for node in cld.nodes:
        spec = mapping.entries.get(node, ElementSpec("auxiliary"))
        if spec.kind != "flow" and (spec.inflow_to or spec.outflow_from):
            raise InvalidElement(f"{node!r} is a {spec.kind}; only flows take attachments")
        if spec.kind == "stock":
            stocks.append(Stock(node, spec.initial_value))
        elif spec.kind == "flow":
            flows.append(Flow(node, spec.inflow_to, spec.outflow_from))
        elif spec.kind == "constant":
            constants.append(Constant(node, spec.value))
        else:
            auxiliaries.append(node)
    links = [Link(e.source, e.target, e.polarity, e.lag, e.kind) for e in cld.edges]
    sfd = SFD(stocks, flows, auxiliaries, constants, links)
    validate_sfd(sfd)
    return sfd


def validate_sfd(sfd: SFD) -> None:
    """Check every structural SFD invariant; raises on the first violation."""
    names = sfd.element_names()
    if len(set(names)) != len(names):
        raise InvalidElement("element names must be unique across kinds")
    stock_names = {s.name for s in sfd.stocks}
    for flow in sfd.flows:
        if flow.inflow_to is None and flow.outflow_from is None:
            raise FlowWithoutStock(f"flow {flow.name!r} is attached to no stock")
        for attachment in (flow.inflow_to, flow.outflow_from):
            if attachment is not None and attachment not in stock_names:
                raise UnknownAttachment(
                    f"flow {flow.name!r} attaches to undeclared stock {attachment!r}"
                )
    known = set(names)
    constant_names = {c.name for c in sfd.constants}
    for link in sfd.links:
        if link.source not in known or link.target not in known:
            raise InvalidElement(
                f"link endpoint not declared: {link.source!r} -> {link.target!r}"
            )
        if link.target in constant_names:
            raise InvalidElement(f"constant {link.target!r} cannot have incoming links")
    cycle = _find_lag0_cycle(sfd)
    if cycle:
        raise Lag0AlgebraicCycle(" -> ".join(cycle))


def _find_lag0_cycle(sfd: SFD) -> list[str] | None:
    stock_names = {s.name for s in sfd.stocks}
    adjacency: dict[str, list[str]] = {}
    for link in sfd.links:
        if link.lag == 0 and link.source not in stock_names and link.target not in stock_names:
            adjacency.setdefault(link.source, []).append(link.target)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    path: list[str] = []

    def visit(node: str) -> list[str] | None:
        state[node] = 1
        path.append(node)
        for nxt in adjacency.get(node, ()):
            if state.get(nxt) == 1:
                return path[path.index(nxt) :] + [nxt]
            if state.get(nxt, 0) == 0:
                found = visit(nxt)
                if found:
                    return found
        path.pop()
        state[node] = 2
        return None

    for node in list(adjacency):
        if state.get(node, 0) == 0:
            found = visit(node)
            if found:
                return found
    return None


# --- .mdl text form ---

_BANNER = "*" * 56


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _link_comment(links: list[Link | Edge]) -> str:
    if not links:
        return ""
    parts = []
    for l in sorted(links, key=lambda l: (l.source, l.lag)):
        extra = f" strength={_format_number(l.strength)}" if isinstance(l, Edge) else ""
        parts.append(f"{l.polarity}{l.source} lag={l.lag}{extra} kind={l.kind}")
    return "links: " + "; ".join(parts)


def _block(equation: str, comment: str = "", units: str = "") -> str:
    return f"{equation}\n\t~\t{units}\n\t~\t{comment}\n\t|\n"


def _group(name: str, description: str) -> str:
    return f"{_BANNER}\n\t.{name}\n{_BANNER}~\n\t\t{description}\n\t|\n"


def _dependency_expr(incoming: list[Link | Edge]) -> str:
    seen: dict[str, str] = {}
    for l in sorted(incoming, key=lambda l: (l.source, l.lag)):
        seen.setdefault(l.source, l.polarity)
    deps = ", ".join(("" if pol == "+" else "-") + src for src, pol in sorted(seen.items()))
    return f"A FUNCTION OF( {deps} )" if deps else "A FUNCTION OF( )"


def export_mdl(model: CLD | SFD, horizon: int = 100) -> str:
    """Serialize a model to the .mdl text profile (deterministic)."""
    out = ["{UTF-8}\n"]
    if isinstance(model, CLD):
        out.append(_group("cld", "Causal loop diagram"))
        incoming: dict[str, list[Edge]] = {n: [] for n in model.nodes}
        for e in model.edges:
            incoming[e.target].append(e)
        for node in model.nodes:
            out.append(
                _block(f"{node} = {_dependency_expr(incoming[node])}", _link_comment(incoming[node]))
            )
    else:
        out.append(_group("sfd", "Stock and flow model"))
        incoming_links: dict[str, list[Link]] = {n: [] for n in model.element_names()}
        for l in model.links:
            incoming_links[l.target].append(l)
        for stock in model.stocks:
            inflows = sorted(f.name for f in model.flows if f.inflow_to == stock.name)
            outflows = sorted(f.name for f in model.flows if f.outflow_from == stock.name)
            terms = " + ".join(inflows) if inflows else ""
            for name in outflows:
                terms += f" - {name}" if terms else f"- {name}"
            if not terms:
                terms = "0"
            out.append(
                _block(
                    f"{stock.name} = INTEG( {terms} , {_format_number(stock.initial_value)} )",
                    _link_comment(incoming_links[stock.name]),
                )
            )
        for flow in model.flows:
            out.append(
                _block(
                    f"{flow.name} = {_dependency_expr(incoming_links[flow.name])}",
                    _link_comment(incoming_links[flow.name]),
                )
            )
        for aux in model.auxiliaries:
            out.append(
                _block(
                    f"{aux} = {_dependency_expr(incoming_links[aux])}",
                    _link_comment(incoming_links[aux]),
                )
            )
        for const in model.constants:
            out.append(_block(f"{const.name} = {_format_number(const.value)}"))
    out.append(_group("Control", "Simulation Control Parameters"))
    out.append(_block("INITIAL TIME = 0"))
    out.append(_block(f"FINAL TIME = {int(horizon)}"))
    out.append(_block("TIME STEP = 1"))
    out.append(_block("SAVEPER = 1"))
    return "".join(out)


_LINK_ENTRY = re.compile(
    r"^([+-])(.+?) lag=(\d+)(?: strength=([0-9.eE+-]+))? kind=(\w+)$"
)
_INTEG = re.compile(r"^INTEG\(\s*(.*?)\s*,\s*(.+?)\s*\)$")
_FUNCTION_OF = re.compile(r"^A FUNCTION OF\(\s*(.*?)\s*\)$")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass
class _Block:
    name: str
    expression: str
    comment: str
    group: str
    line: int


def _split_blocks(text: str) -> list[_Block]:
    lines = text.splitlines()
    blocks: list[_Block] = []
    group = ""
    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if not stripped or stripped == "{UTF-8}":
            i += 1
            continue
        if stripped.startswith("****"):
            # group banner: ****, \t.name, ****~, description, \t|
            if i + 1 < len(lines):
                group = lines[i + 1].strip().lstrip(".")
            while i < len(lines) and lines[i].strip() != "|":
                i += 1
            i += 1
            continue
        # equation block: equation line, ~units, ~comment, |
        start = i
        if "=" not in line:
            raise UnsupportedConstruct(f"line {i + 1}: expected an equation, got {stripped!r}")
        name, _, expression = line.partition("=")
        comment = ""
        i += 1
        tilde_count = 0
        while i < len(lines):
            body = lines[i].strip()
            if body == "|":
                i += 1
                break
            if body.startswith("~"):
                tilde_count += 1
                if tilde_count == 2:
                    comment = body[1:].strip()
            i += 1
        blocks.append(_Block(name.strip(), expression.strip(), comment, group, start + 1))
    return blocks


def _parse_links(comment: str, target: str, line: int, with_strength: bool):
    if not comment.startswith("links:"):
        return []
    entries = []
    body = comment[len("links:") :].strip()
    if not body:
        return []
    for raw in body.split(";"):
        raw = raw.strip()
        m = _LINK_ENTRY.match(raw)
        if not m:
            raise UnsupportedConstruct(f"line {line}: bad link annotation {raw!r}")
        polarity, source, lag, strength, kind = m.groups()
        if with_strength:
            entries.append(
                Edge(source, target, polarity, int(lag), float(strength or 0.0), kind)
            )
        else:
            entries.append(Link(source, target, polarity, int(lag), kind))
    return entries


def parse_mdl(text: str) -> CLD | SFD:
    """Parse text produced by :func:`export_mdl`; foreign files are best-effort."""
    blocks = [b for b in _split_blocks(text) if b.group.lower() != "control"]
    kinds = {b.group.lower() for b in blocks if b.group}
    if "sfd" in kinds:
        model_kind = "sfd"
    elif "cld" in kinds:
        model_kind = "cld"
    else:
        model_kind = "sfd" if any(_INTEG.match(b.expression) for b in blocks) else "cld"

    if model_kind == "cld":
        nodes = [b.name for b in blocks]
        edges: list[Edge] = []
        for b in blocks:
            if not _FUNCTION_OF.match(b.expression):
                raise UnsupportedConstruct(f"line {b.line}: unsupported expression {b.expression!r}")
            edges.extend(_parse_links(b.comment, b.name, b.line, with_strength=True))
        return CLD(nodes=nodes, edges=edges)

    stocks: list[Stock] = []
    constants: list[Constant] = []
    links: list[Link] = []
    flow_attachment: dict[str, dict[str, str | None]] = {}
    function_of_names: list[str] = []
    for b in blocks:
        integ = _INTEG.match(b.expression)
        if integ:
            terms, init = integ.groups()
            if not _NUMBER.match(init):
                raise UnsupportedConstruct(f"line {b.line}: non-numeric initial value {init!r}")
            stocks.append(Stock(b.name, float(init)))
            for sign, flow_name in _parse_flow_terms(terms, b.line):
                slot = "inflow_to" if sign == "+" else "outflow_from"
                entry = flow_attachment.setdefault(
                    flow_name, {"inflow_to": None, "outflow_from": None}
                )
                if entry[slot] is not None:
                    raise UnsupportedConstruct(
                        f"line {b.line}: flow {flow_name!r} already has {slot}"
                    )
                entry[slot] = b.name
        elif _FUNCTION_OF.match(b.expression):
            function_of_names.append(b.name)
        elif _NUMBER.match(b.expression):
            constants.append(Constant(b.name, float(b.expression)))
        else:
            raise UnsupportedConstruct(f"line {b.line}: unsupported expression {b.expression!r}")
        links.extend(_parse_links(b.comment, b.name, b.line, with_strength=False))

    flows = [
        Flow(name, spec["inflow_to"], spec["outflow_from"])
        for name, spec in flow_attachment.items()
    ]
    flow_names = set(flow_attachment)
    auxiliaries = [n for n in function_of_names if n not in flow_names]
    sfd = SFD(stocks, flows, auxiliaries, constants, links)
    validate_sfd(sfd)
    return sfd


def _parse_flow_terms(terms: str, line: int) -> list[tuple[str, str]]:
    text = terms.strip()
    if text == "0":
        return []
    out: list[tuple[str, str]] = []
    sign = "+"
    for token in re.split(r"\s+", text):
        if token == "+":
            sign = "+"
        elif token == "-":
            sign = "-"
        elif token.startswith("-"):
            out.append(("-", token[1:]))
            sign = "+"
        else:
            out.append((sign, token))
            sign = "+"
    if not out:
        raise UnsupportedConstruct(f"line {line}: empty INTEG flow expression")
    return out
