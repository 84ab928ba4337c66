"""Scenario file parsing, canonical serialization, and report emission.

Scenario files are line-oriented UTF-8 text; ``#`` starts a comment and
attributes are whitespace-separated ``key=value`` pairs:

    scenario <name>
    impact value=<p>
    impact safety=<0..3> privacy=<0..3> operational=<0..3> financial=<0..3>
    node <id> kind=element|technique|component
         [prior=<p> | evita=<e>,<k>,<w>,<q> | cvss=<base>,<temporal>]
         [label=<text>]
    gate <id> variant=noisy_and|noisy_or [leak=<p>]
    gate <id> variant=table rows=<p>,<p>,...
    edge <parent> <child> [zeta=<p>]

``evita`` quadruples are expertise, knowledge of target, window of
opportunity, equipment; ``cvss`` takes base and temporal scores. Edge
lines may only reference nodes declared on earlier lines (gate lines may
appear anywhere). Rating declarations are converted to probabilities on
ingest, and every probability is rounded to six decimal places (ties to
even) — the canonical precision — so parse/serialize round-trips are
exact.
"""

from __future__ import annotations

import csv
import io
import math
import shlex
from importlib import resources

from .graph import (
    DEFAULT_LEAK,
    DefenseGraph,
    GateKind,
    GateSpec,
    Node,
    NodeKind,
)
from .risk import RiskTable
from .scoring import (
    CvssRating,
    EvitaImpactRating,
    EvitaLikelihoodRating,
    cvss_prior,
    evita_prior,
    impact_score,
)

__all__ = [
    "ScenarioSyntaxError",
    "bundled_gps_text",
    "emit_risk_table",
    "format_probability",
    "load_bundled_gps",
    "parse_scenario",
    "serialize_scenario",
]

_EVITA_IMPACT_KEYS = ("safety", "privacy", "operational", "financial")


class ScenarioSyntaxError(Exception):
    """Malformed scenario text; carries the offending line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


def _round6(value: float) -> float:
    return round(value, 6)


def _column(raw: str, token: str) -> int:
    pos = raw.find(token)
    return pos + 1 if pos >= 0 else 1


def _attrs(tokens: list[str], raw: str, lineno: int, allowed: set[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise ScenarioSyntaxError(
                f"expected key=value attribute, got '{token}'", lineno, _column(raw, token))
        if key not in allowed:
            raise ScenarioSyntaxError(
                f"unknown attribute '{key}'", lineno, _column(raw, token))
        if key in out:
            raise ScenarioSyntaxError(
                f"duplicate attribute '{key}'", lineno, _column(raw, token))
        out[key] = value
    return out


def _float(text: str, what: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioSyntaxError(f"bad {what} '{text}'", lineno) from None


def _int(text: str, what: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioSyntaxError(f"bad {what} '{text}'", lineno) from None


def _floats(text: str, what: str, lineno: int) -> list[float]:
    return [_float(part, what, lineno) for part in text.split(",")]


def _node_prior(attrs: dict[str, str], lineno: int) -> float | None:
    sources = [k for k in ("prior", "evita", "cvss") if k in attrs]
    if not sources:
        return None
    if len(sources) > 1:
        raise ScenarioSyntaxError(
            f"conflicting prior sources: {', '.join(sources)}", lineno)
    source = sources[0]
    if source == "prior":
        return _round6(_float(attrs["prior"], "prior", lineno))
    if source == "evita":
        parts = attrs["evita"].split(",")
        if len(parts) != 4:
            raise ScenarioSyntaxError(
                "evita rating needs 4 comma-separated levels", lineno)
        try:
            rating = EvitaLikelihoodRating(*(_int(p, "evita level", lineno) for p in parts))
        except ValueError as exc:
            raise ScenarioSyntaxError(str(exc), lineno) from None
        return _round6(evita_prior(rating))
    parts = attrs["cvss"].split(",")
    if len(parts) != 2:
        raise ScenarioSyntaxError("cvss rating needs base,temporal scores", lineno)
    try:
        rating = CvssRating(*(_float(p, "cvss score", lineno) for p in parts))
    except ValueError as exc:
        raise ScenarioSyntaxError(str(exc), lineno) from None
    return _round6(cvss_prior(rating))


def parse_scenario(text: str) -> DefenseGraph:
    """Parse scenario text into a validated :class:`DefenseGraph`.

    Raises :class:`ScenarioSyntaxError` with line/column on malformed
    input and forwards :class:`ValidationError` when the described graph
    breaks a structural invariant.
    """
    name = ""
    saw_scenario = False
    impact: float | None = None
    nodes: dict[str, Node] = {}
    gates: dict[str, GateSpec] = {}
    gate_lines: dict[str, int] = {}
    edges: list[tuple[str, str]] = []
    zetas: dict[tuple[str, str], float] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScenarioSyntaxError(str(exc), lineno) from None
        if not tokens:
            continue
        directive, *rest = tokens

        if directive == "scenario":
            if saw_scenario:
                raise ScenarioSyntaxError("duplicate scenario directive", lineno)
            if len(rest) != 1:
                raise ScenarioSyntaxError("scenario takes exactly one name", lineno)
            name = rest[0]
            saw_scenario = True

        elif directive == "impact":
            if impact is not None:
                raise ScenarioSyntaxError("duplicate impact directive", lineno)
            attrs = _attrs(rest, raw, lineno, {"value", *_EVITA_IMPACT_KEYS})
            if "value" in attrs:
                if len(attrs) > 1:
                    raise ScenarioSyntaxError(
                        "impact takes either value= or an EVITA rating, not both", lineno)
                impact = _round6(_float(attrs["value"], "impact", lineno))
            else:
                if set(attrs) != set(_EVITA_IMPACT_KEYS):
                    missing = sorted(set(_EVITA_IMPACT_KEYS) - set(attrs))
                    raise ScenarioSyntaxError(
                        f"impact rating is missing {', '.join(missing)}", lineno)
                try:
                    rating = EvitaImpactRating(
                        *(_int(attrs[k], k, lineno) for k in _EVITA_IMPACT_KEYS))
                except ValueError as exc:
                    raise ScenarioSyntaxError(str(exc), lineno) from None
                impact = _round6(impact_score(rating))

        elif directive == "node":
            if not rest or "=" in rest[0]:
                raise ScenarioSyntaxError("node directive needs an id", lineno)
            nid, *attr_tokens = rest
            if nid in nodes:
                raise ScenarioSyntaxError(f"duplicate node '{nid}'", lineno)
            attrs = _attrs(attr_tokens, raw, lineno, {"kind", "prior", "evita", "cvss", "label"})
            if "kind" not in attrs:
                raise ScenarioSyntaxError(f"node '{nid}' is missing kind=", lineno)
            try:
                kind = NodeKind(attrs["kind"])
            except ValueError:
                raise ScenarioSyntaxError(
                    f"unknown node kind '{attrs['kind']}'", lineno) from None
            nodes[nid] = Node(nid, kind, attrs.get("label", ""), _node_prior(attrs, lineno))

        elif directive == "gate":
            if not rest or "=" in rest[0]:
                raise ScenarioSyntaxError("gate directive needs a node id", lineno)
            nid, *attr_tokens = rest
            if nid in gates:
                raise ScenarioSyntaxError(f"duplicate gate for '{nid}'", lineno)
            attrs = _attrs(attr_tokens, raw, lineno, {"variant", "leak", "rows"})
            if "variant" not in attrs:
                raise ScenarioSyntaxError(f"gate for '{nid}' is missing variant=", lineno)
            try:
                kind = GateKind(attrs["variant"])
            except ValueError:
                raise ScenarioSyntaxError(
                    f"unknown gate variant '{attrs['variant']}'", lineno) from None
            if kind is GateKind.TABLE:
                if "leak" in attrs:
                    raise ScenarioSyntaxError("table gates take rows=, not leak=", lineno)
                if "rows" not in attrs:
                    raise ScenarioSyntaxError(f"table gate for '{nid}' needs rows=", lineno)
                rows = tuple(_round6(r) for r in _floats(attrs["rows"], "table row", lineno))
                gates[nid] = GateSpec(kind, (), 0.0, rows)
            else:
                if "rows" in attrs:
                    raise ScenarioSyntaxError("only table gates take rows=", lineno)
                leak = DEFAULT_LEAK
                if "leak" in attrs:
                    leak = _round6(_float(attrs["leak"], "leak", lineno))
                gates[nid] = GateSpec(kind, (), leak)
            gate_lines[nid] = lineno

        elif directive == "edge":
            if len(rest) < 2 or "=" in rest[0] or "=" in rest[1]:
                raise ScenarioSyntaxError("edge directive needs parent and child ids", lineno)
            parent, child, *attr_tokens = rest
            attrs = _attrs(attr_tokens, raw, lineno, {"zeta"})
            for endpoint in (parent, child):
                if endpoint not in nodes:
                    raise ScenarioSyntaxError(
                        f"edge references undeclared node '{endpoint}'", lineno)
            if (parent, child) in zetas:
                raise ScenarioSyntaxError(f"duplicate edge {parent} -> {child}", lineno)
            zeta = 1.0
            if "zeta" in attrs:
                zeta = _round6(_float(attrs["zeta"], "zeta", lineno))
            edges.append((parent, child))
            zetas[(parent, child)] = zeta

        else:
            raise ScenarioSyntaxError(f"unknown directive '{directive}'", lineno)

    # attach gates, wiring each one's transmit coefficients from the
    # declared edge zetas in lexicographic parent order
    parent_sets: dict[str, list[str]] = {}
    for parent, child in edges:
        parent_sets.setdefault(child, []).append(parent)
    final_nodes = []
    for nid, node in nodes.items():
        gate = gates.pop(nid, None)
        if gate is not None:
            transmit = tuple(zetas[(p, nid)] for p in sorted(parent_sets.get(nid, [])))
            gate = GateSpec(gate.kind, transmit, gate.leak, gate.rows)
            node = Node(node.id, node.kind, node.label, node.prior, gate)
        final_nodes.append(node)
    if gates:
        nid = sorted(gates)[0]
        raise ScenarioSyntaxError(
            f"gate declared for unknown node '{nid}'", gate_lines[nid])

    graph = DefenseGraph(name, tuple(final_nodes), tuple(edges),
                         1.0 if impact is None else impact)
    return graph.validated()


def _p6(value: float) -> str:
    return f"{value:.6f}"


def serialize_scenario(graph: DefenseGraph) -> str:
    """Canonical scenario text for a valid graph.

    Nodes and gates are sorted by id, edges by (parent, child), and every
    probability prints with six decimal places, so output is deterministic
    and ``parse(serialize(g)) == g`` whenever g's probabilities carry the
    canonical six-decimal precision (always true for parsed graphs).
    """
    lines = []
    if graph.name:
        lines.append(f"scenario {shlex.quote(graph.name)}")
    lines.append(f"impact value={_p6(graph.impact)}")
    for node in graph.nodes:
        parts = [f"node {node.id}", f"kind={node.kind.value}"]
        if node.prior is not None:
            parts.append(f"prior={_p6(node.prior)}")
        if node.label:
            parts.append(f"label={shlex.quote(node.label)}")
        lines.append(" ".join(parts))
    for node in graph.nodes:
        if node.gate is None:
            continue
        if node.gate.kind is GateKind.TABLE:
            rows = ",".join(_p6(r) for r in node.gate.rows)
            lines.append(f"gate {node.id} variant=table rows={rows}")
        else:
            lines.append(
                f"gate {node.id} variant={node.gate.kind.value} leak={_p6(node.gate.leak)}")
    for parent, child in graph.edges:
        gate = graph.node(child).gate
        zeta = 1.0
        if gate is not None and gate.transmit:
            zeta = gate.transmit[graph.parents_of(child).index(parent)]
        lines.append(f"edge {parent} {child} zeta={_p6(zeta)}")
    return "\n".join(lines) + "\n"


def format_probability(value: float) -> str:
    """Fixed-point probability with seven significant digits and at least
    six decimal places (ties round to even): 1 -> '1.000000' and
    0.053 -> '0.05300000'.

    Seven, not six, so that a reader multiplying the re-parsed likelihood
    and impact columns lands back on the printed risk within 5e-7.
    """
    if value == 0.0:
        return "0.000000"
    exponent = math.floor(math.log10(abs(value)))
    decimals = 6 if exponent >= 0 else 6 - exponent
    return f"{value:.{decimals}f}"


def emit_risk_table(table: RiskTable, format: str = "text") -> str:
    """Render a risk table as aligned text or CSV.

    Both formats carry the same four columns: subset mask, deployed
    technique ids joined by '+', likelihood, and risk.
    """
    header = ("mask", "techniques", "likelihood", "risk")
    rows = [
        (str(r.subset_mask), "+".join(r.enabled_ids),
         format_probability(r.likelihood), format_probability(r.risk))
        for r in table.rows
    ]
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return out.getvalue()
    if format != "text":
        raise ValueError(f"unknown format '{format}'")
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(4)]
    lines = []
    for row in (header, *rows):
        cells = [row[0].rjust(widths[0]), row[1].ljust(widths[1]),
                 row[2].rjust(widths[2]), row[3].rjust(widths[3])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def bundled_gps_text() -> str:
    """Text of the bundled GPS anti-spoofing scenario."""
    return resources.files("defgraph").joinpath("data/gps_anti_spoofing.scn").read_text("utf-8")


def load_bundled_gps() -> DefenseGraph:
    """Parsed and validated bundled GPS anti-spoofing scenario."""
    return parse_scenario(bundled_gps_text())
