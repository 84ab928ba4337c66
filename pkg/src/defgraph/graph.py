"""Defense-graph data model: nodes, gates, CPT expansion, and validation.

A defense graph is a DAG whose roots are countermeasure elements (observable
checks), whose interior nodes are detection techniques, and whose unique sink
is the protected component. Every node is binary: true means "this node
successfully detects the attack".
"""

from __future__ import annotations

import heapq
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

__all__ = [
    "CONFIDENCE_LEVELS",
    "Cpt",
    "CycleError",
    "DEFAULT_LEAK",
    "DefenseGraph",
    "GateKind",
    "GateSpec",
    "Node",
    "NodeKind",
    "ValidationError",
    "Violation",
    "expand_gate",
    "node_cpt",
    "topological_order",
    "validate",
]

_ID_RE = re.compile(r"[a-z][a-z0-9_]*\Z")

#: Discrete edge-confidence levels used for gate coefficients, strongest
#: first: almost sure, probable, highly expected, expected.
CONFIDENCE_LEVELS = (0.995, 0.99, 0.95, 0.90)

#: Default gate leak; complement of the strongest confidence level.
DEFAULT_LEAK = 0.005


class NodeKind(Enum):
    ELEMENT = "element"
    TECHNIQUE = "technique"
    COMPONENT = "component"


class GateKind(Enum):
    NOISY_AND = "noisy_and"
    NOISY_OR = "noisy_or"
    TABLE = "table"


@dataclass(frozen=True)
class GateSpec:
    """How an internal node combines its parents' detection states.

    ``transmit`` holds one per-parent reliability coefficient in (0, 1],
    ordered by lexicographic parent id (the same order CPT rows are indexed
    by). ``rows`` is used only by TABLE gates and lists P(child=true) for
    every parent bit pattern.
    """

    kind: GateKind
    transmit: tuple[float, ...]
    leak: float = DEFAULT_LEAK
    rows: tuple[float, ...] = ()

    @classmethod
    def noisy_and(cls, transmit, leak: float = DEFAULT_LEAK) -> "GateSpec":
        return cls(GateKind.NOISY_AND, tuple(transmit), leak)

    @classmethod
    def noisy_or(cls, transmit, leak: float = DEFAULT_LEAK) -> "GateSpec":
        return cls(GateKind.NOISY_OR, tuple(transmit), leak)

    @classmethod
    def table(cls, rows, transmit=()) -> "GateSpec":
        return cls(GateKind.TABLE, tuple(transmit), 0.0, tuple(rows))


@dataclass(frozen=True)
class Node:
    """One binary detection variable.

    Roots carry a prior and no gate; internal nodes carry a gate and no
    prior. Violations of that shape are reported by :func:`validate`, not
    rejected at construction, so broken graphs can be built and inspected.
    """

    id: str
    kind: NodeKind
    label: str = ""
    prior: float | None = None
    gate: GateSpec | None = None


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table over binary parents.

    ``rows[pattern]`` is P(child=true) where bit j of ``pattern`` is set iff
    ``parent_ids[j]`` is true. P(false) is the implicit complement. Roots
    have an empty ``parent_ids`` and a single row holding the prior.
    """

    parent_ids: tuple[str, ...]
    rows: tuple[float, ...]


@dataclass(frozen=True)
class Violation:
    code: str
    subject: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ValidationError(Exception):
    """A graph failed structural validation."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class CycleError(Exception):
    """The graph contains a directed cycle."""


@dataclass(frozen=True)
class DefenseGraph:
    """Immutable defense graph.

    Nodes and edges are canonically sorted on construction, so two graphs
    with the same content compare equal regardless of declaration order.
    Instances are hashable and safe to share across threads.
    """

    name: str
    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]
    impact: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @cached_property
    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        acc: dict[str, list[str]] = defaultdict(list)
        for parent, child in self.edges:
            acc[child].append(parent)
        return {child: tuple(sorted(ps)) for child, ps in acc.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        acc: dict[str, list[str]] = defaultdict(list)
        for parent, child in self.edges:
            acc[parent].append(child)
        return {parent: tuple(sorted(cs)) for parent, cs in acc.items()}

    def node(self, node_id: str) -> Node:
        return self.node_map[node_id]

    def parents_of(self, node_id: str) -> tuple[str, ...]:
        """Parent ids in lexicographic order (the CPT row-indexing order)."""
        return self._parents.get(node_id, ())

    def children_of(self, node_id: str) -> tuple[str, ...]:
        return self._children.get(node_id, ())

    @cached_property
    def component_id(self) -> str:
        for n in self.nodes:
            if n.kind is NodeKind.COMPONENT:
                return n.id
        raise ValueError("graph has no component node")

    @cached_property
    def technique_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.kind is NodeKind.TECHNIQUE)

    @cached_property
    def element_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.kind is NodeKind.ELEMENT)

    @cached_property
    def technique_membership(self) -> dict[str, frozenset[str]]:
        """Element ids feeding each technique, derived from the edge list."""
        members = {}
        for tid in self.technique_ids:
            members[tid] = frozenset(
                p for p in self.parents_of(tid)
                if self.node_map[p].kind is NodeKind.ELEMENT
            )
        return members

    def validated(self) -> "DefenseGraph":
        """Return the graph, raising :class:`ValidationError` if invalid."""
        violations = validate(self)
        if violations:
            raise ValidationError(violations)
        return self


def validate(graph: DefenseGraph) -> list[Violation]:
    """Check every structural and probabilistic invariant.

    Returns one :class:`Violation` per broken invariant, naming the
    offending node or edge; an empty list means the graph is valid.
    """
    out: list[Violation] = []
    ids = [n.id for n in graph.nodes]
    known = set(ids)

    if not 0.0 <= graph.impact <= 1.0:
        out.append(Violation("impact-range", (), f"impact {graph.impact} outside [0, 1]"))

    for i in range(1, len(ids)):
        if ids[i] == ids[i - 1]:
            out.append(Violation("duplicate-node", (ids[i],), f"node id '{ids[i]}' declared more than once"))
    for n in graph.nodes:
        if not _ID_RE.match(n.id):
            out.append(Violation("bad-id", (n.id,), f"node id '{n.id}' does not match [a-z][a-z0-9_]*"))

    good_edges = []
    seen_edges = set()
    for parent, child in graph.edges:
        if parent not in known or child not in known:
            missing = parent if parent not in known else child
            out.append(Violation("unknown-endpoint", (parent, child), f"edge {parent}->{child} references unknown node '{missing}'"))
            continue
        if parent == child:
            out.append(Violation("self-loop", (parent,), f"self-loop on '{parent}'"))
            continue
        if (parent, child) in seen_edges:
            out.append(Violation("duplicate-edge", (parent, child), f"duplicate edge {parent}->{child}"))
            continue
        seen_edges.add((parent, child))
        good_edges.append((parent, child))

    cyclic = _cyclic_nodes(known, good_edges)
    if cyclic:
        names = ", ".join(sorted(cyclic))
        out.append(Violation("cycle", tuple(sorted(cyclic)), f"cycle among {{{names}}}"))

    parents: dict[str, list[str]] = defaultdict(list)
    children: dict[str, list[str]] = defaultdict(list)
    for parent, child in good_edges:
        parents[child].append(parent)
        children[parent].append(child)

    components = [n for n in graph.nodes if n.kind is NodeKind.COMPONENT]
    if len(components) != 1:
        out.append(Violation(
            "component-count", tuple(n.id for n in components),
            f"expected exactly one component node, found {len(components)}"))
    else:
        comp = components[0]
        if children[comp.id]:
            out.append(Violation("component-not-sink", (comp.id,), f"component '{comp.id}' has outgoing edges"))
        for n in graph.nodes:
            if n.id != comp.id and not children[n.id]:
                out.append(Violation("extra-sink", (n.id,), f"non-component node '{n.id}' has no outgoing edges"))
        reachable = _reverse_reachable(comp.id, good_edges)
        for n in graph.nodes:
            if n.kind is NodeKind.TECHNIQUE and n.id not in reachable:
                out.append(Violation("unreachable-technique", (n.id,), f"technique '{n.id}' has no path to the component"))
        for pid in parents[comp.id]:
            if graph.node_map[pid].kind is not NodeKind.TECHNIQUE:
                out.append(Violation("component-parent-kind", (pid,), f"component parent '{pid}' is not a technique"))

    for n in graph.nodes:
        if n.kind is NodeKind.ELEMENT and parents[n.id]:
            out.append(Violation("element-with-parents", (n.id,), f"element '{n.id}' has parents"))

    for n in graph.nodes:
        k = len(parents[n.id])
        if k == 0:
            if n.prior is None:
                out.append(Violation("missing-prior", (n.id,), f"root '{n.id}' has no prior"))
            elif not 0.0 <= n.prior <= 1.0:
                out.append(Violation("prior-range", (n.id,), f"prior of '{n.id}' outside [0, 1]"))
            if n.gate is not None:
                out.append(Violation("unexpected-gate", (n.id,), f"root '{n.id}' declares a gate"))
            continue
        if n.prior is not None:
            out.append(Violation("unexpected-prior", (n.id,), f"internal node '{n.id}' declares a prior"))
        if n.gate is None:
            out.append(Violation("missing-gate", (n.id,), f"internal node '{n.id}' has no gate"))
            continue
        gate = n.gate
        if not 0.0 <= gate.leak < 1.0:
            out.append(Violation("leak-range", (n.id,), f"leak of '{n.id}' outside [0, 1)"))
        if len(gate.transmit) != k:
            out.append(Violation(
                "transmit-count", (n.id,),
                f"'{n.id}' has {len(gate.transmit)} transmit coefficients for {k} parents"))
        for zeta in gate.transmit:
            if not 0.0 < zeta <= 1.0:
                out.append(Violation("zeta-range", (n.id,), f"transmit coefficient of '{n.id}' outside (0, 1]"))
                break
        if gate.kind is GateKind.TABLE:
            if len(gate.rows) != 2 ** k:
                out.append(Violation(
                    "row-count", (n.id,),
                    f"table gate of '{n.id}' has {len(gate.rows)} rows for {k} parents (expected {2 ** k})"))
            for row in gate.rows:
                if not 0.0 <= row <= 1.0:
                    out.append(Violation("row-range", (n.id,), f"table row of '{n.id}' outside [0, 1]"))
                    break

    return out


def _cyclic_nodes(known: set[str], edges: list[tuple[str, str]]) -> set[str]:
    """Nodes left over after Kahn peeling, i.e. everything on a cycle."""
    indegree = {nid: 0 for nid in known}
    children: dict[str, list[str]] = defaultdict(list)
    for parent, child in edges:
        indegree[child] += 1
        children[parent].append(child)
    ready = [nid for nid, deg in indegree.items() if deg == 0]
    remaining = set(known)
    while ready:
        nid = ready.pop()
        remaining.discard(nid)
        for c in children[nid]:
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
    return remaining


def _reverse_reachable(sink: str, edges: list[tuple[str, str]]) -> set[str]:
    rev: dict[str, list[str]] = defaultdict(list)
    for parent, child in edges:
        rev[child].append(parent)
    seen = {sink}
    stack = [sink]
    while stack:
        for p in rev[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def topological_order(graph: DefenseGraph) -> list[str]:
    """Parents-first node ordering, ties broken by lexicographic id.

    Deterministic for a given graph. Raises :class:`CycleError` if the
    edges contain a directed cycle.
    """
    indegree = {n.id: 0 for n in graph.nodes}
    for parent, child in graph.edges:
        if parent in indegree and child in indegree:
            indegree[child] += 1
    heap = [nid for nid, deg in indegree.items() if deg == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        nid = heapq.heappop(heap)
        order.append(nid)
        for child in graph.children_of(nid):
            if child not in indegree:
                continue
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(heap, child)
    if len(order) != len(graph.nodes):
        stuck = sorted(set(indegree) - set(order))
        raise CycleError(f"cycle among {{{', '.join(stuck)}}}")
    return order


def expand_gate(node: Node, parent_ids) -> Cpt:
    """Expand a gated node into its full conditional probability table.

    ``parent_ids`` must already be in lexicographic order; row ``pattern``
    has bit j set iff parent j detects. Noisy-AND puts the product of the
    transmit coefficients on the all-detect row and the leak everywhere
    else; noisy-OR composes per-parent failure probabilities; table rows
    are copied verbatim.
    """
    parent_ids = tuple(parent_ids)
    k = len(parent_ids)
    if node.gate is None:
        raise ValueError(f"node '{node.id}' has no gate to expand")
    gate = node.gate
    if gate.kind is GateKind.TABLE:
        if len(gate.rows) != 2 ** k:
            raise ValueError(
                f"table gate of '{node.id}' has {len(gate.rows)} rows for {k} parents")
        return Cpt(parent_ids, gate.rows)
    if len(gate.transmit) != k:
        raise ValueError(
            f"gate of '{node.id}' has {len(gate.transmit)} transmit coefficients "
            f"for {k} parents")
    if gate.kind is GateKind.NOISY_AND:
        all_true = math.prod(gate.transmit)
        full = (1 << k) - 1
        rows = tuple(all_true if pattern == full else gate.leak for pattern in range(1 << k))
        return Cpt(parent_ids, rows)
    # noisy-OR: share subproducts of the per-parent miss probabilities by
    # peeling one set bit per pattern instead of re-multiplying from scratch
    miss = [1.0] * (1 << k)
    fail = [1.0 - z for z in gate.transmit]
    for pattern in range(1, 1 << k):
        low = (pattern & -pattern).bit_length() - 1
        miss[pattern] = miss[pattern & (pattern - 1)] * fail[low]
    pass_free = 1.0 - gate.leak
    return Cpt(parent_ids, tuple(1.0 - pass_free * m for m in miss))


def node_cpt(graph: DefenseGraph, node_id: str) -> Cpt:
    """CPT of any node: a one-row prior for roots, the expanded gate otherwise."""
    node = graph.node(node_id)
    parent_ids = graph.parents_of(node_id)
    if not parent_ids:
        if node.prior is None:
            raise ValueError(f"root '{node_id}' has no prior")
        return Cpt((), (node.prior,))
    return expand_gate(node, parent_ids)
