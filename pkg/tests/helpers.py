"""Shared test factories: seeded random valid graphs and evidence sets."""

from __future__ import annotations

import numpy as np

from defgraph import DefenseGraph, GateKind, GateSpec, Node, NodeKind, validate


def make_random_graph(rng: np.random.Generator, max_nodes: int = 20,
                      component_gate: str | None = None, flat: bool = False,
                      name: str = "rand") -> DefenseGraph:
    """Random valid defense graph with at most ``max_nodes`` nodes.

    Every CPT entry lands strictly inside (0, 1), so no evidence set can
    be contradictory. Pass ``component_gate='noisy_or'`` to pin the sink
    gate and ``flat=True`` to forbid technique-to-technique edges (the
    shape monotonicity properties are stated for).
    """
    n_tech = int(rng.integers(1, 6))
    n_elem = int(rng.integers(0, max_nodes - 1 - n_tech + 1))
    tech_ids = [f"t{i:02d}" for i in range(n_tech)]
    elem_ids = [f"e{i:02d}" for i in range(n_elem)]

    edges = [(t, "comp") for t in tech_ids]
    if not flat:
        for i in range(n_tech):
            for j in range(i + 1, n_tech):
                if rng.random() < 0.15:
                    edges.append((tech_ids[i], tech_ids[j]))
    for eid in elem_ids:
        fan_out = 2 if (rng.random() < 0.3 and n_tech > 1) else 1
        for t in rng.choice(n_tech, size=fan_out, replace=False):
            edges.append((eid, tech_ids[int(t)]))

    parents: dict[str, list[str]] = {}
    for parent, child in edges:
        parents.setdefault(child, []).append(parent)

    def random_gate(node_id: str, forced: str | None = None) -> GateSpec:
        k = len(parents[node_id])
        transmit = tuple(float(z) for z in rng.uniform(0.1, 0.999, size=k))
        kind = forced or rng.choice(["noisy_and", "noisy_or", "table"], p=[0.4, 0.4, 0.2])
        leak = float(rng.uniform(0.01, 0.3))
        if kind == "table":
            rows = tuple(float(r) for r in rng.uniform(0.05, 0.95, size=2 ** k))
            return GateSpec(GateKind.TABLE, transmit, 0.0, rows)
        return GateSpec(GateKind(kind), transmit, leak)

    nodes = []
    for eid in elem_ids:
        nodes.append(Node(eid, NodeKind.ELEMENT, prior=float(rng.uniform(0.05, 0.95))))
    for tid in tech_ids:
        if parents.get(tid):
            nodes.append(Node(tid, NodeKind.TECHNIQUE, gate=random_gate(tid)))
        else:
            nodes.append(Node(tid, NodeKind.TECHNIQUE, prior=float(rng.uniform(0.05, 0.95))))
    nodes.append(Node("comp", NodeKind.COMPONENT, gate=random_gate("comp", component_gate)))

    graph = DefenseGraph(name, tuple(nodes), tuple(edges),
                         impact=round(float(rng.uniform(0.1, 1.0)), 6))
    assert not validate(graph), "random-graph factory produced an invalid graph"
    return graph


def random_evidence(rng: np.random.Generator, graph: DefenseGraph,
                    max_vars: int = 3) -> dict[str, bool]:
    ids = [n.id for n in graph.nodes]
    m = int(rng.integers(0, min(max_vars, len(ids)) + 1))
    chosen = rng.choice(len(ids), size=m, replace=False)
    return {ids[int(i)]: bool(rng.random() < 0.5) for i in sorted(chosen)}
