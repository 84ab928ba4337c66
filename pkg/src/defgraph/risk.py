"""Risk tables over countermeasure subsets, sensitivity sweeps, and the
vehicle-level security-state vector."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .graph import DefenseGraph
from .inference import threat_likelihood

__all__ = [
    "ComponentAssessment",
    "MAX_TECHNIQUES",
    "RiskRow",
    "RiskTable",
    "SecurityStateVector",
    "assess_vehicle",
    "build_risk_table",
    "risk",
    "sensitivity_sweep",
]

#: Subset enumeration refuses graphs with more techniques than this.
MAX_TECHNIQUES = 16


@dataclass(frozen=True)
class RiskRow:
    """Likelihood and risk for one subset of deployed techniques.

    Bit j of ``subset_mask`` is set iff the j-th technique in lexicographic
    id order is deployed.
    """

    subset_mask: int
    enabled_ids: tuple[str, ...]
    likelihood: float
    risk: float


@dataclass(frozen=True)
class RiskTable:
    """All 2**k subset rows for one scenario, in ascending mask order."""

    scenario_name: str
    impact: float
    rows: tuple[RiskRow, ...]


@dataclass(frozen=True)
class ComponentAssessment:
    component: str
    likelihood: float
    risk: float


@dataclass(frozen=True)
class SecurityStateVector:
    """Per-component security states for a whole vehicle."""

    entries: tuple[ComponentAssessment, ...]

    def __post_init__(self):
        names = [e.component for e in self.entries]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate component names: {', '.join(dupes)}")


def risk(likelihood: float, impact: float) -> float:
    """Risk of a threat: likelihood times impact."""
    if not 0.0 <= likelihood <= 1.0:
        raise ValueError(f"likelihood outside [0, 1]: {likelihood}")
    if not 0.0 <= impact <= 1.0:
        raise ValueError(f"impact outside [0, 1]: {impact}")
    return likelihood * impact


def build_risk_table(graph: DefenseGraph) -> RiskTable:
    """Threat likelihood and risk for every subset of techniques.

    Rows are emitted in ascending mask order; the impact column is the
    graph's impact, constant across subsets (countermeasures change the
    likelihood, never the severity of a successful exploit).
    """
    techniques = graph.technique_ids
    k = len(techniques)
    if k > MAX_TECHNIQUES:
        raise ValueError(f"{k} techniques exceeds the subset cap of {MAX_TECHNIQUES}")
    rows = []
    for mask in range(1 << k):
        enabled = tuple(t for j, t in enumerate(techniques) if mask >> j & 1)
        likelihood = threat_likelihood(graph, enabled)
        rows.append(RiskRow(mask, enabled, likelihood, risk(likelihood, graph.impact)))
    return RiskTable(graph.name, graph.impact, tuple(rows))


def _degraded(graph: DefenseGraph, error: float) -> DefenseGraph:
    """Scale every root prior and transmit coefficient by (1 - error).

    error = 1 is the total-failure limit where no detection ever fires;
    the degraded graph is for inference only and skips re-validation,
    since scaling may push coefficients to the open boundary of (0, 1].
    """
    scale = 1.0 - error
    nodes = []
    for node in graph.nodes:
        if node.prior is not None:
            node = replace(node, prior=node.prior * scale)
        if node.gate is not None and node.gate.transmit:
            gate = replace(node.gate, transmit=tuple(z * scale for z in node.gate.transmit))
            node = replace(node, gate=gate)
        nodes.append(node)
    return DefenseGraph(graph.name, tuple(nodes), graph.edges, graph.impact)


def sensitivity_sweep(graph: DefenseGraph, errors: Iterable[float]) -> dict[float, RiskTable]:
    """Risk tables under increasing countermeasure degradation.

    Each error level scales all detection parameters by (1 - error) and
    rebuilds the full table; error 0 reproduces the unperturbed table
    exactly (scaling by 1.0 is an IEEE identity).
    """
    errors = list(errors)
    for eps in errors:
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"error level outside [0, 1]: {eps}")
    return {eps: build_risk_table(_degraded(graph, eps)) for eps in errors}


def assess_vehicle(
    graphs: Sequence[DefenseGraph],
    enabled: Sequence[Iterable[str]] | None = None,
) -> SecurityStateVector:
    """Security-state vector across components, one entry per graph.

    ``enabled`` gives the deployed technique subset per graph; omit it to
    assess every graph with all techniques deployed.
    """
    if enabled is None:
        enabled = [g.technique_ids for g in graphs]
    if len(enabled) != len(graphs):
        raise ValueError(
            f"{len(graphs)} graphs but {len(enabled)} enabled subsets")
    entries = []
    for graph, subset in zip(graphs, enabled):
        likelihood = threat_likelihood(graph, subset)
        entries.append(ComponentAssessment(graph.name, likelihood, risk(likelihood, graph.impact)))
    return SecurityStateVector(tuple(entries))
