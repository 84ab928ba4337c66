"""Bayesian defense graphs for quantitative component-security assessment.

Build a DAG of countermeasure elements and techniques guarding one
component, derive detection priors from EVITA/CVSS ratings, run exact
probabilistic inference, and report threat likelihood and risk for every
subset of deployed countermeasures.
"""

from .graph import (
    CONFIDENCE_LEVELS,
    DEFAULT_LEAK,
    Cpt,
    CycleError,
    DefenseGraph,
    GateKind,
    GateSpec,
    Node,
    NodeKind,
    ValidationError,
    Violation,
    expand_gate,
    node_cpt,
    topological_order,
    validate,
)
from .inference import (
    ENUMERATION_NODE_CAP,
    ContradictionError,
    Distribution,
    Evidence,
    Factor,
    GraphTooLargeError,
    enumerate_joint,
    forward_sample,
    threat_likelihood,
    variable_elimination,
)
from .risk import (
    MAX_TECHNIQUES,
    ComponentAssessment,
    RiskRow,
    RiskTable,
    SecurityStateVector,
    assess_vehicle,
    build_risk_table,
    risk,
    sensitivity_sweep,
)
from .scenario import (
    ScenarioSyntaxError,
    bundled_gps_text,
    emit_risk_table,
    format_probability,
    load_bundled_gps,
    parse_scenario,
    serialize_scenario,
)
from .scoring import (
    CvssRating,
    EvitaImpactRating,
    EvitaLikelihoodRating,
    cvss_prior,
    evita_prior,
    impact_score,
)

__version__ = "0.1.0"

__all__ = [
    "CONFIDENCE_LEVELS",
    "ComponentAssessment",
    "ContradictionError",
    "Cpt",
    "CvssRating",
    "CycleError",
    "DEFAULT_LEAK",
    "DefenseGraph",
    "Distribution",
    "ENUMERATION_NODE_CAP",
    "Evidence",
    "EvitaImpactRating",
    "EvitaLikelihoodRating",
    "Factor",
    "GateKind",
    "GateSpec",
    "GraphTooLargeError",
    "MAX_TECHNIQUES",
    "Node",
    "NodeKind",
    "RiskRow",
    "RiskTable",
    "ScenarioSyntaxError",
    "SecurityStateVector",
    "ValidationError",
    "Violation",
    "assess_vehicle",
    "build_risk_table",
    "bundled_gps_text",
    "cvss_prior",
    "emit_risk_table",
    "enumerate_joint",
    "evita_prior",
    "expand_gate",
    "format_probability",
    "forward_sample",
    "impact_score",
    "load_bundled_gps",
    "node_cpt",
    "parse_scenario",
    "risk",
    "sensitivity_sweep",
    "serialize_scenario",
    "threat_likelihood",
    "topological_order",
    "validate",
    "variable_elimination",
    "__version__",
]
