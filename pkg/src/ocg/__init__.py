"""Versioned pedagogical knowledge-graph engine.

Open cognitive graphs (concepts, typed pedagogical relations, provenance),
a trunk/branch governance repository, and a checker for
Concept-Domain-Claim reasoning traces.
"""

from ocg.graph import (
    AnalogousTo,
    CognitiveGraph,
    CommonMisconception,
    ConceptId,
    ConceptNode,
    EdgeRef,
    NodeKind,
    PedagogicalEdge,
    PrerequisiteOf,
    Provenance,
    Scaffolds,
)
from ocg.serialize import canonical_parse, canonical_serialize
from ocg.validation import CheckFinding, CheckReport, check_changeset, provenance_staleness, run_checks

__all__ = [
    "AnalogousTo",
    "CheckFinding",
    "CheckReport",
    "CognitiveGraph",
    "CommonMisconception",
    "ConceptId",
    "ConceptNode",
    "EdgeRef",
    "NodeKind",
    "PedagogicalEdge",
    "PrerequisiteOf",
    "Provenance",
    "Scaffolds",
    "canonical_parse",
    "canonical_serialize",
    "check_changeset",
    "provenance_staleness",
    "run_checks",
]
