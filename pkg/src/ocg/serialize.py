"""Canonical line-oriented text form of a graph (``.ocg``).

::

    OCG 1
    counts domains=2 transitions=1 nodes=3 edges=1
    domain Algebra
    domain Geometry
    transition Geometry Algebra
    node rule pythagorean_theorem@Geometry | Right-triangle side relation | committee | euclid-i-47 | 2025-09-01T00:00:00Z
    edge prerequisite_of@Geometry right_triangle@Geometry pythagorean_theorem@Geometry | committee |  | 2025-09-01T00:00:00Z

Sections appear in the order shown and entries are sorted, so equal graphs
always serialize to identical bytes. The parser accepts entries in any order
but always checks the counts line.
"""

from __future__ import annotations

from ocg.errors import ParseError
from ocg.graph import (
    CognitiveGraph,
    ConceptId,
    ConceptNode,
    EdgeRef,
    NodeKind,
    PedagogicalEdge,
    Provenance,
    check_domain,
)
from ocg.timeutil import parse_ts

HEADER = "OCG 1"


def _split_list(text: str) -> tuple[str, ...]:
    text = text.strip()
    return tuple(p.strip() for p in text.split(";")) if text else ()


def parse_provenance(fields: list[str]) -> Provenance:
    contributors, evidence, stamp = fields
    return Provenance(_split_list(contributors), _split_list(evidence), parse_ts(stamp))


def render_node(node: ConceptNode) -> str:
    """``<kind> <id> | <description> | <contributors> | <evidence> | <last_validated>``"""
    return " | ".join([f"{node.kind.value} {node.id}", node.description, *node.provenance.fields()])


def parse_node(text: str) -> ConceptNode:
    head, *rest = [p.strip() for p in text.split("|")]
    if len(rest) != 4:
        raise ValueError(f"node needs 5 '|'-separated fields, got {len(rest) + 1}")
    parts = head.split()
    if len(parts) != 2:
        raise ValueError(f"node head must be '<kind> <term@Domain>', got {head!r}")
    kind, nid = parts
    return ConceptNode(ConceptId.parse(nid), NodeKind(kind), parse_provenance(rest[1:]), rest[0])


def render_edge(edge: PedagogicalEdge) -> str:
    """``<kind> <src> <dst> | <contributors> | <evidence> | <last_validated>``"""
    return " | ".join([edge.ref.fields(), *edge.provenance.fields()])


def parse_edge(text: str) -> PedagogicalEdge:
    head, *rest = [p.strip() for p in text.split("|")]
    if len(rest) != 3:
        raise ValueError(f"edge needs 4 '|'-separated fields, got {len(rest) + 1}")
    ref = EdgeRef.parse(head)
    return PedagogicalEdge(ref.source, ref.target, ref.kind, parse_provenance(rest))


def render_provenance(provenance: Provenance) -> str:
    return " | ".join(provenance.fields())


def canonical_lines(graph: CognitiveGraph) -> list[str]:
    lines = [
        HEADER,
        f"counts domains={len(graph.declared_domains)} transitions={len(graph.domain_transitions)} "
        f"nodes={len(graph.nodes)} edges={len(graph.edges)}",
    ]
    lines += [f"domain {d}" for d in sorted(graph.declared_domains)]
    lines += [f"transition {a} {b}" for a, b in sorted(graph.domain_transitions)]
    lines += ["node " + render_node(graph.nodes[k]) for k in sorted(graph.nodes)]
    lines += ["edge " + render_edge(graph.edges[k]) for k in sorted(graph.edges)]
    return lines


def canonical_serialize(graph: CognitiveGraph) -> bytes:
    return ("\n".join(canonical_lines(graph)) + "\n").encode("utf-8")


_SECTIONS = ("domain", "transition", "node", "edge")


def canonical_parse(data: bytes | str) -> CognitiveGraph:
    """Parse ``.ocg`` text into a graph.

    Only the syntax is enforced here. Semantic invariants (acyclicity,
    dangling endpoints, ...) are left to :func:`ocg.validation.run_checks`, so
    a corrupted document can still be loaded and diagnosed.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from exc
    else:
        text = data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(f"expected header {HEADER!r}", 1)
    if len(lines) < 2 or not lines[1].startswith("counts "):
        raise ParseError("expected counts line", 2)
    try:
        counts = dict(item.split("=", 1) for item in lines[1].split()[1:])
        expected = {k: int(counts[k]) for k in ("domains", "transitions", "nodes", "edges")}
    except (ValueError, KeyError):
        raise ParseError("malformed counts line", 2) from None

    domains: set[str] = set()
    transitions: set[tuple[str, str]] = set()
    nodes: dict[ConceptId, ConceptNode] = {}
    edges: dict[EdgeRef, PedagogicalEdge] = {}
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        word, _, rest = line.partition(" ")
        if word not in _SECTIONS:
            raise ParseError(f"unknown entry {word!r}", lineno)
        try:
            if word == "domain":
                d = check_domain(rest.strip())
                if d in domains:
                    raise ValueError(f"duplicate domain {d}")
                domains.add(d)
            elif word == "transition":
                parts = rest.split()
                if len(parts) != 2:
                    raise ValueError("transition needs two domains")
                pair = (check_domain(parts[0]), check_domain(parts[1]))
                if pair in transitions:
                    raise ValueError(f"duplicate transition {pair}")
                transitions.add(pair)
            elif word == "node":
                node = parse_node(rest)
                if node.id in nodes:
                    raise ValueError(f"duplicate node {node.id}")
                nodes[node.id] = node
            else:
                edge = parse_edge(rest)
                if edge.ref in edges:
                    raise ValueError(f"duplicate edge {edge.ref}")
                edges[edge.ref] = edge
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None

    actual = {"domains": len(domains), "transitions": len(transitions), "nodes": len(nodes), "edges": len(edges)}
    if actual != expected:
        raise ParseError(f"counts line says {expected} but document holds {actual}", 2)
    return CognitiveGraph(nodes, edges, transitions, domains)
