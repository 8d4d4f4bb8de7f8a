"""Graph mutations as data: ops, changesets, inverses and their text form.

Changeset text mirrors the ``.ocg`` line grammar with op prefixes::

    author ms-science-teachers
    rationale Insert scaffolds between energy as property and conservation
    severity significant
    -edge prerequisite_of@Physics energy_as_property@Physics energy_conservation@Physics
    +node concept energy_transfer@Physics | ... | teachers | report-1 | 2026-02-01T00:00:00Z
    +edge scaffolds@Physics energy_transfer@Physics system_boundaries@Physics | teachers |  | 2026-02-01T00:00:00Z
    ~prov node energy_transfer@Physics | teachers;researchers | report-1 | 2026-03-01T00:00:00Z
    +transition Geometry Algebra
    +domain Chemistry
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Iterable, Union

from ocg.errors import ApplicationError, ParseError
from ocg.graph import (
    CognitiveGraph,
    ConceptId,
    ConceptNode,
    EdgeRef,
    ElementRef,
    PedagogicalEdge,
    Provenance,
    check_domain,
)
from ocg.serialize import parse_edge, parse_node, parse_provenance, render_edge, render_node, render_provenance


class Severity(str, Enum):
    MINOR = "minor"
    SIGNIFICANT = "significant"
    CRITICAL = "critical"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def __ge__(self, other):  # type: ignore[override]
        return self.rank >= Severity(other).rank

    def __gt__(self, other):  # type: ignore[override]
        return self.rank > Severity(other).rank

    def __le__(self, other):  # type: ignore[override]
        return self.rank <= Severity(other).rank

    def __lt__(self, other):  # type: ignore[override]
        return self.rank < Severity(other).rank


_RANK = {Severity.MINOR: 0, Severity.SIGNIFICANT: 1, Severity.CRITICAL: 2}


def max_severity(*levels: Severity) -> Severity:
    return max((Severity(s) for s in levels), key=lambda s: s.rank)


# --- ops ----------------------------------------------------------------------


@dataclass(frozen=True)
class AddNode:
    node: ConceptNode

    def element(self) -> str:
        return str(self.node.id)

    def render(self) -> str:
        return "+node " + render_node(self.node)


@dataclass(frozen=True)
class RemoveNode:
    node_id: ConceptId

    def element(self) -> str:
        return str(self.node_id)

    def render(self) -> str:
        return f"-node {self.node_id}"


@dataclass(frozen=True)
class AddEdge:
    edge: PedagogicalEdge

    def element(self) -> str:
        return str(self.edge.ref)

    def render(self) -> str:
        return "+edge " + render_edge(self.edge)


@dataclass(frozen=True)
class RemoveEdge:
    ref: EdgeRef

    def element(self) -> str:
        return str(self.ref)

    def render(self) -> str:
        return f"-edge {self.ref.fields()}"


@dataclass(frozen=True)
class UpdateProvenance:
    ref: ElementRef
    provenance: Provenance

    def element(self) -> str:
        return str(self.ref)

    def render(self) -> str:
        if isinstance(self.ref, ConceptId):
            head = f"~prov node {self.ref}"
        else:
            head = f"~prov edge {self.ref.fields()}"
        return head + " | " + render_provenance(self.provenance)


@dataclass(frozen=True)
class DeclareTransition:
    src: str
    dst: str

    def element(self) -> str:
        return f"transition:{self.src}->{self.dst}"

    def render(self) -> str:
        return f"+transition {self.src} {self.dst}"


@dataclass(frozen=True)
class RemoveTransition:
    src: str
    dst: str

    def element(self) -> str:
        return f"transition:{self.src}->{self.dst}"

    def render(self) -> str:
        return f"-transition {self.src} {self.dst}"


@dataclass(frozen=True)
class DeclareDomain:
    domain: str

    def element(self) -> str:
        return f"domain:{self.domain}"

    def render(self) -> str:
        return f"+domain {self.domain}"


@dataclass(frozen=True)
class RetractDomain:
    domain: str

    def element(self) -> str:
        return f"domain:{self.domain}"

    def render(self) -> str:
        return f"-domain {self.domain}"


ChangeOp = Union[
    AddNode, RemoveNode, AddEdge, RemoveEdge, UpdateProvenance,
    DeclareTransition, RemoveTransition, DeclareDomain, RetractDomain,
]


def op_provenance(op: ChangeOp) -> Provenance | None:
    if isinstance(op, AddNode):
        return op.node.provenance
    if isinstance(op, AddEdge):
        return op.edge.provenance
    if isinstance(op, UpdateProvenance):
        return op.provenance
    return None


def touched(op: ChangeOp) -> set[str]:
    """Element refs an op touches, including the endpoints of edge ops."""
    refs = {op.element()}
    if isinstance(op, AddEdge):
        refs |= {str(op.edge.source), str(op.edge.target)}
    elif isinstance(op, (RemoveEdge,)):
        refs |= {str(op.ref.source), str(op.ref.target)}
    elif isinstance(op, UpdateProvenance) and isinstance(op.ref, EdgeRef):
        refs |= {str(op.ref.source), str(op.ref.target)}
    return refs


def apply_op(graph: CognitiveGraph, op: ChangeOp, now: datetime | None = None) -> CognitiveGraph:
    """Apply one op through the guarded graph API (raises GraphError subclasses)."""
    if isinstance(op, AddNode):
        return graph.add_node(op.node, now)
    if isinstance(op, RemoveNode):
        return graph.remove_node(op.node_id)
    if isinstance(op, AddEdge):
        return graph.add_edge(op.edge, now)
    if isinstance(op, RemoveEdge):
        return graph.remove_edge(op.ref)
    if isinstance(op, UpdateProvenance):
        return graph.update_provenance(op.ref, op.provenance, now)
    if isinstance(op, DeclareTransition):
        return graph.declare_transition(op.src, op.dst)
    if isinstance(op, RemoveTransition):
        return graph.retract_transition(op.src, op.dst)
    if isinstance(op, DeclareDomain):
        return graph.declare_domain(op.domain)
    if isinstance(op, RetractDomain):
        return graph.retract_domain(op.domain)
    raise TypeError(f"not a change op: {op!r}")


def apply_op_unchecked(graph: CognitiveGraph, op: ChangeOp) -> CognitiveGraph:
    """Apply one op structurally, skipping every invariant guard.

    Used for speculative application and for replaying stored history, so
    that invalid results can be reported by the checker instead of refused.
    Raises ApplicationError only when the op cannot be expressed at all.
    """
    if isinstance(op, AddNode):
        existing = graph.nodes.get(op.node.id)
        if existing is not None:
            if existing == op.node:
                return graph
            raise ApplicationError(f"{op.render()}: node exists with different content")
        nodes = dict(graph.nodes)
        nodes[op.node.id] = op.node
        return graph.replace(nodes=nodes, declared_domains=graph.declared_domains | {op.node.id.domain})
    if isinstance(op, RemoveNode):
        if op.node_id not in graph.nodes:
            raise ApplicationError(f"{op.render()}: node not found")
        nodes = dict(graph.nodes)
        del nodes[op.node_id]
        return graph.replace(nodes=nodes)
    if isinstance(op, AddEdge):
        ref = op.edge.ref
        existing = graph.edges.get(ref)
        if existing is not None:
            if existing == op.edge:
                return graph
            raise ApplicationError(f"{op.render()}: edge exists with different provenance")
        edges = dict(graph.edges)
        edges[ref] = op.edge
        return graph.replace(edges=edges)
    if isinstance(op, RemoveEdge):
        if op.ref not in graph.edges:
            raise ApplicationError(f"{op.render()}: edge not found")
        edges = dict(graph.edges)
        del edges[op.ref]
        return graph.replace(edges=edges)
    if isinstance(op, UpdateProvenance):
        if op.ref not in graph:
            raise ApplicationError(f"{op.render()}: element not found")
        return graph.update_provenance(op.ref, op.provenance, now=op.provenance.last_validated)
    if isinstance(op, DeclareTransition):
        return graph.replace(domain_transitions=graph.domain_transitions | {(op.src, op.dst)})
    if isinstance(op, RemoveTransition):
        if (op.src, op.dst) not in graph.domain_transitions:
            raise ApplicationError(f"{op.render()}: transition not declared")
        return graph.replace(domain_transitions=graph.domain_transitions - {(op.src, op.dst)})
    if isinstance(op, DeclareDomain):
        return graph.replace(declared_domains=graph.declared_domains | {op.domain})
    if isinstance(op, RetractDomain):
        if op.domain not in graph.declared_domains:
            raise ApplicationError(f"{op.render()}: domain not declared")
        return graph.replace(declared_domains=graph.declared_domains - {op.domain})
    raise TypeError(f"not a change op: {op!r}")


def is_satisfied(graph: CognitiveGraph, op: ChangeOp) -> bool:
    """True when applying ``op`` would leave ``graph`` unchanged."""
    if isinstance(op, AddNode):
        return graph.nodes.get(op.node.id) == op.node
    if isinstance(op, RemoveNode):
        return op.node_id not in graph.nodes
    if isinstance(op, AddEdge):
        return graph.edges.get(op.edge.ref) == op.edge
    if isinstance(op, RemoveEdge):
        return op.ref not in graph.edges
    if isinstance(op, UpdateProvenance):
        if isinstance(op.ref, ConceptId):
            node = graph.nodes.get(op.ref)
            return node is not None and node.provenance == op.provenance
        edge = graph.edges.get(op.ref)
        return edge is not None and edge.provenance == op.provenance
    if isinstance(op, DeclareTransition):
        return (op.src, op.dst) in graph.domain_transitions
    if isinstance(op, RemoveTransition):
        return (op.src, op.dst) not in graph.domain_transitions
    if isinstance(op, DeclareDomain):
        return op.domain in graph.declared_domains
    if isinstance(op, RetractDomain):
        return op.domain not in graph.declared_domains
    raise TypeError(f"not a change op: {op!r}")


def inverse_op(pre: CognitiveGraph, op: ChangeOp) -> list[ChangeOp]:
    """Ops that undo ``op`` when it is applied to ``pre``."""
    if is_satisfied(pre, op):
        return []
    if isinstance(op, AddNode):
        undo: list[ChangeOp] = [RemoveNode(op.node.id)]
        if op.node.id.domain not in pre.declared_domains:
            undo.append(RetractDomain(op.node.id.domain))
        return undo
    if isinstance(op, RemoveNode):
        return [AddNode(pre.nodes[op.node_id])]
    if isinstance(op, AddEdge):
        return [RemoveEdge(op.edge.ref)]
    if isinstance(op, RemoveEdge):
        return [AddEdge(pre.edges[op.ref])]
    if isinstance(op, UpdateProvenance):
        if isinstance(op.ref, ConceptId):
            return [UpdateProvenance(op.ref, pre.nodes[op.ref].provenance)]
        return [UpdateProvenance(op.ref, pre.edges[op.ref].provenance)]
    if isinstance(op, DeclareTransition):
        return [RemoveTransition(op.src, op.dst)]
    if isinstance(op, RemoveTransition):
        return [DeclareTransition(op.src, op.dst)]
    if isinstance(op, DeclareDomain):
        return [RetractDomain(op.domain)]
    if isinstance(op, RetractDomain):
        return [DeclareDomain(op.domain)]
    raise TypeError(f"not a change op: {op!r}")


# --- changesets ---------------------------------------------------------------


@dataclass(frozen=True)
class ChangeSet:
    ops: tuple[ChangeOp, ...]
    author: str
    rationale: str = ""
    severity: Severity = Severity.MINOR

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "severity", Severity(self.severity))
        if not self.ops:
            raise ValueError("a changeset needs at least one op")
        for text, what in ((self.author, "author"), (self.rationale, "rationale")):
            if "\n" in text or "\r" in text or text != text.strip():
                raise ValueError(f"invalid {what} {text!r}")
        if not self.author or " " in self.author:
            raise ValueError(f"author must be a single non-empty token, got {self.author!r}")

    def escalate(self, severity: Severity) -> ChangeSet:
        """Raise severity to at least ``severity``; never lowers it."""
        return replace(self, severity=max_severity(self.severity, severity))

    def touched(self) -> set[str]:
        refs: set[str] = set()
        for op in self.ops:
            refs |= touched(op)
        return refs

    def elements(self) -> set[str]:
        return {op.element() for op in self.ops}

    def apply(self, graph: CognitiveGraph, now: datetime | None = None) -> CognitiveGraph:
        for op in self.ops:
            graph = apply_op(graph, op, now)
        return graph

    def apply_unchecked(self, graph: CognitiveGraph) -> CognitiveGraph:
        for op in self.ops:
            graph = apply_op_unchecked(graph, op)
        return graph

    def inverse(self, pre: CognitiveGraph) -> list[ChangeOp]:
        """Ops that restore ``pre`` after this changeset was applied to it."""
        undo: list[list[ChangeOp]] = []
        graph = pre
        for op in self.ops:
            undo.append(inverse_op(graph, op))
            graph = apply_op_unchecked(graph, op)
        return [u for group in reversed(undo) for u in group]

    def lines(self) -> list[str]:
        head = [f"author {self.author}", f"rationale {self.rationale}".rstrip(), f"severity {self.severity.value}"]
        return head + [op.render() for op in self.ops]

    def serialize(self) -> str:
        return "\n".join(self.lines()) + "\n"


def parse_op(text: str) -> ChangeOp:
    word, _, rest = text.strip().partition(" ")
    if word == "+node":
        return AddNode(parse_node(rest))
    if word == "-node":
        return RemoveNode(ConceptId.parse(rest))
    if word == "+edge":
        return AddEdge(parse_edge(rest))
    if word == "-edge":
        return RemoveEdge(EdgeRef.parse(rest))
    if word == "~prov":
        what, _, rest = rest.partition(" ")
        head, *fields = [p.strip() for p in rest.split("|")]
        if len(fields) != 3:
            raise ValueError("~prov needs '<ref> | <contributors> | <evidence> | <last_validated>'")
        prov = parse_provenance(fields)
        if what == "node":
            return UpdateProvenance(ConceptId.parse(head), prov)
        if what == "edge":
            return UpdateProvenance(EdgeRef.parse(head), prov)
        raise ValueError(f"~prov target must be 'node' or 'edge', got {what!r}")
    if word in ("+transition", "-transition"):
        parts = rest.split()
        if len(parts) != 2:
            raise ValueError(f"{word} needs two domains")
        a, b = (check_domain(p) for p in parts)
        return DeclareTransition(a, b) if word == "+transition" else RemoveTransition(a, b)
    if word in ("+domain", "-domain"):
        d = check_domain(rest.strip())
        return DeclareDomain(d) if word == "+domain" else RetractDomain(d)
    raise ValueError(f"unknown op {word!r}")


def parse_changeset(text: str, first_line: int = 1) -> ChangeSet:
    """Parse changeset text; blank lines and ``#`` comments are ignored."""
    header: dict[str, str] = {}
    ops: list[ChangeOp] = []
    for lineno, raw in enumerate(text.split("\n"), start=first_line):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        try:
            if word in ("author", "rationale", "severity"):
                if ops:
                    raise ValueError(f"{word} must precede the ops")
                if word in header:
                    raise ValueError(f"duplicate {word}")
                header[word] = rest.strip()
            else:
                ops.append(parse_op(line))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if "author" not in header:
        raise ParseError("changeset lacks an author line", first_line)
    try:
        return ChangeSet(tuple(ops), header["author"], header.get("rationale", ""), Severity(header.get("severity", "minor")))
    except ValueError as exc:
        raise ParseError(str(exc), first_line) from None


def graph_diff(current: CognitiveGraph, target: CognitiveGraph) -> list[ChangeOp]:
    """Guarded-applicable ops turning ``current`` into ``target``.

    Removals run first (edges, transitions, nodes, domains), then additions
    in the reverse order, so every intermediate edge set is a subset of one
    of the two endpoint graphs.
    """
    ops: list[ChangeOp] = []
    changed_nodes = {
        nid for nid, node in current.nodes.items()
        if nid in target.nodes and (target.nodes[nid].kind, target.nodes[nid].description) != (node.kind, node.description)
    }
    drop_edges = sorted(
        ref for ref in current.edges
        if ref not in target.edges or ref.source in changed_nodes or ref.target in changed_nodes
    )
    ops += [RemoveEdge(ref) for ref in drop_edges]
    ops += [RemoveTransition(a, b) for a, b in sorted(current.domain_transitions - target.domain_transitions)]
    ops += [RemoveNode(nid) for nid in sorted(n for n in current.nodes if n not in target.nodes or n in changed_nodes)]
    ops += [RetractDomain(d) for d in sorted(current.declared_domains - target.declared_domains)]
    ops += [DeclareDomain(d) for d in sorted(target.declared_domains - current.declared_domains)]
    ops += [AddNode(target.nodes[n]) for n in sorted(n for n in target.nodes if n not in current.nodes or n in changed_nodes)]
    ops += [DeclareTransition(a, b) for a, b in sorted(target.domain_transitions - current.domain_transitions)]
    dropped = set(drop_edges)
    ops += [AddEdge(target.edges[r]) for r in sorted(r for r in target.edges if r not in current.edges or r in dropped)]
    for nid in sorted(n for n in target.nodes if n in current.nodes and n not in changed_nodes):
        if current.nodes[nid].provenance != target.nodes[nid].provenance:
            ops.append(UpdateProvenance(nid, target.nodes[nid].provenance))
    for ref in sorted(r for r in target.edges if r in current.edges and r not in dropped):
        if current.edges[ref].provenance != target.edges[ref].provenance:
            ops.append(UpdateProvenance(ref, target.edges[ref].provenance))
    return ops


def graph_as_ops(graph: CognitiveGraph) -> list[ChangeOp]:
    """Ops that build ``graph`` from the empty graph."""
    return graph_diff(CognitiveGraph(), graph)


def fold(changesets: Iterable[ChangeSet], base: CognitiveGraph | None = None) -> CognitiveGraph:
    """Replay changesets structurally over ``base`` (the empty graph by default)."""
    graph = base if base is not None else CognitiveGraph()
    for cs in changesets:
        graph = cs.apply_unchecked(graph)
    return graph
