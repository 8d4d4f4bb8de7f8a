"""Open cognitive graph: domain-contextualized concepts joined by typed pedagogical edges.

Every graph value is an immutable snapshot. Mutating methods return a new
``CognitiveGraph`` and leave the receiver untouched, so old snapshots can be
shared freely between threads and revisions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from ocg.errors import (
    DanglingEndpoint,
    DomainInUse,
    DomainMismatch,
    DuplicateEdge,
    DuplicateNode,
    FutureProvenance,
    MisconceptionMisuse,
    NodeHasIncidentEdges,
    NotFound,
    OrderingCycle,
    SelfLoop,
    UnknownDomain,
)
from ocg.timeutil import format_ts, normalize_ts, utcnow

DOMAIN_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")
# Terms travel inside whitespace-separated lines of the .ocg format.
_TERM_FORBIDDEN = re.compile(r"[@{}|;\s]")
_FIELD_FORBIDDEN = re.compile(r"[|\n\r]")
_ITEM_FORBIDDEN = re.compile(r"[|;\n\r]")

DEFAULT_MAX_PATH_LEN = 16


def check_domain(name: str) -> str:
    if not isinstance(name, str) or not DOMAIN_RE.fullmatch(name):
        raise ValueError(f"invalid domain name {name!r}")
    return name


@dataclass(frozen=True, order=False)
class ConceptId:
    """A term qualified by its domain, rendered ``term@Domain``."""

    term: str
    domain: str

    def __post_init__(self):
        if not self.term or _TERM_FORBIDDEN.search(self.term):
            raise ValueError(f"invalid term {self.term!r}")
        check_domain(self.domain)

    def __str__(self) -> str:
        return f"{self.term}@{self.domain}"

    def __lt__(self, other: ConceptId) -> bool:
        return str(self) < str(other)

    @classmethod
    def parse(cls, text: str) -> ConceptId:
        term, sep, domain = text.strip().partition("@")
        if not sep:
            raise ValueError(f"concept id {text!r} lacks '@Domain'")
        return cls(term, domain)


def _check_items(items: Iterable[str], what: str) -> tuple[str, ...]:
    out = tuple(items)
    for item in out:
        if not isinstance(item, str) or not item or item != item.strip() or _ITEM_FORBIDDEN.search(item):
            raise ValueError(f"invalid {what} entry {item!r}")
    return out


@dataclass(frozen=True)
class Provenance:
    """Who contributed an element, what evidence backs it, and when it was last validated."""

    contributors: tuple[str, ...]
    evidence: tuple[str, ...]
    last_validated: datetime

    def __post_init__(self):
        contributors = _check_items(self.contributors, "contributor")
        if not contributors:
            raise ValueError("provenance needs at least one contributor")
        object.__setattr__(self, "contributors", contributors)
        object.__setattr__(self, "evidence", _check_items(self.evidence, "evidence"))
        object.__setattr__(self, "last_validated", normalize_ts(self.last_validated))

    def fields(self) -> list[str]:
        return [";".join(self.contributors), ";".join(self.evidence), format_ts(self.last_validated)]


class NodeKind(str, Enum):
    CONCEPT = "concept"
    RULE = "rule"
    MISCONCEPTION = "misconception"


@dataclass(frozen=True)
class ConceptNode:
    id: ConceptId
    kind: NodeKind
    provenance: Provenance
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", NodeKind(self.kind))
        if self.description != self.description.strip() or _FIELD_FORBIDDEN.search(self.description):
            raise ValueError(f"invalid description {self.description!r}")


# --- edge kinds -------------------------------------------------------------


@dataclass(frozen=True)
class PrerequisiteOf:
    domain: str

    ordering = True

    def __post_init__(self):
        check_domain(self.domain)

    def render(self) -> str:
        return f"prerequisite_of@{self.domain}"

    @property
    def domains(self) -> tuple[str, ...]:
        return (self.domain,)


@dataclass(frozen=True)
class Scaffolds:
    domain: str

    ordering = True

    def __post_init__(self):
        check_domain(self.domain)

    def render(self) -> str:
        return f"scaffolds@{self.domain}"

    @property
    def domains(self) -> tuple[str, ...]:
        return (self.domain,)


@dataclass(frozen=True)
class AnalogousTo:
    """Symmetric cross-domain analogy; the two domains are kept in sorted order."""

    d1: str
    d2: str

    ordering = False

    def __post_init__(self):
        check_domain(self.d1)
        check_domain(self.d2)
        if self.d1 == self.d2:
            raise ValueError("analogous_to needs two distinct domains")
        if self.d2 < self.d1:
            d1, d2 = self.d2, self.d1
            object.__setattr__(self, "d1", d1)
            object.__setattr__(self, "d2", d2)

    def render(self) -> str:
        return f"analogous_to@{self.d1}<->{self.d2}"

    @property
    def domains(self) -> tuple[str, ...]:
        return (self.d1, self.d2)


@dataclass(frozen=True)
class CommonMisconception:
    ordering = False

    def render(self) -> str:
        return "common_misconception"

    @property
    def domains(self) -> tuple[str, ...]:
        return ()


EdgeKind = Union[PrerequisiteOf, Scaffolds, AnalogousTo, CommonMisconception]


def parse_edge_kind(text: str) -> EdgeKind:
    text = text.strip()
    if text == "common_misconception":
        return CommonMisconception()
    name, sep, rest = text.partition("@")
    if not sep:
        raise ValueError(f"unknown edge kind {text!r}")
    if name == "prerequisite_of":
        return PrerequisiteOf(rest)
    if name == "scaffolds":
        return Scaffolds(rest)
    if name == "analogous_to":
        for arrow in ("<->", "↔"):
            if arrow in rest:
                d1, _, d2 = rest.partition(arrow)
                return AnalogousTo(d1, d2)
        raise ValueError(f"analogous_to needs 'D1<->D2', got {text!r}")
    raise ValueError(f"unknown edge kind {text!r}")


def _orient(kind: EdgeKind, source: ConceptId, target: ConceptId) -> tuple[ConceptId, ConceptId]:
    # Analogies are stored once: the endpoint in the lexicographically smaller domain is the source.
    if isinstance(kind, AnalogousTo) and source.domain == kind.d2 and target.domain == kind.d1:
        return target, source
    return source, target


@dataclass(frozen=True)
class EdgeRef:
    """Identity of an edge: (kind, source, target), analogy endpoints normalized."""

    kind: EdgeKind
    source: ConceptId
    target: ConceptId

    def __post_init__(self):
        source, target = _orient(self.kind, self.source, self.target)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)

    def sort_key(self) -> tuple[str, str, str]:
        return (self.kind.render(), str(self.source), str(self.target))

    def __lt__(self, other: EdgeRef) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.source}-[{self.kind.render()}]->{self.target}"

    def fields(self) -> str:
        return f"{self.kind.render()} {self.source} {self.target}"

    @classmethod
    def parse(cls, text: str) -> EdgeRef:
        parts = text.split()
        if len(parts) != 3:
            raise ValueError(f"edge reference needs '<kind> <src> <dst>', got {text!r}")
        return cls(parse_edge_kind(parts[0]), ConceptId.parse(parts[1]), ConceptId.parse(parts[2]))


@dataclass(frozen=True)
class PedagogicalEdge:
    source: ConceptId
    target: ConceptId
    kind: EdgeKind
    provenance: Provenance

    def __post_init__(self):
        source, target = _orient(self.kind, self.source, self.target)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)

    @property
    def ref(self) -> EdgeRef:
        return EdgeRef(self.kind, self.source, self.target)


ElementRef = Union[ConceptId, EdgeRef]


def edge_domain_problem(edge: PedagogicalEdge | EdgeRef) -> str | None:
    """Describe how an edge violates its kind's domain rule, or return None."""
    kind, s, t = edge.kind, edge.source, edge.target
    if isinstance(kind, (PrerequisiteOf, Scaffolds)):
        if s.domain != kind.domain or t.domain != kind.domain:
            return f"{kind.render()} requires both endpoints in {kind.domain}"
    elif isinstance(kind, AnalogousTo):
        if {s.domain, t.domain} != {kind.d1, kind.d2}:
            return f"{kind.render()} requires endpoints in {kind.d1} and {kind.d2}"
    return None


def misconception_problem(kind: EdgeKind, source_kind: NodeKind, target_kind: NodeKind) -> str | None:
    if isinstance(kind, CommonMisconception):
        if source_kind is not NodeKind.CONCEPT or target_kind is not NodeKind.MISCONCEPTION:
            return "common_misconception must link a concept to a misconception"
    elif NodeKind.MISCONCEPTION in (source_kind, target_kind):
        return f"misconception nodes may only be the target of common_misconception edges, not {kind.render()}"
    return None


# --- the graph ----------------------------------------------------------------


@dataclass(frozen=True)
class CognitiveGraph:
    nodes: Mapping[ConceptId, ConceptNode] = field(default_factory=dict)
    edges: Mapping[EdgeRef, PedagogicalEdge] = field(default_factory=dict)
    domain_transitions: frozenset[tuple[str, str]] = frozenset()
    declared_domains: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))
        object.__setattr__(self, "domain_transitions", frozenset(self.domain_transitions))
        object.__setattr__(self, "declared_domains", frozenset(self.declared_domains))

    def __eq__(self, other):
        if not isinstance(other, CognitiveGraph):
            return NotImplemented
        return (
            dict(self.nodes) == dict(other.nodes)
            and dict(self.edges) == dict(other.edges)
            and self.domain_transitions == other.domain_transitions
            and self.declared_domains == other.declared_domains
        )

    __hash__ = None  # type: ignore[assignment]

    def replace(self, **changes) -> CognitiveGraph:
        """Unchecked copy with some fields swapped; callers own the invariants."""
        fields = {
            "nodes": self.nodes,
            "edges": self.edges,
            "domain_transitions": self.domain_transitions,
            "declared_domains": self.declared_domains,
        }
        fields.update(changes)
        return CognitiveGraph(**fields)

    # -- indexes ---------------------------------------------------------------

    @cached_property
    def _successors(self) -> Mapping[ConceptId, tuple[ConceptId, ...]]:
        succ: dict[ConceptId, set[ConceptId]] = {}
        for ref in self.edges:
            if ref.kind.ordering:
                succ.setdefault(ref.source, set()).add(ref.target)
        return {k: tuple(sorted(v)) for k, v in succ.items()}

    @cached_property
    def _predecessors(self) -> Mapping[ConceptId, tuple[ConceptId, ...]]:
        pred: dict[ConceptId, set[ConceptId]] = {}
        for ref in self.edges:
            if ref.kind.ordering:
                pred.setdefault(ref.target, set()).add(ref.source)
        return {k: tuple(sorted(v)) for k, v in pred.items()}

    def successors(self, node: ConceptId) -> tuple[ConceptId, ...]:
        """Targets of ordering edges (prerequisite_of, scaffolds) leaving ``node``."""
        return self._successors.get(node, ())

    def predecessors(self, node: ConceptId) -> tuple[ConceptId, ...]:
        return self._predecessors.get(node, ())

    def incident_edges(self, node: ConceptId) -> list[EdgeRef]:
        return sorted(ref for ref in self.edges if node in (ref.source, ref.target))

    def analogies(self, node: ConceptId) -> list[PedagogicalEdge]:
        """Analogy edges touching ``node``, whichever endpoint it is stored as."""
        return [
            self.edges[ref]
            for ref in sorted(self.edges)
            if isinstance(ref.kind, AnalogousTo) and node in (ref.source, ref.target)
        ]

    def rules(self, domain: str | None = None) -> list[ConceptNode]:
        return [
            n
            for i, n in sorted(self.nodes.items())
            if n.kind is NodeKind.RULE and (domain is None or i.domain == domain)
        ]

    def __contains__(self, item) -> bool:
        if isinstance(item, ConceptId):
            return item in self.nodes
        if isinstance(item, EdgeRef):
            return item in self.edges
        return False

    # -- guarded mutations -------------------------------------------------------

    def add_node(self, node: ConceptNode, now: datetime | None = None) -> CognitiveGraph:
        existing = self.nodes.get(node.id)
        if existing is not None:
            if existing == node:
                return self
            raise DuplicateNode(f"node {node.id} already exists with different content")
        _check_not_future(node.provenance, now, str(node.id))
        nodes = dict(self.nodes)
        nodes[node.id] = node
        return self.replace(nodes=nodes, declared_domains=self.declared_domains | {node.id.domain})

    def add_edge(self, edge: PedagogicalEdge, now: datetime | None = None) -> CognitiveGraph:
        ref = edge.ref
        existing = self.edges.get(ref)
        if existing is not None:
            if existing == edge:
                return self
            raise DuplicateEdge(f"edge {ref} already exists with different provenance")
        if edge.source == edge.target:
            raise SelfLoop(f"edge {ref} is a self-loop")
        for end in (edge.source, edge.target):
            if end not in self.nodes:
                raise DanglingEndpoint(f"edge {ref} references missing node {end}")
        problem = edge_domain_problem(edge)
        if problem:
            raise DomainMismatch(problem)
        for d in edge.kind.domains:
            if d not in self.declared_domains:
                raise UnknownDomain(f"domain {d} is not declared")
        problem = misconception_problem(edge.kind, self.nodes[edge.source].kind, self.nodes[edge.target].kind)
        if problem:
            raise MisconceptionMisuse(problem)
        if edge.kind.ordering:
            back = self._ordering_path(edge.target, edge.source)
            if back is not None:
                raise OrderingCycle(back + [edge.target])
        _check_not_future(edge.provenance, now, str(ref))
        edges = dict(self.edges)
        edges[ref] = edge
        return self.replace(edges=edges)

    def remove_node(self, node_id: ConceptId) -> CognitiveGraph:
        if node_id not in self.nodes:
            raise NotFound(f"node {node_id} not found")
        incident = self.incident_edges(node_id)
        if incident:
            raise NodeHasIncidentEdges(f"node {node_id} still has {len(incident)} incident edge(s)")
        nodes = dict(self.nodes)
        del nodes[node_id]
        return self.replace(nodes=nodes)

    def remove_edge(self, ref: EdgeRef) -> CognitiveGraph:
        if ref not in self.edges:
            raise NotFound(f"edge {ref} not found")
        edges = dict(self.edges)
        del edges[ref]
        return self.replace(edges=edges)

    def remove_element(self, ref: ElementRef) -> CognitiveGraph:
        if isinstance(ref, ConceptId):
            return self.remove_node(ref)
        return self.remove_edge(ref)

    def update_provenance(self, ref: ElementRef, provenance: Provenance, now: datetime | None = None) -> CognitiveGraph:
        _check_not_future(provenance, now, str(ref))
        if isinstance(ref, ConceptId):
            if ref not in self.nodes:
                raise NotFound(f"node {ref} not found")
            nodes = dict(self.nodes)
            old = nodes[ref]
            nodes[ref] = ConceptNode(old.id, old.kind, provenance, old.description)
            return self.replace(nodes=nodes)
        if ref not in self.edges:
            raise NotFound(f"edge {ref} not found")
        edges = dict(self.edges)
        old_edge = edges[ref]
        edges[ref] = PedagogicalEdge(old_edge.source, old_edge.target, old_edge.kind, provenance)
        return self.replace(edges=edges)

    def declare_domain(self, domain: str) -> CognitiveGraph:
        check_domain(domain)
        if domain in self.declared_domains:
            return self
        return self.replace(declared_domains=self.declared_domains | {domain})

    def retract_domain(self, domain: str) -> CognitiveGraph:
        if domain not in self.declared_domains:
            raise NotFound(f"domain {domain} not declared")
        if any(n.domain == domain for n in self.nodes):
            raise DomainInUse(f"domain {domain} still has nodes")
        if any(domain in t for t in self.domain_transitions):
            raise DomainInUse(f"domain {domain} still has transitions")
        if any(domain in ref.kind.domains for ref in self.edges):
            raise DomainInUse(f"domain {domain} still labels edges")
        return self.replace(declared_domains=self.declared_domains - {domain})

    def declare_transition(self, src: str, dst: str) -> CognitiveGraph:
        check_domain(src)
        check_domain(dst)
        if src == dst:
            raise DomainMismatch("a domain transition needs two distinct domains")
        for d in (src, dst):
            if d not in self.declared_domains:
                raise UnknownDomain(f"domain {d} is not declared")
        if (src, dst) in self.domain_transitions:
            return self
        return self.replace(domain_transitions=self.domain_transitions | {(src, dst)})

    def retract_transition(self, src: str, dst: str) -> CognitiveGraph:
        if (src, dst) not in self.domain_transitions:
            raise NotFound(f"transition {src}->{dst} not declared")
        return self.replace(domain_transitions=self.domain_transitions - {(src, dst)})

    # -- queries -----------------------------------------------------------------

    def _ordering_path(self, start: ConceptId, goal: ConceptId) -> list[ConceptId] | None:
        """Some ordering path start..goal (inclusive), or None."""
        if start == goal:
            return [start]
        parent: dict[ConceptId, ConceptId] = {}
        seen = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for nxt in self.successors(cur):
                if nxt in seen:
                    continue
                parent[nxt] = cur
                if nxt == goal:
                    path = [goal]
                    while path[-1] != start:
                        path.append(parent[path[-1]])
                    return path[::-1]
                seen.add(nxt)
                stack.append(nxt)
        return None

    def enumerate_paths(
        self, start: ConceptId, end: ConceptId, max_len: int = DEFAULT_MAX_PATH_LEN
    ) -> list[tuple[ConceptId, ...]]:
        """All simple ordering-edge paths from ``start`` to ``end`` with at most ``max_len`` edges.

        Paths are sorted lexicographically by their sequence of rendered ids.
        """
        for n in (start, end):
            if n not in self.nodes:
                raise NotFound(f"node {n} not found")
        if start.domain != end.domain:
            raise DomainMismatch(f"{start} and {end} are in different domains")
        if max_len < 1:
            raise ValueError("max_len must be at least 1")
        if start == end:
            return [(start,)]
        useful = self.prerequisite_closure(end) | {end}
        found: list[tuple[ConceptId, ...]] = []
        path = [start]
        on_path = {start}

        def walk(cur: ConceptId) -> None:
            for nxt in self.successors(cur):
                if nxt in on_path or nxt not in useful:
                    continue
                if nxt == end:
                    found.append(tuple(path) + (end,))
                    continue
                if len(path) >= max_len:
                    continue
                path.append(nxt)
                on_path.add(nxt)
                walk(nxt)
                path.pop()
                on_path.discard(nxt)

        if start in useful:
            walk(start)
        found.sort(key=lambda p: [str(n) for n in p])
        return found

    def prerequisite_closure(self, target: ConceptId) -> frozenset[ConceptId]:
        """Everything reachable backwards from ``target`` over ordering edges, excluding target."""
        if target not in self.nodes:
            raise NotFound(f"node {target} not found")
        seen: set[ConceptId] = set()
        stack = [target]
        while stack:
            for prev in self.predecessors(stack.pop()):
                if prev not in seen:
                    seen.add(prev)
                    stack.append(prev)
        seen.discard(target)
        return frozenset(seen)

    def iter_elements(self) -> Iterator[tuple[ElementRef, Provenance]]:
        for nid, node in sorted(self.nodes.items()):
            yield nid, node.provenance
        for ref, edge in sorted(self.edges.items()):
            yield ref, edge.provenance


def _check_not_future(provenance: Provenance, now: datetime | None, what: str) -> None:
    now = normalize_ts(now) if now is not None else utcnow()
    if provenance.last_validated > now:
        raise FutureProvenance(
            f"{what}: last_validated {format_ts(provenance.last_validated)} is after {format_ts(now)}"
        )
