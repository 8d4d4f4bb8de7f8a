"""Shared builders, random generators and brute-force oracles for the tests."""

from __future__ import annotations

import itertools
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from ocg.cdc import APPLY, COMPUTE, CdcTrace, StepLabel, rule_display_name, validate_trace
from ocg.changeset import (
    AddEdge,
    AddNode,
    ChangeSet,
    RemoveEdge,
    RemoveNode,
    Severity,
    UpdateProvenance,
    apply_op,
    parse_changeset,
)
from ocg.graph import (
    AnalogousTo,
    CognitiveGraph,
    CommonMisconception,
    ConceptId,
    ConceptNode,
    NodeKind,
    PedagogicalEdge,
    PrerequisiteOf,
    Provenance,
    Scaffolds,
)
from ocg.serialize import canonical_parse

DATA = Path(__file__).resolve().parent.parent / "src" / "ocg" / "data"
T0 = datetime(2026, 1, 15, tzinfo=timezone.utc)
LATER = datetime(2026, 6, 1, tzinfo=timezone.utc)


def prov(ts: datetime = T0, who: str = "tester", evidence: tuple[str, ...] = ()) -> Provenance:
    return Provenance((who,), evidence, ts)


def cid(text: str) -> ConceptId:
    return ConceptId.parse(text)


def node(text: str, kind: NodeKind = NodeKind.CONCEPT, ts: datetime = T0, desc: str = "") -> ConceptNode:
    return ConceptNode(cid(text), kind, prov(ts), desc)


def pre(src: str, dst: str, ts: datetime = T0) -> PedagogicalEdge:
    a, b = cid(src), cid(dst)
    return PedagogicalEdge(a, b, PrerequisiteOf(a.domain), prov(ts))


def scaf(src: str, dst: str, ts: datetime = T0) -> PedagogicalEdge:
    a, b = cid(src), cid(dst)
    return PedagogicalEdge(a, b, Scaffolds(a.domain), prov(ts))


def build(nodes=(), edges=(), transitions=(), domains=()) -> CognitiveGraph:
    g = CognitiveGraph()
    for d in domains:
        g = g.declare_domain(d)
    for n in nodes:
        g = g.add_node(n if isinstance(n, ConceptNode) else node(n), LATER)
    for t in transitions:
        g = g.declare_transition(*t)
    for e in edges:
        g = g.add_edge(e, LATER)
    return g


def seed_graph() -> CognitiveGraph:
    return canonical_parse((DATA / "energy_seed.ocg").read_bytes())


def scaffolding_changeset() -> ChangeSet:
    return parse_changeset((DATA / "scaffolding.ocs").read_text())


# --- random graphs -------------------------------------------------------------------

DOMAINS = ("Algebra", "Geometry", "Physics")


def random_dag(rng: random.Random, n: int, density: float = 0.3, domain: str = "D") -> tuple[CognitiveGraph, list[ConceptId]]:
    """A random ordering DAG over ``n`` nodes plus its topological order."""
    ids = [ConceptId(f"c{i}", domain) for i in range(n)]
    order = ids[:]
    rng.shuffle(order)
    g = CognitiveGraph().declare_domain(domain)
    for i in ids:
        g = g.add_node(ConceptNode(i, NodeKind.CONCEPT, prov()), LATER)
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < density:
            src, dst = order[a], order[b]
            kind = PrerequisiteOf(domain) if rng.random() < 0.7 else Scaffolds(domain)
            g = g.add_edge(PedagogicalEdge(src, dst, kind, prov()), LATER)
    return g, order


def random_timestamp(rng: random.Random) -> datetime:
    return T0 + timedelta(seconds=rng.randrange(0, 3600 * 24 * 120))


def random_provenance(rng: random.Random) -> Provenance:
    who = tuple(rng.sample(["ana", "ben", "chen", "dara", "eli"], rng.randint(1, 3)))
    ev = tuple(rng.sample(["doi:10.1/x", "pilot-7", "minutes 3", "study#4"], rng.randint(0, 2)))
    return Provenance(who, ev, random_timestamp(rng))


def random_graph(rng: random.Random, max_nodes: int = 8, valid: bool = True) -> CognitiveGraph:
    """Random multi-domain graph with all edge kinds.

    With ``valid`` the guarded API is used, so the result satisfies every
    invariant. Otherwise edges are inserted raw and may violate anything.
    """
    domains = rng.sample(DOMAINS, rng.randint(1, 3))
    g = CognitiveGraph()
    for d in domains:
        g = g.declare_domain(d)
    for a, b in itertools.permutations(domains, 2):
        if rng.random() < 0.3:
            g = g.declare_transition(a, b)
    n = rng.randint(0, max_nodes)
    kinds = [NodeKind.CONCEPT] * 3 + [NodeKind.RULE, NodeKind.MISCONCEPTION]
    for i in range(n):
        desc = rng.choice(["", "a short note", "x^2 + y^2 = z^2", "ünïcode ok"])
        nd = ConceptNode(ConceptId(f"n{i}", rng.choice(domains)), rng.choice(kinds), random_provenance(rng), desc)
        g = g.add_node(nd, LATER)
    ids = sorted(g.nodes)
    if len(ids) < 2:
        return g
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.sample(ids, 2)
        roll = rng.random()
        if roll < 0.45:
            kind = PrerequisiteOf(a.domain if valid else rng.choice(domains))
        elif roll < 0.65:
            kind = Scaffolds(a.domain if valid else rng.choice(domains))
        elif roll < 0.85:
            if a.domain == b.domain and valid:
                continue
            other = b.domain if b.domain != a.domain else next(d for d in DOMAINS if d != a.domain)
            kind = AnalogousTo(a.domain, other)
        else:
            kind = CommonMisconception()
        e = PedagogicalEdge(a, b, kind, random_provenance(rng))
        if valid:
            try:
                g = g.add_edge(e, LATER)
            except Exception:
                pass
        else:
            edges = dict(g.edges)
            edges[e.ref] = e
            g = g.replace(edges=edges)
    return g


# --- random changesets ---------------------------------------------------------------

def random_valid_changeset(
    rng: random.Random, graph: CognitiveGraph, severity: Severity = Severity.MINOR, size: int | None = None
) -> ChangeSet | None:
    """A changeset that applies cleanly through the guarded API, or None if none was found."""
    ops = []
    g = graph
    domains = sorted(g.declared_domains) or ["D"]
    for _ in range(size or rng.randint(1, 4)):
        roll = rng.random()
        op = None
        ids = sorted(g.nodes)
        if roll < 0.35 or len(ids) < 2:
            nid = ConceptId(f"k{rng.getrandbits(32):08x}", rng.choice(domains))
            op = AddNode(ConceptNode(nid, NodeKind.CONCEPT, random_provenance(rng)))
        elif roll < 0.7:
            a, b = rng.sample(ids, 2)
            if a.domain != b.domain:
                b_candidates = [i for i in ids if i.domain == a.domain and i != a]
                if not b_candidates:
                    continue
                b = rng.choice(b_candidates)
            kind = PrerequisiteOf(a.domain) if rng.random() < 0.6 else Scaffolds(a.domain)
            op = AddEdge(PedagogicalEdge(a, b, kind, random_provenance(rng)))
        elif roll < 0.85 and g.edges:
            op = RemoveEdge(rng.choice(sorted(g.edges)))
        elif roll < 0.93:
            lonely = [i for i in ids if not g.incident_edges(i)]
            if lonely:
                op = RemoveNode(rng.choice(lonely))
        else:
            op = UpdateProvenance(rng.choice(ids), random_provenance(rng))
        if op is None:
            continue
        try:
            g = apply_op(g, op, LATER)
        except Exception:
            continue
        ops.append(op)
    if not ops:
        return None
    return ChangeSet(tuple(ops), rng.choice(["ana", "ben", "chen"]), "random edit", severity)


# --- random traces -------------------------------------------------------------------

_CLAIM_WORDS = ["a", "b", "c^2", "=", "+", "3", "4", "25", "x", "area", "(a+b)", "sqrt(25)", "5", "right", "triangle,"]


def random_claim(rng: random.Random) -> str:
    return " ".join(rng.choice(_CLAIM_WORDS) for _ in range(rng.randint(1, 6)))


def random_label(rng: random.Random) -> StepLabel:
    domain = rng.choice(DOMAINS)
    if rng.random() < 0.5:
        rule = " ".join(w.title() for w in rng.sample(["pythagorean", "theorem", "square", "root", "law"], rng.randint(1, 3)))
        return StepLabel(APPLY, domain, rule)
    return StepLabel(COMPUTE, domain)


def random_trace(rng: random.Random) -> CdcTrace:
    k = rng.randint(1, 5)
    claims = [random_claim(rng) for _ in range(k + 1)]
    return CdcTrace.from_claims(claims, [random_label(rng) for _ in range(k)])


# --- oracles -------------------------------------------------------------------------


def ordering_pairs(graph: CognitiveGraph) -> set[tuple[ConceptId, ConceptId]]:
    return {(r.source, r.target) for r in graph.edges if r.kind.ordering}


def brute_paths(graph: CognitiveGraph, start: ConceptId, end: ConceptId, max_len: int = 16) -> list[tuple[ConceptId, ...]]:
    """Every simple path, by unpruned DFS over all simple walks from ``start``."""
    if start == end:
        return [(start,)]
    pairs = ordering_pairs(graph)
    out = []

    def walk(path):
        if path[-1] == end:
            out.append(tuple(path))
            return
        if len(path) > max_len:
            return
        for a, b in pairs:
            if a == path[-1] and b not in path:
                walk(path + [b])

    walk([start])
    return sorted((p for p in out if len(p) - 1 <= max_len), key=lambda p: [str(n) for n in p])


def fixpoint_closure(graph: CognitiveGraph, target: ConceptId) -> frozenset[ConceptId]:
    """Transitive closure by repeated relational join, then read off the predecessors of target."""
    reach = ordering_pairs(graph)
    while True:
        joined = reach | {(a, d) for (a, b) in reach for (c, d) in reach if b == c}
        if joined == reach:
            break
        reach = joined
    return frozenset(a for (a, b) in reach if b == target and a != target)


def has_cycle_brute(graph: CognitiveGraph) -> bool:
    """A cycle exists iff some node reaches itself in the join closure."""
    reach = ordering_pairs(graph)
    while True:
        joined = reach | {(a, d) for (a, b) in reach for (c, d) in reach if b == c}
        if joined == reach:
            return any(a == b for a, b in reach)
        reach = joined


def invariant_codes(graph: CognitiveGraph) -> set[tuple[str, str]]:
    """Exhaustive re-derivation of (code, edge-or-node) pairs for each stated invariant."""
    out: set[tuple[str, str]] = set()
    for nid in graph.nodes:
        if nid.domain not in graph.declared_domains:
            out.add(("UnknownDomain", str(nid)))
    for ref in graph.edges:
        missing = [n for n in (ref.source, ref.target) if n not in graph.nodes]
        if missing:
            out.add(("DanglingEndpoint", str(ref)))
        k = ref.kind
        if isinstance(k, (PrerequisiteOf, Scaffolds)):
            if not (ref.source.domain == ref.target.domain == k.domain):
                out.add(("DomainMismatch", str(ref)))
        elif isinstance(k, AnalogousTo):
            if k.d1 == k.d2 or {ref.source.domain, ref.target.domain} != {k.d1, k.d2}:
                out.add(("DomainMismatch", str(ref)))
        if any(d not in graph.declared_domains for d in k.domains):
            out.add(("UnknownDomain", str(ref)))
        if not missing:
            sk, tk = graph.nodes[ref.source].kind, graph.nodes[ref.target].kind
            if isinstance(k, CommonMisconception):
                bad = tk is not NodeKind.MISCONCEPTION or sk is not NodeKind.CONCEPT
            else:
                bad = NodeKind.MISCONCEPTION in (sk, tk)
            if bad:
                out.add(("MisconceptionMisuse", str(ref)))
            if isinstance(k, Scaffolds) and not any(
                r.kind.ordering and r.target == ref.source for r in graph.edges
            ):
                out.add(("ScaffoldNotBridging", str(ref)))
    if has_cycle_brute(graph):
        out.add(("OrderingCycle", "*"))
    return out


def candidate_labels(graph: CognitiveGraph) -> list[StepLabel]:
    out = []
    for d in sorted(graph.declared_domains):
        out.append(StepLabel(COMPUTE, d))
        for r in graph.rules(d):
            out.append(StepLabel(APPLY, d, rule_display_name(r.id.term)))
    return out


def next_step_oracle(graph: CognitiveGraph, domain: str, mastered) -> list[StepLabel]:
    """Labels that add no violation when appended to a one-step trace in ``domain``."""
    base = CdcTrace.from_claims(["p", "q"], [StepLabel(COMPUTE, domain)])
    floor = len(validate_trace(graph, base, mastered))
    ok = set()
    for lab in candidate_labels(graph):
        t = CdcTrace.from_claims(["p", "q", "r"], [StepLabel(COMPUTE, domain), lab])
        if len(validate_trace(graph, t, mastered)) == floor:
            ok.add(lab)
    return sorted(ok, key=StepLabel.sort_key)
