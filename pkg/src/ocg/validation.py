"""Consistency checks over graph snapshots, graded by severity."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from ocg.changeset import ChangeSet, Severity
from ocg.digest import hexdigest
from ocg.errors import ApplicationError
from ocg.graph import (
    CognitiveGraph,
    ConceptId,
    Scaffolds,
    edge_domain_problem,
    misconception_problem,
)
from ocg.timeutil import format_ts, normalize_ts, utcnow

SEVERITY_OF = {
    "ApplicationError": Severity.CRITICAL,
    "OrderingCycle": Severity.CRITICAL,
    "DanglingEndpoint": Severity.SIGNIFICANT,
    "DomainMismatch": Severity.SIGNIFICANT,
    "MisconceptionMisuse": Severity.SIGNIFICANT,
    "UnknownDomain": Severity.SIGNIFICANT,
    "ScaffoldNotBridging": Severity.MINOR,
    "StaleProvenance": Severity.MINOR,
}


@dataclass(frozen=True)
class CheckFinding:
    code: str
    locus: tuple[str, ...]
    message: str

    @property
    def severity(self) -> Severity:
        return SEVERITY_OF[self.code]

    def sort_key(self) -> tuple[str, tuple[str, ...], str]:
        return (self.code, self.locus, self.message)

    def render(self) -> str:
        return f"{self.severity.value} {self.code} {','.join(self.locus)} {self.message}"


@dataclass(frozen=True)
class CheckReport:
    findings: tuple[CheckFinding, ...]

    def __post_init__(self):
        object.__setattr__(self, "findings", tuple(sorted(self.findings, key=CheckFinding.sort_key)))

    @property
    def passed(self) -> bool:
        return not any(f.severity >= Severity.SIGNIFICANT for f in self.findings)

    @property
    def worst(self) -> Severity | None:
        if not self.findings:
            return None
        return max((f.severity for f in self.findings), key=lambda s: s.rank)

    def codes(self) -> set[str]:
        return {f.code for f in self.findings}

    def render(self) -> str:
        lines = [f.render() for f in self.findings]
        lines.append(f"{len(self.findings)} findings: {'passed' if self.passed else 'failed'}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hexdigest(self.render())


def _ordering_sccs(graph: CognitiveGraph) -> list[list[ConceptId]]:
    """Strongly connected components of the ordering-edge graph (iterative Tarjan)."""
    succ: dict[ConceptId, list[ConceptId]] = {}
    vertices: set[ConceptId] = set()
    for ref in graph.edges:
        if ref.kind.ordering:
            succ.setdefault(ref.source, []).append(ref.target)
            vertices |= {ref.source, ref.target}
    for targets in succ.values():
        targets.sort()
    index: dict[ConceptId, int] = {}
    low: dict[ConceptId, int] = {}
    on_stack: set[ConceptId] = set()
    stack: list[ConceptId] = []
    out: list[list[ConceptId]] = []
    counter = 0
    for root in sorted(vertices):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            children = succ.get(v, [])
            recurse = False
            while i < len(children):
                w = children[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return out


def _cycle_within(graph: CognitiveGraph, comp: list[ConceptId]) -> list[ConceptId]:
    start = comp[0]
    members = set(comp)
    for nxt in graph.successors(start):
        if nxt in members:
            back = graph._ordering_path(nxt, start)
            if back is not None:
                return [start] + back
    return [start, start]


def run_checks(graph: CognitiveGraph) -> CheckReport:
    """Report every invariant violation in ``graph``. Never raises.

    Staleness is not checked here; see :func:`provenance_staleness`.
    """
    findings: list[CheckFinding] = []

    for nid in sorted(graph.nodes):
        if nid.domain not in graph.declared_domains:
            findings.append(CheckFinding("UnknownDomain", (str(nid),), f"domain {nid.domain} is not declared"))
    for a, b in sorted(graph.domain_transitions):
        for d in (a, b):
            if d not in graph.declared_domains:
                findings.append(CheckFinding("UnknownDomain", (f"transition:{a}->{b}",), f"domain {d} is not declared"))

    for ref in sorted(graph.edges):
        missing = [n for n in (ref.source, ref.target) if n not in graph.nodes]
        if missing:
            findings.append(
                CheckFinding(
                    "DanglingEndpoint",
                    (str(ref),) + tuple(str(n) for n in missing),
                    "edge references missing node(s) " + ", ".join(str(n) for n in missing),
                )
            )
        problem = edge_domain_problem(ref)
        if problem:
            findings.append(CheckFinding("DomainMismatch", (str(ref),), problem))
        for d in ref.kind.domains:
            if d not in graph.declared_domains:
                findings.append(CheckFinding("UnknownDomain", (str(ref),), f"domain {d} is not declared"))
        if not missing:
            problem = misconception_problem(ref.kind, graph.nodes[ref.source].kind, graph.nodes[ref.target].kind)
            if problem:
                findings.append(CheckFinding("MisconceptionMisuse", (str(ref),), problem))
            if isinstance(ref.kind, Scaffolds) and not graph.predecessors(ref.source):
                findings.append(
                    CheckFinding(
                        "ScaffoldNotBridging",
                        (str(ref),),
                        f"scaffold source {ref.source} has no prior knowledge leading into it",
                    )
                )

    for comp in _ordering_sccs(graph):
        self_loop = len(comp) == 1 and comp[0] in graph.successors(comp[0])
        if len(comp) > 1 or self_loop:
            cycle = _cycle_within(graph, comp)
            findings.append(
                CheckFinding(
                    "OrderingCycle",
                    tuple(str(n) for n in comp),
                    "cycle " + " -> ".join(str(n) for n in cycle),
                )
            )
    return CheckReport(tuple(findings))


def check_changeset(base: CognitiveGraph, cs: ChangeSet) -> CheckReport:
    """Checks on ``base`` with ``cs`` applied speculatively, limited to what ``cs`` touches."""
    try:
        applied = cs.apply_unchecked(base)
    except ApplicationError as exc:
        return CheckReport((CheckFinding("ApplicationError", tuple(sorted(cs.elements())), str(exc)),))
    scope = cs.touched()
    report = run_checks(applied)
    return CheckReport(tuple(f for f in report.findings if scope.intersection(f.locus)))


def provenance_staleness(
    graph: CognitiveGraph, horizon: timedelta, now: datetime | None = None
) -> list[CheckFinding]:
    """One StaleProvenance finding per element validated longer than ``horizon`` ago."""
    if horizon <= timedelta(0):
        raise ValueError("horizon must be positive")
    now = normalize_ts(now) if now is not None else utcnow()
    findings = []
    for ref, prov in graph.iter_elements():
        age = now - prov.last_validated
        if age > horizon:
            findings.append(
                CheckFinding(
                    "StaleProvenance",
                    (str(ref),),
                    f"last validated {format_ts(prov.last_validated)}, {age.days} days ago",
                )
            )
    return sorted(findings, key=CheckFinding.sort_key)
