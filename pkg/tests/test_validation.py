from __future__ import annotations

import random
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocg.changeset import AddEdge, ChangeSet, RemoveNode, Severity
from ocg.graph import CognitiveGraph
from ocg.validation import CheckReport, check_changeset, provenance_staleness, run_checks

from support import LATER, T0, build, cid, invariant_codes, pre, random_graph, scaf, scaffolding_changeset, seed_graph


def _raw_cycle() -> CognitiveGraph:
    g = build(["a@D", "b@D"], [pre("a@D", "b@D")])
    back = pre("b@D", "a@D")
    return g.replace(edges={**g.edges, back.ref: back})


def test_cycle_finding():
    report = run_checks(_raw_cycle())
    assert [f.code for f in report.findings] == ["OrderingCycle"]
    assert report.findings[0].severity is Severity.CRITICAL
    assert not report.passed
    assert report.findings[0].render() == "critical OrderingCycle a@D,b@D cycle a@D -> b@D -> a@D"


def test_seed_passes():
    report = run_checks(seed_graph())
    assert report.findings == ()
    assert report.passed
    assert report.render() == "0 findings: passed\n"


def test_dangling_after_raw_delete():
    g = build(["a@D", "b@D"], [pre("a@D", "b@D")])
    broken = g.replace(nodes={cid("a@D"): g.nodes[cid("a@D")]})
    report = run_checks(broken)
    assert report.codes() == {"DanglingEndpoint"}
    assert report.worst is Severity.SIGNIFICANT
    assert "b@D" in report.findings[0].locus


def test_scaffold_without_prior_knowledge_is_minor():
    g = build(["a@D", "b@D"], [scaf("a@D", "b@D")])
    report = run_checks(g)
    assert report.codes() == {"ScaffoldNotBridging"}
    assert report.passed


def test_report_digest_stable():
    assert run_checks(_raw_cycle()).digest() == run_checks(_raw_cycle()).digest()
    assert run_checks(_raw_cycle()).digest() != CheckReport(()).digest()


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_findings_match_exhaustive_oracle(seed):
    g = random_graph(random.Random(seed), 8, valid=False)
    rng = random.Random(seed + 1)
    if g.nodes and rng.random() < 0.3:
        # Drop a node without its edges to exercise dangling endpoints.
        victim = rng.choice(sorted(g.nodes))
        g = g.replace(nodes={k: v for k, v in g.nodes.items() if k != victim})
    got = set()
    for f in run_checks(g).findings:
        got.add((f.code, "*" if f.code == "OrderingCycle" else f.locus[0]))
    assert got == invariant_codes(g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_guarded_graphs_are_clean(seed):
    g = random_graph(random.Random(seed), 8, valid=True)
    assert run_checks(g).passed


class TestCheckChangeset:
    def test_scaffolding_passes(self):
        report = check_changeset(seed_graph(), scaffolding_changeset())
        assert report.passed
        assert report.findings == ()

    def test_redundant_direct_edge_is_legal(self):
        cs = scaffolding_changeset()
        readd = AddEdge(pre("energy_as_property@Physics", "energy_conservation@Physics"))
        both = ChangeSet(cs.ops + (readd,), cs.author)
        assert check_changeset(seed_graph(), both).passed

    def test_scaffold_closing_cycle(self):
        cs = scaffolding_changeset()
        loop = AddEdge(scaf("energy_conservation@Physics", "energy_as_property@Physics"))
        report = check_changeset(seed_graph(), ChangeSet(cs.ops + (loop,), cs.author))
        assert report.worst is Severity.CRITICAL
        assert "OrderingCycle" in report.codes()

    def test_application_error_is_a_finding(self):
        report = check_changeset(seed_graph(), ChangeSet((RemoveNode(cid("nope@Physics")),), "ana"))
        assert report.codes() == {"ApplicationError"}
        assert not report.passed

    def test_scoped_to_touched_elements(self):
        # The pre-existing dangling edge is not this changeset's fault.
        g = build(["a@D", "b@D"], [pre("a@D", "b@D")])
        broken = g.replace(nodes={cid("a@D"): g.nodes[cid("a@D")]}).declare_domain("E")
        from ocg.changeset import AddNode
        from support import node

        report = check_changeset(broken, ChangeSet((AddNode(node("z@E")),), "ana"))
        assert report.passed


class TestStaleness:
    def test_four_hundred_days(self):
        g = build(["a@D"])
        now = T0 + timedelta(days=400)
        found = provenance_staleness(g, timedelta(days=365), now)
        assert len(found) == 1
        assert (now - g.nodes[cid("a@D")].provenance.last_validated) > timedelta(days=365)

    def test_infinite_horizon(self):
        assert provenance_staleness(seed_graph(), timedelta.max, LATER) == []

    def test_fresh_graph(self):
        assert provenance_staleness(build(["a@D"]), timedelta(days=1), T0) == []

    def test_non_positive_horizon(self):
        with pytest.raises(ValueError):
            provenance_staleness(seed_graph(), timedelta(0), LATER)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 400), st.integers(0, 800))
    def test_timestamp_arithmetic_oracle(self, seed, horizon_days, offset_days):
        g = random_graph(random.Random(seed), 6)
        now = T0 + timedelta(days=offset_days + 120)
        horizon = timedelta(days=horizon_days)
        expected = {str(ref) for ref, p in g.iter_elements() if now - p.last_validated > horizon}
        got = {f.locus[0] for f in provenance_staleness(g, horizon, now)}
        assert got == expected
