"""Exception hierarchy shared by the graph, repository and CDC layers."""

from __future__ import annotations


class OcgError(Exception):
    """Base class for every error raised by the engine."""


class ParseError(OcgError):
    """Malformed text input. ``line`` is 1-based; ``column`` is optional."""

    def __init__(self, reason: str, line: int | None = None, column: int | None = None):
        self.reason = reason
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(f"{where}{reason}")


# --- graph-core -----------------------------------------------------------


class GraphError(OcgError):
    """A guarded graph operation refused to produce an invalid snapshot."""


class DuplicateNode(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DanglingEndpoint(GraphError):
    pass


class DomainMismatch(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class MisconceptionMisuse(GraphError):
    pass


class UnknownDomain(GraphError):
    pass


class DomainInUse(GraphError):
    pass


class NotFound(GraphError):
    pass


class NodeHasIncidentEdges(GraphError):
    pass


class FutureProvenance(GraphError):
    pass


class OrderingCycle(GraphError):
    """Adding an ordering edge would close a cycle; ``cycle`` starts and ends on the same node."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("ordering cycle: " + " -> ".join(str(c) for c in self.cycle))


class ApplicationError(OcgError):
    """A changeset op cannot be applied even speculatively (missing or conflicting element)."""


# --- versioning -----------------------------------------------------------


class GovernanceError(OcgError):
    """A repository operation violates the governance rules."""


class IllegalTransition(GovernanceError):
    pass


class QuorumNotMet(GovernanceError):
    def __init__(self, proposal_id: str, missing: list[str]):
        self.proposal_id = proposal_id
        self.missing = list(missing)
        super().__init__(f"proposal {proposal_id} still needs " + "; ".join(self.missing))


class NotApproved(GovernanceError):
    pass


class DuplicateBranch(GovernanceError):
    pass


class DuplicateProposal(GovernanceError):
    pass


class UnknownProposal(GovernanceError):
    pass


class UnknownRevision(GovernanceError):
    pass


class UnknownLine(GovernanceError):
    pass


class NotAncestor(GovernanceError):
    pass


class CheckFailure(OcgError):
    """Automated checks rejected a graph; ``report`` carries the findings."""

    def __init__(self, message: str, report):
        self.report = report
        super().__init__(message)


class SeedInvalid(CheckFailure):
    pass


class ChecksFailed(CheckFailure):
    pass


class PostMergeCheckFailure(CheckFailure):
    pass


class StoreError(OcgError):
    """On-disk repository is missing, unreadable or fails digest verification."""


class ChainBroken(StoreError):
    pass


# --- cdc ------------------------------------------------------------------


class BrokenChain(ParseError):
    """Adjacent arrow groups disagree on the claim they share."""
