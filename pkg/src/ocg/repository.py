"""Trunk/branch repository with role-gated proposals, propagation and rollback.

A repository value is immutable: every operation returns a new
``Repository``. The trunk is a line of revisions whose snapshots are the
fold of their changesets over the empty graph. A branch is an overlay: a
trunk base revision plus changesets replayed on top of it. Propagation
rebases every branch onto the trunk head.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from types import MappingProxyType
from typing import Mapping

from ocg.changeset import (
    ChangeSet,
    Severity,
    apply_op,
    fold,
    graph_as_ops,
    op_provenance,
    graph_diff,
    is_satisfied,
    max_severity,
)
from ocg.digest import hexdigest
from ocg.errors import (
    ApplicationError,
    ChainBroken,
    ChecksFailed,
    DuplicateBranch,
    DuplicateProposal,
    FutureProvenance,
    GraphError,
    IllegalTransition,
    NotAncestor,
    NotApproved,
    PostMergeCheckFailure,
    QuorumNotMet,
    SeedInvalid,
    UnknownLine,
    UnknownProposal,
    UnknownRevision,
)
from ocg.graph import CognitiveGraph
from ocg.serialize import canonical_serialize
from ocg.timeutil import format_ts, normalize_ts, parse_ts, utcnow
from ocg.validation import CheckFinding, CheckReport, check_changeset, run_checks

TRUNK = "trunk"
ENGINE_ACTOR = "ocg-engine"
GENESIS = "0" * 16
BRANCH_NAME_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.-]*")
_RESERVED = {TRUNK, "all"}
# Replayed ops were admitted once already; their timestamps are not judged again.
_REPLAY_CLOCK = datetime.max.replace(microsecond=0, tzinfo=timezone.utc)


class RecordKind(str, Enum):
    AUTOMATED_CHECK = "automated_check"
    EXPERT_REVIEW = "expert_review"
    PILOT_EVIDENCE = "pilot_evidence"


class Role(str, Enum):
    BRANCH_MAINTAINER = "branch_maintainer"
    RESEARCHER = "researcher"
    ACADEMIC_COMMITTEE = "academic_committee"
    COMMUNITY_COUNCIL = "community_council"


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    ADVISORY = "advisory"


class ProposalState(str, Enum):
    DRAFT = "draft"
    CHECKS_PASSED = "checks_passed"
    IN_REVIEW = "in_review"
    APPROVED = "approved"
    REJECTED = "rejected"
    MERGED = "merged"


@dataclass(frozen=True)
class ValidationRecord:
    kind: RecordKind
    actor: str
    role: Role | None
    verdict: Verdict
    timestamp: datetime
    document_ref: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", RecordKind(self.kind))
        object.__setattr__(self, "role", Role(self.role) if self.role is not None else None)
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        object.__setattr__(self, "timestamp", normalize_ts(self.timestamp))
        for text, what in ((self.actor, "actor"), (self.document_ref, "document_ref")):
            if "|" in text or "\n" in text or text != text.strip():
                raise ValueError(f"invalid {what} {text!r}")
        if not self.actor:
            raise ValueError("record needs an actor")

    def render(self) -> str:
        role = self.role.value if self.role else "-"
        return (
            f"record {self.kind.value} {role} {self.verdict.value} {format_ts(self.timestamp)}"
            f" | {self.actor} | {self.document_ref}"
        )

    @classmethod
    def parse(cls, text: str) -> ValidationRecord:
        head, *rest = [p.strip() for p in text.split("|")]
        parts = head.split()
        if len(parts) != 5 or parts[0] != "record" or len(rest) != 2:
            raise ValueError(f"malformed record line {text!r}")
        _, kind, role, verdict, stamp = parts
        return cls(kind, rest[0], None if role == "-" else role, verdict, parse_ts(stamp), rest[1])


@dataclass(frozen=True)
class Proposal:
    id: str
    target: str
    changeset: ChangeSet
    records: tuple[ValidationRecord, ...] = ()
    state: ProposalState = ProposalState.DRAFT

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "state", ProposalState(self.state))
        if not self.id or any(c.isspace() for c in self.id):
            raise ValueError(f"proposal id must be a non-empty token, got {self.id!r}")

    @property
    def severity(self) -> Severity:
        return self.changeset.severity


def missing_approvals(proposal: Proposal, quorum: int) -> list[str]:
    """Requirements still unmet before ``proposal`` may be approved."""
    passes: dict[Role, set[str]] = {}
    for rec in proposal.records:
        if rec.role is not None and rec.verdict is Verdict.PASS and rec.kind is not RecordKind.AUTOMATED_CHECK:
            passes.setdefault(rec.role, set()).add(rec.actor)
    missing = []
    if proposal.target == TRUNK:
        have = len(passes.get(Role.ACADEMIC_COMMITTEE, ()))
        if have < quorum:
            missing.append(f"{quorum - have} more academic_committee pass record(s) (have {have} of {quorum})")
        if proposal.severity >= Severity.SIGNIFICANT and not passes.get(Role.RESEARCHER):
            missing.append(f"1 researcher pass record (severity {proposal.severity.value})")
    elif not passes.get(Role.BRANCH_MAINTAINER):
        missing.append("1 branch_maintainer pass record")
    return missing


def _gating_roles(target: str) -> set[Role]:
    if target == TRUNK:
        return {Role.ACADEMIC_COMMITTEE, Role.RESEARCHER}
    return {Role.BRANCH_MAINTAINER}


def _rejected(proposal: Proposal) -> bool:
    gating = _gating_roles(proposal.target)
    return any(r.verdict is Verdict.FAIL and r.role in gating for r in proposal.records)


@dataclass(frozen=True)
class Revision:
    """One entry on a line.

    kinds: ``seed`` and ``commit``/``rollback`` carry one changeset (a no-op
    rollback carries none); ``create`` starts a branch with an empty overlay;
    ``rebase`` replaces a branch's base and overlay after propagation.
    """

    line: str
    number: int
    kind: str
    parent: int | None
    base: int | None
    changesets: tuple[ChangeSet, ...]
    proposal_id: str | None
    timestamp: datetime
    changeset_digest: str
    snapshot_digest: str
    snapshot: CognitiveGraph = field(compare=False, repr=False)
    overlay: tuple[ChangeSet, ...] = field(default=(), compare=False, repr=False)

    @property
    def severity(self) -> Severity:
        return max_severity(Severity.MINOR, *(cs.severity for cs in self.changesets))


def changesets_digest(changesets: tuple[ChangeSet, ...]) -> str:
    return hexdigest("".join(cs.serialize() for cs in changesets))


def snapshot_digest(graph: CognitiveGraph) -> str:
    return hexdigest(canonical_serialize(graph))


@dataclass(frozen=True)
class ChangelogEntry:
    seq: int
    line: str
    revision: int
    kind: str
    proposal_id: str | None
    author: str
    rationale: str
    severity: Severity
    timestamp: datetime
    records: tuple[ValidationRecord, ...]
    deltas: tuple[str, ...]
    prev: str
    digest: str = ""

    def body_lines(self) -> list[str]:
        lines = [
            f"entry {self.seq}",
            f"ref {self.line} {self.revision}",
            f"kind {self.kind}",
            f"proposal {self.proposal_id or '-'}",
            f"author {self.author}",
            f"rationale {self.rationale}".rstrip(),
            f"severity {Severity(self.severity).value}",
            f"timestamp {format_ts(self.timestamp)}",
        ]
        lines += [r.render() for r in self.records]
        lines += [f"delta {d}" for d in self.deltas]
        lines.append(f"prev {self.prev}")
        return lines

    def compute_digest(self) -> str:
        return hexdigest("\n".join(self.body_lines()) + "\n")

    def render(self) -> str:
        return "\n".join(self.body_lines() + [f"digest {self.digest}"]) + "\n"

    def sealed(self) -> ChangelogEntry:
        return replace(self, digest=self.compute_digest())


def verify_chain(entries: tuple[ChangelogEntry, ...] | list[ChangelogEntry]) -> None:
    prev = GENESIS
    for i, entry in enumerate(entries):
        if entry.seq != i:
            raise ChainBroken(f"changelog entry {i} has sequence number {entry.seq}")
        if entry.prev != prev:
            raise ChainBroken(f"changelog entry {i} does not chain to its predecessor")
        if entry.compute_digest() != entry.digest:
            raise ChainBroken(f"changelog entry {i} digest mismatch")
        prev = entry.digest


@dataclass(frozen=True)
class DroppedOp:
    branch: str
    changeset_index: int
    op: str
    reason: str

    def render(self) -> str:
        return f"dropped {self.branch} cs{self.changeset_index} {self.reason} {self.op}"


@dataclass(frozen=True)
class BranchRebase:
    branch: str
    old_base: int
    new_base: int
    kept_ops: int
    dropped: tuple[DroppedOp, ...]

    def render_lines(self) -> list[str]:
        head = (
            f"rebased {self.branch} trunk@{self.old_base} -> trunk@{self.new_base}"
            f" kept={self.kept_ops} dropped={len(self.dropped)}"
        )
        return [head] + [d.render() for d in self.dropped]


@dataclass(frozen=True)
class PropagationReport:
    rebases: tuple[BranchRebase, ...] = ()

    @property
    def dropped(self) -> tuple[DroppedOp, ...]:
        return tuple(d for r in self.rebases for d in r.dropped)

    def lines(self) -> list[str]:
        return [line for r in self.rebases for line in r.render_lines()]

    def render(self) -> str:
        lines = self.lines()
        lines.append(f"{len(self.rebases)} branches rebased, {len(self.dropped)} ops dropped")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RepoConfig:
    quorum: int = 2
    staleness_horizon_days: int = 365

    def __post_init__(self):
        if self.quorum < 1:
            raise ValueError("quorum must be at least 1")
        if self.staleness_horizon_days < 1:
            raise ValueError("staleness horizon must be at least one day")


def _now(now: datetime | None) -> datetime:
    return normalize_ts(now) if now is not None else utcnow()


def _make_revision(
    line: str,
    number: int,
    kind: str,
    parent: int | None,
    base: int | None,
    changesets: tuple[ChangeSet, ...],
    proposal_id: str | None,
    timestamp: datetime,
    snapshot: CognitiveGraph,
    overlay: tuple[ChangeSet, ...] = (),
) -> Revision:
    return Revision(
        line=line,
        number=number,
        kind=kind,
        parent=parent,
        base=base,
        changesets=changesets,
        proposal_id=proposal_id,
        timestamp=timestamp,
        changeset_digest=changesets_digest(changesets),
        snapshot_digest=snapshot_digest(snapshot),
        snapshot=snapshot,
        overlay=overlay,
    )


@dataclass(frozen=True)
class Repository:
    config: RepoConfig
    trunk: tuple[Revision, ...]
    branches: Mapping[str, tuple[Revision, ...]] = field(default_factory=dict)
    proposals: Mapping[str, Proposal] = field(default_factory=dict)
    log: tuple[ChangelogEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "branches", MappingProxyType(dict(self.branches)))
        object.__setattr__(self, "proposals", MappingProxyType(dict(self.proposals)))

    __hash__ = None  # type: ignore[assignment]

    # -- construction ------------------------------------------------------------

    @classmethod
    def init(
        cls,
        seed: CognitiveGraph,
        config: RepoConfig | None = None,
        now: datetime | None = None,
        author: str = "baseline",
        rationale: str = "baseline trunk",
    ) -> Repository:
        report = run_checks(seed)
        if not report.passed:
            raise SeedInvalid("seed graph fails automated checks", report)
        now = _now(now)
        ops = graph_as_ops(seed)
        changesets = (ChangeSet(tuple(ops), author, rationale, Severity.MINOR),) if ops else ()
        rev = _make_revision(TRUNK, 0, "seed", None, None, changesets, None, now, seed)
        entry = ChangelogEntry(
            seq=0,
            line=TRUNK,
            revision=0,
            kind="seed",
            proposal_id=None,
            author=author,
            rationale=rationale,
            severity=Severity.MINOR,
            timestamp=now,
            records=(),
            deltas=tuple(op.render() for cs in changesets for op in cs.ops),
            prev=GENESIS,
        ).sealed()
        return cls(config or RepoConfig(), (rev,), {}, {}, (entry,))

    # -- queries -----------------------------------------------------------------

    def lines(self) -> list[str]:
        return [TRUNK] + sorted(self.branches)

    def history(self, line: str = TRUNK) -> tuple[Revision, ...]:
        if line == TRUNK:
            return self.trunk
        try:
            return self.branches[line]
        except KeyError:
            raise UnknownLine(f"no line named {line!r}") from None

    def head(self, line: str = TRUNK) -> Revision:
        return self.history(line)[-1]

    def revision(self, line: str, number: int) -> Revision:
        hist = self.history(line)
        if not 0 <= number < len(hist):
            raise UnknownRevision(f"{line} has no revision {number} (head is {len(hist) - 1})")
        return hist[number]

    def snapshot(self, line: str = TRUNK, number: int | None = None) -> CognitiveGraph:
        if number is None:
            return self.head(line).snapshot
        return self.revision(line, number).snapshot

    def proposal(self, pid: str) -> Proposal:
        try:
            return self.proposals[pid]
        except KeyError:
            raise UnknownProposal(f"no proposal {pid!r}") from None

    def changelog(self, line: str | None = None) -> list[ChangelogEntry]:
        """Changelog entries, optionally limited to one line (propagation markers count for branches)."""
        if line is None:
            return list(self.log)
        self.history(line)
        if line == TRUNK:
            return [e for e in self.log if e.line == TRUNK]
        prefix = f"rebased {line} "
        return [
            e for e in self.log
            if e.line == line or (e.kind == "propagate" and any(d.startswith(prefix) for d in e.deltas))
        ]

    def verify(self) -> None:
        """Re-derive every digest from stored changesets; raise ChainBroken on any mismatch."""
        graph = CognitiveGraph()
        for rev in self.trunk:
            graph = fold(rev.changesets, graph)
            _verify_revision(rev, graph)
        for name, hist in self.branches.items():
            overlay: tuple[ChangeSet, ...] = ()
            base = None
            for rev in hist:
                if rev.kind in ("create", "rebase"):
                    base, overlay = rev.base, rev.changesets
                else:
                    overlay = overlay + rev.changesets
                graph = fold(overlay, self.trunk[base].snapshot)
                _verify_revision(rev, graph)
        verify_chain(self.log)

    # -- mutations -----------------------------------------------------------------

    def _append_log(self, **fields) -> tuple[ChangelogEntry, ...]:
        prev = self.log[-1].digest if self.log else GENESIS
        entry = ChangelogEntry(seq=len(self.log), prev=prev, **fields).sealed()
        return self.log + (entry,)

    def create_branch(self, name: str, at: int | None = None, now: datetime | None = None) -> Repository:
        if not BRANCH_NAME_RE.fullmatch(name) or name in _RESERVED:
            raise ValueError(f"invalid branch name {name!r}")
        if name in self.branches:
            raise DuplicateBranch(f"branch {name!r} already exists")
        at = len(self.trunk) - 1 if at is None else at
        base = self.revision(TRUNK, at)
        rev = _make_revision(name, 0, "create", None, at, (), None, _now(now), base.snapshot, ())
        branches = dict(self.branches)
        branches[name] = (rev,)
        return replace(self, branches=branches)

    def submit_proposal(self, proposal: Proposal, now: datetime | None = None) -> Repository:
        """Register a draft proposal and run the automated checks against its target head.

        On success the proposal is stored in state ``checks_passed`` with an
        engine-generated automated_check record; on failure ChecksFailed is
        raised and the repository is unchanged.
        """
        if proposal.id in self.proposals:
            raise DuplicateProposal(f"proposal {proposal.id!r} already exists")
        if proposal.state is not ProposalState.DRAFT or proposal.records:
            raise IllegalTransition("proposals are submitted as drafts without records")
        now = _now(now)
        for op in proposal.changeset.ops:
            prov = op_provenance(op)
            if prov is not None and prov.last_validated > now:
                raise FutureProvenance(
                    f"{op.element()}: last_validated {format_ts(prov.last_validated)} is after {format_ts(now)}"
                )
        base = self.head(proposal.target).snapshot
        report = check_changeset(base, proposal.changeset)
        record = ValidationRecord(
            RecordKind.AUTOMATED_CHECK,
            ENGINE_ACTOR,
            None,
            Verdict.PASS if report.passed else Verdict.FAIL,
            now,
            f"check-report:{report.digest()}",
        )
        if not report.passed:
            raise ChecksFailed(f"proposal {proposal.id} fails automated checks", report)
        changeset = proposal.changeset
        if report.worst is not None:
            changeset = changeset.escalate(report.worst)
        stored = replace(proposal, changeset=changeset, records=(record,), state=ProposalState.CHECKS_PASSED)
        proposals = dict(self.proposals)
        proposals[proposal.id] = stored
        return replace(self, proposals=proposals)

    def advance_proposal(self, pid: str, record: ValidationRecord) -> Repository:
        proposal = self.proposal(pid)
        if record.kind is RecordKind.AUTOMATED_CHECK:
            raise IllegalTransition("automated_check records are produced by the engine, not supplied")
        if record.role is None:
            raise IllegalTransition("review records need a role")
        if proposal.state not in (ProposalState.CHECKS_PASSED, ProposalState.IN_REVIEW):
            raise IllegalTransition(f"proposal {pid} is {proposal.state.value}; it accepts no more records")
        updated = replace(proposal, records=proposal.records + (record,), state=ProposalState.IN_REVIEW)
        if _rejected(updated):
            updated = replace(updated, state=ProposalState.REJECTED)
        elif not missing_approvals(updated, self.config.quorum):
            updated = replace(updated, state=ProposalState.APPROVED)
        proposals = dict(self.proposals)
        proposals[pid] = updated
        return replace(self, proposals=proposals)

    def merge(self, pid: str, now: datetime | None = None) -> Repository:
        proposal = self.proposal(pid)
        if proposal.state in (ProposalState.CHECKS_PASSED, ProposalState.IN_REVIEW):
            raise QuorumNotMet(pid, missing_approvals(proposal, self.config.quorum))
        if proposal.state is not ProposalState.APPROVED:
            raise NotApproved(f"proposal {pid} is {proposal.state.value}, not approved")
        now = _now(now)
        cs = proposal.changeset
        head = self.head(proposal.target)
        try:
            merged = cs.apply_unchecked(head.snapshot)
        except ApplicationError as exc:
            report = CheckReport((CheckFinding("ApplicationError", tuple(sorted(cs.elements())), str(exc)),))
            raise PostMergeCheckFailure(f"proposal {pid} no longer applies", report) from None
        report = run_checks(merged)
        if not report.passed:
            raise PostMergeCheckFailure(f"merging {pid} would break {proposal.target}", report)

        number = head.number + 1
        if proposal.target == TRUNK:
            rev = _make_revision(TRUNK, number, "commit", head.number, None, (cs,), pid, now, merged)
            repo = replace(self, trunk=self.trunk + (rev,))
        else:
            rev = _make_revision(
                proposal.target, number, "commit", head.number, head.base, (cs,), pid, now, merged,
                head.overlay + (cs,),
            )
            branches = dict(self.branches)
            branches[proposal.target] = branches[proposal.target] + (rev,)
            repo = replace(self, branches=branches)
        proposals = dict(self.proposals)
        proposals[pid] = replace(proposal, state=ProposalState.MERGED)
        log = self._append_log(
            line=proposal.target,
            revision=number,
            kind="merge",
            proposal_id=pid,
            author=cs.author,
            rationale=cs.rationale,
            severity=cs.severity,
            timestamp=now,
            records=proposal.records,
            deltas=tuple(op.render() for op in cs.ops),
        )
        return replace(repo, proposals=proposals, log=log)

    def propagate(
        self, trunk_revision: int | None = None, now: datetime | None = None
    ) -> tuple[Repository, PropagationReport]:
        """Rebase every branch onto the trunk head, replaying overlays op by op.

        Overlay ops touching an element changed by a critical trunk changeset
        are dropped. Other ops are dropped when they are already satisfied by
        the new base (absorbed) or when guarded application rejects them.
        """
        head = self.trunk[-1]
        if trunk_revision is not None and trunk_revision != head.number:
            self.revision(TRUNK, trunk_revision)
            raise UnknownRevision(f"trunk@{trunk_revision} is not the trunk head (trunk@{head.number})")
        now = _now(now)
        branches = dict(self.branches)
        rebases = []
        for name in sorted(self.branches):
            tip = self.branches[name][-1]
            if tip.base == head.number:
                continue
            critical: set[str] = set()
            for rev in self.trunk[tip.base + 1:]:
                for cs in rev.changesets:
                    if cs.severity is Severity.CRITICAL:
                        critical |= cs.elements()
            state = head.snapshot
            overlay: list[ChangeSet] = []
            dropped: list[DroppedOp] = []
            kept_count = 0
            for ci, cs in enumerate(tip.overlay):
                kept = []
                for op in cs.ops:
                    reason = None
                    if op.element() in critical:
                        reason = "critical-conflict"
                    elif is_satisfied(state, op):
                        reason = "absorbed"
                    else:
                        try:
                            candidate = apply_op(state, op, now=_REPLAY_CLOCK)
                        except GraphError as exc:
                            reason = f"rejected:{type(exc).__name__}"
                        else:
                            state = candidate
                            kept.append(op)
                    if reason is not None:
                        dropped.append(DroppedOp(name, ci, op.render(), reason))
                if kept:
                    overlay.append(replace(cs, ops=tuple(kept)))
                    kept_count += len(kept)
            report = run_checks(state)
            if not report.passed:
                raise PostMergeCheckFailure(f"rebased branch {name} fails checks", report)
            overlay_t = tuple(overlay)
            rev = _make_revision(name, tip.number + 1, "rebase", tip.number, head.number, overlay_t, None, now, state, overlay_t)
            branches[name] = branches[name] + (rev,)
            rebases.append(BranchRebase(name, tip.base, head.number, kept_count, tuple(dropped)))
        report = PropagationReport(tuple(rebases))
        if not rebases:
            return self, report
        log = self._append_log(
            line=TRUNK,
            revision=head.number,
            kind="propagate",
            proposal_id=None,
            author=ENGINE_ACTOR,
            rationale=f"propagate trunk@{head.number} to all branches",
            severity=head.severity,
            timestamp=now,
            records=(),
            deltas=tuple(report.lines()),
        )
        return replace(self, branches=branches, log=log), report

    def rollback(self, line: str, to: int, now: datetime | None = None) -> Repository:
        """Restore ``line`` to revision ``to`` by appending a forward inverse changeset."""
        hist = self.history(line)
        head = hist[-1]
        if not 0 <= to <= head.number:
            raise UnknownRevision(f"{line} has no revision {to} (head is {head.number})")
        if to == head.number:
            raise NotAncestor(f"{line}@{to} is the head itself, not a strict ancestor")
        now = _now(now)
        target = hist[to]
        ops = graph_diff(head.snapshot, target.snapshot)
        rationale = f"rollback {line} to revision {to}"
        changesets = (ChangeSet(tuple(ops), "rollback", rationale, Severity.CRITICAL),) if ops else ()
        restored = head.snapshot
        for cs in changesets:
            restored = cs.apply_unchecked(restored)
        number = head.number + 1
        if line == TRUNK:
            rev = _make_revision(TRUNK, number, "rollback", head.number, None, changesets, None, now, restored)
            repo = replace(self, trunk=self.trunk + (rev,))
        else:
            rev = _make_revision(
                line, number, "rollback", head.number, head.base, changesets, None, now, restored,
                head.overlay + changesets,
            )
            branches = dict(self.branches)
            branches[line] = hist + (rev,)
            repo = replace(self, branches=branches)
        if rev.snapshot_digest != target.snapshot_digest:
            raise AssertionError("rollback did not reproduce the target snapshot")
        log = self._append_log(
            line=line,
            revision=number,
            kind="rollback",
            proposal_id=None,
            author="rollback",
            rationale=rationale,
            severity=Severity.CRITICAL,
            timestamp=now,
            records=(),
            deltas=tuple(op.render() for cs in changesets for op in cs.ops),
        )
        return replace(repo, log=log)


def _verify_revision(rev: Revision, graph: CognitiveGraph) -> None:
    if changesets_digest(rev.changesets) != rev.changeset_digest:
        raise ChainBroken(f"{rev.line}@{rev.number}: changeset digest mismatch")
    if snapshot_digest(graph) != rev.snapshot_digest:
        raise ChainBroken(f"{rev.line}@{rev.number}: snapshot digest mismatch")


def init_repository(seed: CognitiveGraph, config: RepoConfig | None = None, now: datetime | None = None) -> Repository:
    return Repository.init(seed, config, now)
