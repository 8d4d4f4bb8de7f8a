"""Repository directory layout.

::

    <repo>/config            quorum, staleness horizon
    <repo>/trunk.log         one revision block per trunk revision
    <repo>/branches/<b>.log  one revision block per branch revision
    <repo>/proposals.log     proposals with their validation records
    <repo>/changelog.log     hash-chained changelog entries

A revision block::

    revision 1
    kind commit
    parent 0
    base -
    proposal P2
    timestamp 2026-05-01T00:00:00Z
    changeset
    author ...
    ...
    end
    changeset-digest 5f0c...
    snapshot-digest 91aa...

Loading replays every changeset and refuses the directory if any digest or
the changelog chain fails to verify.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from filelock import FileLock, Timeout

from ocg.changeset import ChangeSet, Severity, fold, parse_changeset
from ocg.errors import ChainBroken, OcgError, ParseError, StoreError
from ocg.repository import (
    TRUNK,
    ChangelogEntry,
    Proposal,
    RepoConfig,
    Repository,
    Revision,
    ValidationRecord,
    snapshot_digest,
    verify_chain,
)
from ocg.graph import CognitiveGraph
from ocg.timeutil import format_ts, parse_ts

LOCK_NAME = ".lock"


def _opt(value) -> str:
    return "-" if value is None else str(value)


def _unopt_int(text: str) -> int | None:
    return None if text == "-" else int(text)


def render_revision(rev: Revision) -> str:
    lines = [
        f"revision {rev.number}",
        f"kind {rev.kind}",
        f"parent {_opt(rev.parent)}",
        f"base {_opt(rev.base)}",
        f"proposal {_opt(rev.proposal_id)}",
        f"timestamp {format_ts(rev.timestamp)}",
    ]
    for cs in rev.changesets:
        lines += ["changeset", *cs.lines(), "end"]
    lines += [f"changeset-digest {rev.changeset_digest}", f"snapshot-digest {rev.snapshot_digest}"]
    return "\n".join(lines) + "\n"


def render_proposal(p: Proposal) -> str:
    lines = [f"proposal {p.id}", f"target {p.target}", f"state {p.state.value}", "changeset", *p.changeset.lines(), "end"]
    lines += [r.render() for r in p.records]
    lines.append("end-proposal")
    return "\n".join(lines) + "\n"


class _Lines:
    """Cursor over a text file with 1-based line numbers for error messages."""

    def __init__(self, text: str, name: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.pos = 0
        self.name = name

    def done(self) -> bool:
        while self.pos < len(self.lines) and not self.lines[self.pos].strip():
            self.pos += 1
        return self.pos >= len(self.lines)

    def peek(self) -> str:
        return self.lines[self.pos]

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise self.error("unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, key: str) -> str:
        line = self.next()
        word, _, rest = line.partition(" ")
        if word != key:
            raise self.error(f"expected {key!r}, found {line!r}", self.pos)
        return rest

    def error(self, reason: str, line: int | None = None) -> ParseError:
        return ParseError(f"{self.name}: {reason}", line if line is not None else self.pos + 1)

    def changeset(self) -> ChangeSet:
        start = self.pos + 1
        body = []
        while True:
            line = self.next()
            if line == "end":
                break
            body.append(line)
        return parse_changeset("\n".join(body), first_line=start)


def _parse_revisions(text: str, name: str, line_name: str) -> list[dict]:
    cur = _Lines(text, name)
    out = []
    while not cur.done():
        try:
            number = int(cur.expect("revision"))
            kind = cur.expect("kind")
            parent = _unopt_int(cur.expect("parent"))
            base = _unopt_int(cur.expect("base"))
            proposal = cur.expect("proposal")
            stamp = parse_ts(cur.expect("timestamp"))
            changesets = []
            while cur.peek() == "changeset":
                cur.next()
                changesets.append(cur.changeset())
            cs_digest = cur.expect("changeset-digest")
            snap_digest = cur.expect("snapshot-digest")
        except ValueError as exc:
            raise cur.error(str(exc)) from None
        out.append(
            dict(
                line=line_name, number=number, kind=kind, parent=parent, base=base,
                changesets=tuple(changesets), proposal_id=None if proposal == "-" else proposal,
                timestamp=stamp, changeset_digest=cs_digest, snapshot_digest=snap_digest,
            )
        )
    return out


def _parse_proposals(text: str) -> dict[str, Proposal]:
    cur = _Lines(text, "proposals.log")
    out: dict[str, Proposal] = {}
    while not cur.done():
        try:
            pid = cur.expect("proposal")
            target = cur.expect("target")
            state = cur.expect("state")
            cur.expect("changeset")
            cs = cur.changeset()
            records = []
            while True:
                line = cur.next()
                if line == "end-proposal":
                    break
                records.append(ValidationRecord.parse(line))
            out[pid] = Proposal(pid, target, cs, tuple(records), state)
        except ValueError as exc:
            raise cur.error(str(exc)) from None
    return out


def _parse_changelog(text: str) -> list[ChangelogEntry]:
    cur = _Lines(text, "changelog.log")
    out = []
    while not cur.done():
        try:
            seq = int(cur.expect("entry"))
            ref_line, ref_rev = cur.expect("ref").split()
            kind = cur.expect("kind")
            proposal = cur.expect("proposal")
            author = cur.expect("author")
            rationale = cur.expect("rationale")
            severity = Severity(cur.expect("severity"))
            stamp = parse_ts(cur.expect("timestamp"))
            records, deltas = [], []
            while cur.peek().startswith("record "):
                records.append(ValidationRecord.parse(cur.next()))
            while cur.peek().startswith("delta "):
                deltas.append(cur.next()[len("delta "):])
            prev = cur.expect("prev")
            digest = cur.expect("digest")
        except (ValueError, IndexError) as exc:
            raise cur.error(str(exc)) from None
        out.append(
            ChangelogEntry(
                seq=seq, line=ref_line, revision=int(ref_rev), kind=kind,
                proposal_id=None if proposal == "-" else proposal, author=author, rationale=rationale,
                severity=severity, timestamp=stamp, records=tuple(records), deltas=tuple(deltas),
                prev=prev, digest=digest,
            )
        )
    return out


def _parse_config(text: str) -> RepoConfig:
    values = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        try:
            values[key] = int(value)
        except ValueError:
            raise ParseError(f"config: bad value for {key!r}", lineno) from None
    try:
        return RepoConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"config: {exc}") from None


def render_config(config: RepoConfig) -> str:
    return f"quorum {config.quorum}\nstaleness_horizon_days {config.staleness_horizon_days}\n"


def _build_line(raw: list[dict], line: str, trunk: tuple[Revision, ...] | None) -> tuple[Revision, ...]:
    revs = []
    graph = CognitiveGraph()
    overlay: tuple[ChangeSet, ...] = ()
    for i, fields in enumerate(raw):
        if fields["number"] != i or fields["parent"] != (i - 1 if i else None):
            raise ChainBroken(f"{line}: revision numbering broken at entry {i}")
        try:
            if trunk is None:
                graph = fold(fields["changesets"], graph)
            else:
                if fields["kind"] in ("create", "rebase"):
                    if fields["base"] is None or not 0 <= fields["base"] < len(trunk):
                        raise ChainBroken(f"{line}@{i}: unknown trunk base {fields['base']}")
                    overlay = fields["changesets"]
                else:
                    overlay = overlay + fields["changesets"]
                graph = fold(overlay, trunk[fields["base"]].snapshot)
        except OcgError as exc:
            if isinstance(exc, StoreError):
                raise
            raise StoreError(f"{line}@{i}: stored changesets do not replay: {exc}") from None
        rev = Revision(**fields, snapshot=graph, overlay=overlay)
        revs.append(rev)
    return tuple(revs)


def load(path: str | os.PathLike) -> Repository:
    root = Path(path)
    trunk_file = root / "trunk.log"
    if not trunk_file.is_file():
        raise StoreError(f"{root} is not an OCG repository (no trunk.log)")
    try:
        config = _parse_config(_read(root / "config")) if (root / "config").exists() else RepoConfig()
        trunk = _build_line(_parse_revisions(_read(trunk_file), "trunk.log", TRUNK), TRUNK, None)
        branches = {}
        bdir = root / "branches"
        if bdir.is_dir():
            for f in sorted(bdir.glob("*.log")):
                name = f.stem
                branches[name] = _build_line(_parse_revisions(_read(f), f"branches/{f.name}", name), name, trunk)
        proposals = _parse_proposals(_read(root / "proposals.log")) if (root / "proposals.log").exists() else {}
        log = tuple(_parse_changelog(_read(root / "changelog.log")))
    except ParseError as exc:
        raise StoreError(f"cannot load repository: {exc}") from None
    repo = Repository(config, trunk, branches, proposals, log)
    repo.verify()
    return repo


def _read(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ChainBroken(f"{path.name} is not valid UTF-8: {exc}") from None
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from None


def _write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def save(repo: Repository, path: str | os.PathLike) -> None:
    root = Path(path)
    (root / "branches").mkdir(parents=True, exist_ok=True)
    _write(root / "config", render_config(repo.config))
    _write(root / "trunk.log", "".join(render_revision(r) for r in repo.trunk))
    for name, hist in repo.branches.items():
        _write(root / "branches" / f"{name}.log", "".join(render_revision(r) for r in hist))
    _write(root / "proposals.log", "".join(render_proposal(p) for p in repo.proposals.values()))
    _write(root / "changelog.log", "".join(e.render() for e in repo.log))


def exists(path: str | os.PathLike) -> bool:
    return (Path(path) / "trunk.log").exists()


@contextmanager
def locked(path: str | os.PathLike, timeout: float = 10.0) -> Iterator[None]:
    """Advisory lock serializing mutating commands on one repository directory."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    try:
        with FileLock(str(root / LOCK_NAME), timeout=timeout):
            yield
    except Timeout:
        raise StoreError(f"repository {root} is locked by another process") from None


__all__ = ["load", "save", "exists", "locked", "render_revision", "snapshot_digest", "verify_chain"]
