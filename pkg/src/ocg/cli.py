"""``ocg`` command line: thin adapters over the library operations.

Exit status: 0 success, 2 check/validation failure, 3 governance rule
violation, 4 parse or I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Callable, TextIO

from ocg import cdc, store
from ocg.changeset import parse_changeset
from ocg.errors import (
    CheckFailure,
    GovernanceError,
    GraphError,
    OcgError,
    ParseError,
    StoreError,
)
from ocg.graph import ConceptId
from ocg.repository import (
    TRUNK,
    Proposal,
    RecordKind,
    RepoConfig,
    Repository,
    ValidationRecord,
)
from ocg.serialize import canonical_parse, canonical_serialize
from ocg.timeutil import parse_ts, utcnow
from ocg.validation import CheckReport, provenance_staleness, run_checks

DATA_DIR = Path(__file__).resolve().parent / "data"

EXIT_OK = 0
EXIT_CHECK = 2
EXIT_GOVERNANCE = 3
EXIT_PARSE_IO = 4

MUTATING = {"init", "branch", "propose", "review", "merge", "propagate", "rollback"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, which would collide with "check failed".
    def error(self, message):
        raise UsageError(message)


class _Context:
    def __init__(self, args, out: TextIO, err: TextIO, cwd: Path):
        self.args = args
        self.out = out
        self.err = err
        self.cwd = cwd
        self.repo_path = self.resolve(args.repo or os.environ.get("OCG_REPO") or ".")
        self.now: datetime = parse_ts(args.now) if args.now else utcnow()

    def resolve(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.cwd / path

    def read_text(self, name: str) -> str:
        try:
            return self.resolve(name).read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreError(f"cannot read {name}: {exc.strerror}") from None

    def load(self) -> Repository:
        return store.load(self.repo_path)

    def save(self, repo: Repository) -> None:
        store.save(repo, self.repo_path)

    def write(self, text: str) -> None:
        self.out.write(text if text.endswith("\n") else text + "\n")


def _mastered(text: str | None) -> list[ConceptId] | None:
    if text is None:
        return None
    return [ConceptId.parse(part) for part in text.split(",") if part.strip()]


def cmd_init(ctx: _Context) -> int:
    if store.exists(ctx.repo_path):
        raise StoreError(f"{ctx.repo_path} already holds a repository")
    try:
        seed = canonical_parse(ctx.read_text(ctx.args.seed))
    except ParseError as exc:
        raise ParseError(f"{ctx.args.seed}: {exc}") from None
    config = RepoConfig(ctx.args.quorum, ctx.args.horizon_days)
    repo = Repository.init(seed, config, ctx.now)
    ctx.save(repo)
    ctx.write(f"initialized trunk@0 snapshot {repo.head().snapshot_digest}")
    return EXIT_OK


def cmd_branch(ctx: _Context) -> int:
    repo = ctx.load().create_branch(ctx.args.name, ctx.args.at, ctx.now)
    ctx.save(repo)
    ctx.write(f"created branch {ctx.args.name} at trunk@{repo.head(ctx.args.name).base}")
    return EXIT_OK


def cmd_propose(ctx: _Context) -> int:
    repo = ctx.load()
    cs = parse_changeset(ctx.read_text(ctx.args.changeset))
    repo = repo.submit_proposal(Proposal(ctx.args.id, ctx.args.target, cs), ctx.now)
    ctx.save(repo)
    proposal = repo.proposal(ctx.args.id)
    ctx.write(f"proposal {proposal.id} {proposal.state.value}")
    ctx.write(f"severity {proposal.severity.value}")
    return EXIT_OK


def cmd_review(ctx: _Context) -> int:
    a = ctx.args
    record = ValidationRecord(RecordKind(a.kind), a.actor, a.role, a.verdict, ctx.now, a.doc)
    repo = ctx.load().advance_proposal(a.pid, record)
    ctx.save(repo)
    ctx.write(f"proposal {a.pid} {repo.proposal(a.pid).state.value}")
    return EXIT_OK


def cmd_merge(ctx: _Context) -> int:
    repo = ctx.load()
    target = repo.proposal(ctx.args.pid).target
    repo = repo.merge(ctx.args.pid, ctx.now)
    ctx.save(repo)
    ctx.write(f"merged {ctx.args.pid} into {target}@{repo.head(target).number}")
    return EXIT_OK


def cmd_propagate(ctx: _Context) -> int:
    repo, report = ctx.load().propagate(now=ctx.now)
    ctx.save(repo)
    ctx.write(report.render())
    return EXIT_OK


def cmd_rollback(ctx: _Context) -> int:
    repo = ctx.load().rollback(ctx.args.line, ctx.args.rev, ctx.now)
    ctx.save(repo)
    ctx.write(f"rolled back {ctx.args.line} to {ctx.args.rev} as {ctx.args.line}@{repo.head(ctx.args.line).number}")
    return EXIT_OK


def cmd_log(ctx: _Context) -> int:
    line = None if ctx.args.line == "all" else ctx.args.line
    entries = ctx.load().changelog(line)
    ctx.out.write("\n".join(e.render() for e in entries))
    return EXIT_OK


def cmd_check(ctx: _Context) -> int:
    graph = ctx.load().snapshot(ctx.args.line, ctx.args.rev)
    report = run_checks(graph)
    if ctx.args.stale_days is not None:
        from datetime import timedelta

        stale = provenance_staleness(graph, timedelta(days=ctx.args.stale_days), ctx.now)
        report = CheckReport(report.findings + tuple(stale))
    ctx.write(report.render())
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_paths(ctx: _Context) -> int:
    graph = ctx.load().snapshot(ctx.args.line)
    paths = graph.enumerate_paths(ConceptId.parse(ctx.args.src), ConceptId.parse(ctx.args.dst), ctx.args.max_len)
    for path in paths:
        ctx.write(" -> ".join(str(n) for n in path))
    ctx.write(f"{len(paths)} paths")
    return EXIT_OK


def cmd_cdc_check(ctx: _Context) -> int:
    graph = ctx.load().snapshot(ctx.args.line)
    trace = cdc.parse_trace(ctx.read_text(ctx.args.trace))
    violations = cdc.validate_trace(graph, trace, _mastered(ctx.args.mastered))
    ctx.write(cdc.render_violations(violations))
    return EXIT_OK if not violations else EXIT_CHECK


def cmd_cdc_next(ctx: _Context) -> int:
    graph = ctx.load().snapshot(ctx.args.line)
    for label in cdc.permitted_next_steps(graph, ctx.args.domain, _mastered(ctx.args.mastered)):
        ctx.write(str(label))
    return EXIT_OK


def cmd_export(ctx: _Context) -> int:
    graph = ctx.load().snapshot(ctx.args.line, ctx.args.rev)
    ctx.out.write(canonical_serialize(graph).decode("utf-8"))
    return EXIT_OK


def cmd_scenario(ctx: _Context) -> int:
    from ocg.scenario import load_script, run_scenario

    path = ctx.resolve(ctx.args.script)
    if not path.exists():
        bundled = DATA_DIR / ctx.args.script
        for candidate in (bundled, bundled.with_name(bundled.name + ".scenario")):
            if candidate.is_file():
                path = candidate
                break
    script = load_script(path)
    report = run_scenario(script)
    ctx.write(report.render())
    return EXIT_OK if report.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ocg", description="Versioned open cognitive graph engine")
    p.add_argument("--repo", help="repository directory (default: $OCG_REPO or .)")
    p.add_argument("--now", help="override the clock, e.g. 2026-03-01T00:00:00Z")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("init", help="create a repository from a seed .ocg graph")
    s.add_argument("seed")
    s.add_argument("--quorum", type=int, default=2)
    s.add_argument("--horizon-days", type=int, default=365)
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("branch", help="branch operations")
    bsub = s.add_subparsers(dest="branch_command", required=True, parser_class=_Parser)
    b = bsub.add_parser("create")
    b.add_argument("name")
    b.add_argument("--at", type=int)
    b.set_defaults(func=cmd_branch)

    s = sub.add_parser("propose", help="submit a changeset as a proposal")
    s.add_argument("target")
    s.add_argument("changeset")
    s.add_argument("--id", required=True)
    s.set_defaults(func=cmd_propose)

    s = sub.add_parser("review", help="attach a validation record to a proposal")
    s.add_argument("pid")
    s.add_argument("--role", required=True)
    s.add_argument("--actor", required=True)
    s.add_argument("--verdict", required=True, choices=["pass", "fail", "advisory"])
    s.add_argument("--doc", default="")
    s.add_argument("--kind", default="expert_review", choices=["expert_review", "pilot_evidence"])
    s.set_defaults(func=cmd_review)

    s = sub.add_parser("merge", help="merge an approved proposal into its target line")
    s.add_argument("pid")
    s.set_defaults(func=cmd_merge)

    s = sub.add_parser("propagate", help="rebase every branch onto the trunk head")
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("rollback", help="append a revision restoring an earlier one")
    s.add_argument("line")
    s.add_argument("rev", type=int)
    s.set_defaults(func=cmd_rollback)

    s = sub.add_parser("log", help="print the changelog of a line, or 'all'")
    s.add_argument("line")
    s.set_defaults(func=cmd_log)

    s = sub.add_parser("check", help="run consistency checks on a line head")
    s.add_argument("line", nargs="?", default=TRUNK)
    s.add_argument("--rev", type=int)
    s.add_argument("--stale-days", type=int, help="also report provenance older than this many days")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("paths", help="enumerate learning paths between two concepts")
    s.add_argument("src")
    s.add_argument("dst")
    s.add_argument("--max-len", type=int, default=16)
    s.add_argument("--line", default=TRUNK)
    s.set_defaults(func=cmd_paths)

    s = sub.add_parser("cdc", help="CDC trace tools")
    csub = s.add_subparsers(dest="cdc_command", required=True, parser_class=_Parser)
    c = csub.add_parser("check")
    c.add_argument("trace")
    c.add_argument("--mastered")
    c.add_argument("--line", default=TRUNK)
    c.set_defaults(func=cmd_cdc_check)
    c = csub.add_parser("next")
    c.add_argument("--domain", required=True)
    c.add_argument("--mastered")
    c.add_argument("--line", default=TRUNK)
    c.set_defaults(func=cmd_cdc_next)

    s = sub.add_parser("export", help="print a revision as canonical .ocg")
    s.add_argument("line")
    s.add_argument("rev", type=int)
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("scenario", help="run a .scenario script")
    s.add_argument("script")
    s.set_defaults(func=cmd_scenario)
    return p


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (CheckFailure, GraphError)):
        return EXIT_CHECK
    if isinstance(exc, GovernanceError):
        return EXIT_GOVERNANCE
    return EXIT_PARSE_IO


def main(
    argv: list[str] | None = None,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
    cwd: str | os.PathLike | None = None,
) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        ctx = _Context(args, out, err, Path(cwd) if cwd is not None else Path.cwd())
    except UsageError as exc:
        err.write(f"error: usage: {exc}\n")
        return EXIT_PARSE_IO
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE_IO
    func: Callable[[_Context], int] = args.func
    try:
        if args.command in MUTATING:
            with store.locked(ctx.repo_path):
                return func(ctx)
        return func(ctx)
    except CheckFailure as exc:
        out.write(exc.report.render())
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_CHECK
    except (OcgError, OSError, ValueError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return exit_code_for(exc)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
