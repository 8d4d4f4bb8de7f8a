"""Scripted end-to-end scenarios over the ``ocg`` command line.

A script is a sequence of steps. Each step is one ``ocg ...`` command
followed by any number of expectations::

    # comments and blank lines are ignored
    now 2026-03-01T09:00:00Z
    ocg propose ms-science-teachers scaffolding.ocs --id P1
    expect exit 0
    expect stdout line proposal P1 checks_passed
    expect stdout contains checks_passed
    expect stdout lacks rejected
    expect stdout noline proposal P1 rejected
    expect stderr contains QuorumNotMet

A step without an ``expect exit`` line must exit 0. Commands run in process
against a fresh temporary repository; file arguments resolve relative to the
script's directory. ``now`` pins the clock for every following command.
"""

from __future__ import annotations

import io
import shlex
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ocg.errors import ParseError
from ocg.timeutil import format_ts, parse_ts

STREAMS = ("stdout", "stderr")
MATCHERS = ("contains", "lacks", "line", "noline")


@dataclass(frozen=True)
class Expectation:
    stream: str  # "exit", "stdout" or "stderr"
    matcher: str  # "" for exit
    value: str
    lineno: int

    def describe(self) -> str:
        if self.stream == "exit":
            return f"exit {self.value}"
        return f"{self.stream} {self.matcher} {self.value}"

    def check(self, code: int, out: str, err: str) -> str | None:
        """Return a failure message, or None when satisfied."""
        if self.stream == "exit":
            return None if str(code) == self.value else f"expected exit {self.value}, got {code}"
        text = out if self.stream == "stdout" else err
        lines = text.splitlines()
        ok = {
            "contains": self.value in text,
            "lacks": self.value not in text,
            "line": self.value in lines,
            "noline": self.value not in lines,
        }[self.matcher]
        return None if ok else f"expected {self.describe()}"


@dataclass(frozen=True)
class Step:
    argv: tuple[str, ...]
    now: str | None
    lineno: int
    expectations: tuple[Expectation, ...] = ()

    @property
    def command(self) -> str:
        return "ocg " + shlex.join(self.argv)

    @property
    def expected_exit(self) -> str:
        for e in self.expectations:
            if e.stream == "exit":
                return e.value
        return "0"


@dataclass(frozen=True)
class Script:
    name: str
    directory: Path
    steps: tuple[Step, ...]


def parse_script(text: str, name: str = "<script>", directory: Path | None = None) -> Script:
    steps: list[Step] = []
    now: str | None = None
    pending: dict | None = None

    def flush():
        if pending is not None:
            steps.append(Step(pending["argv"], pending["now"], pending["lineno"], tuple(pending["exp"])))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        if word == "now":
            try:
                now = format_ts(parse_ts(rest.strip()))
            except ValueError as exc:
                raise ParseError(f"{name}: {exc}", lineno) from None
        elif word == "ocg":
            flush()
            try:
                argv = tuple(shlex.split(rest))
            except ValueError as exc:
                raise ParseError(f"{name}: {exc}", lineno) from None
            pending = {"argv": argv, "now": now, "lineno": lineno, "exp": []}
        elif word == "expect":
            if pending is None:
                raise ParseError(f"{name}: expectation before any command", lineno)
            pending["exp"].append(_parse_expectation(rest, name, lineno))
        else:
            raise ParseError(f"{name}: unknown directive {word!r}", lineno)
    flush()
    return Script(name, directory or Path.cwd(), tuple(steps))


def _parse_expectation(rest: str, name: str, lineno: int) -> Expectation:
    stream, _, tail = rest.partition(" ")
    if stream == "exit":
        value = tail.strip()
        if not value.isdigit():
            raise ParseError(f"{name}: exit code must be a number", lineno)
        return Expectation("exit", "", value, lineno)
    if stream in STREAMS:
        matcher, _, value = tail.partition(" ")
        if matcher in MATCHERS and value:
            return Expectation(stream, matcher, value, lineno)
    raise ParseError(f"{name}: malformed expectation {rest!r}", lineno)


def load_script(path: str | Path) -> Script:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_script(text, path.name, path.resolve().parent)


@dataclass(frozen=True)
class StepResult:
    step: Step
    exit_code: int
    stdout: str
    stderr: str
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures

    def render_lines(self, index: int) -> list[str]:
        tag = "PASS" if self.passed else "FAIL"
        lines = [f"{tag} {index} {self.step.command}"]
        if not self.passed:
            lines += [f"  {msg}" for msg in self.failures]
            for stream, text in (("stdout", self.stdout), ("stderr", self.stderr)):
                for out_line in text.splitlines():
                    lines.append(f"  {stream}| {out_line}")
        return lines


@dataclass
class ScenarioReport:
    name: str
    results: list[StepResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def render(self) -> str:
        lines = [f"scenario {self.name}"]
        for i, result in enumerate(self.results, start=1):
            lines += result.render_lines(i)
        ok = sum(r.passed for r in self.results)
        lines.append(f"{ok}/{len(self.results)} steps passed")
        return "\n".join(lines) + "\n"


def run_step(step: Step, repo_dir: Path, directory: Path) -> StepResult:
    from ocg.cli import main

    argv = ["--repo", str(repo_dir)]
    if step.now is not None:
        argv += ["--now", step.now]
    out, err = io.StringIO(), io.StringIO()
    code = main(argv + list(step.argv), stdout=out, stderr=err, cwd=directory)
    stdout, stderr = out.getvalue(), err.getvalue()
    checks = [Expectation("exit", "", step.expected_exit, step.lineno)]
    checks += [e for e in step.expectations if e.stream != "exit"]
    failures = [msg for e in checks if (msg := e.check(code, stdout, stderr))]
    # Temporary paths would make reports differ between runs.
    stdout = stdout.replace(str(repo_dir), "<repo>")
    stderr = stderr.replace(str(repo_dir), "<repo>")
    return StepResult(step, code, stdout, stderr, tuple(failures))


def run_scenario(script: Script, repo_dir: Path | None = None, stop_on_failure: bool = False) -> ScenarioReport:
    """Run every step; a failed step is recorded and later steps still run.

    The repository lives in a throwaway directory unless ``repo_dir`` is
    given, in which case it is left there for inspection.
    """
    if repo_dir is not None:
        return _run_in(script, Path(repo_dir), stop_on_failure)
    with tempfile.TemporaryDirectory(prefix="ocg-scenario-") as tmp:
        return _run_in(script, Path(tmp) / "repo", stop_on_failure)


def _run_in(script: Script, repo_dir: Path, stop_on_failure: bool) -> ScenarioReport:
    report = ScenarioReport(script.name)
    for step in script.steps:
        result = run_step(step, repo_dir, script.directory)
        report.results.append(result)
        if stop_on_failure and not result.passed:
            break
    return report
