"""Concept-Domain-Claim reasoning traces: parse, render, and check against a graph.

A trace alternates claims and labeled arrows::

    Given: right triangle, a=3, b=4
    --{Apply@Geometry [Pythagorean Theorem]}-->
    c^2 = a^2 + b^2
    --{Compute@Algebra}-->
    ...
    Final answer: c = 5

Claims are opaque text. The parser folds multi-line claims into one line,
drops TeX ``$`` delimiters, and strips the ``Given:`` / ``Final answer:``
prefixes. Arrow groups written inline (``A --{..}--> B`` then
``B --{..}--> C`` on the next line) must agree on the shared claim.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from ocg.errors import BrokenChain, ParseError, UnknownDomain
from ocg.graph import DOMAIN_RE, CognitiveGraph, ConceptId, NodeKind, AnalogousTo

APPLY = "Apply"
COMPUTE = "Compute"

_OPEN = "--{"
_CLOSE = "}-->"
_LABEL_RE = re.compile(
    r"--\{\s*(?P<op>[A-Za-z]+)\s*@\s*(?P<domain>[^\s\[\]{}]+)\s*(?:\[(?P<rule>[^\]\n{}]*)\])?\s*\}-->"
)
_GIVEN_RE = re.compile(r"^\s*Given\s*:", re.MULTILINE)
_FINAL_RE = re.compile(r"^\s*Final answer\s*:", re.MULTILINE)
_WS = re.compile(r"\s+")


def normalize_claim(text: str) -> str:
    return _WS.sub(" ", text.replace("$", "")).strip()


def slugify(rule: str) -> str:
    """Graph term for a rule name: lowercase, punctuation dropped, spaces to underscores."""
    text = re.sub(r"[^\w\s]", "", rule.lower())
    return _WS.sub("_", text.strip())


def rule_display_name(term: str) -> str:
    return term.replace("_", " ").title()


@dataclass(frozen=True)
class StepLabel:
    op: str
    domain: str
    rule: str | None = None

    def __post_init__(self):
        if self.op not in (APPLY, COMPUTE):
            raise ValueError(f"step label must be Apply or Compute, got {self.op!r}")
        if not DOMAIN_RE.fullmatch(self.domain):
            raise ValueError(f"invalid domain {self.domain!r}")
        if self.op == APPLY:
            if self.rule is None or not self.rule.strip() or self.rule != " ".join(self.rule.split()):
                raise ValueError(f"Apply needs a normalized rule name, got {self.rule!r}")
            if any(c in self.rule for c in "[]{}"):
                raise ValueError(f"rule name may not contain brackets: {self.rule!r}")
        elif self.rule is not None:
            raise ValueError("Compute steps carry no rule")

    def render(self) -> str:
        if self.op == APPLY:
            return f"{_OPEN}Apply@{self.domain} [{self.rule}]{_CLOSE}"
        return f"{_OPEN}Compute@{self.domain}{_CLOSE}"

    def __str__(self) -> str:
        return self.render()[3:-4]

    def sort_key(self) -> tuple[str, int, str]:
        return (self.domain, 0 if self.op == APPLY else 1, self.rule or "")


def _check_claim(text: str) -> str:
    if not text:
        raise ValueError("claims must be non-empty")
    if _OPEN in text or _CLOSE in text or "$" in text or text != normalize_claim(text):
        raise ValueError(f"claim is not in normal form: {text!r}")
    return text


@dataclass(frozen=True)
class CdcStep:
    label: StepLabel
    from_claim: str
    to_claim: str


@dataclass(frozen=True)
class CdcTrace:
    given: str
    steps: tuple[CdcStep, ...]
    final: str

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("a trace needs at least one step")
        for claim in [self.given, self.final, *(c for s in self.steps for c in (s.from_claim, s.to_claim))]:
            _check_claim(claim)

    @classmethod
    def from_claims(cls, claims: list[str], labels: list[StepLabel]) -> CdcTrace:
        """Chain ``claims[0] -label0-> claims[1] -label1-> ...``."""
        if len(claims) != len(labels) + 1:
            raise ValueError("need exactly one more claim than labels")
        steps = tuple(CdcStep(lab, claims[i], claims[i + 1]) for i, lab in enumerate(labels))
        return cls(claims[0], steps, claims[-1])

    @property
    def labels(self) -> list[StepLabel]:
        return [s.label for s in self.steps]

    def chain_breaks(self) -> Iterator[tuple[int, str]]:
        if self.steps[0].from_claim != self.given:
            yield 0, "first step does not start from the given claim"
        for i in range(1, len(self.steps)):
            if self.steps[i - 1].to_claim != self.steps[i].from_claim:
                yield i, f"step {i} starts from a claim step {i - 1} did not reach"
        if self.steps[-1].to_claim != self.final:
            yield len(self.steps) - 1, "last step does not reach the final claim"


# --- parsing ------------------------------------------------------------------------


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _scan_arrows(text: str, source: str | None = None, shift: int = 0) -> list[tuple[int, int, StepLabel]]:
    source = text if source is None else source

    def where(offset: int) -> tuple[int, int]:
        return _position(source, shift + offset)

    arrows = []
    pos = 0
    while True:
        start = text.find(_OPEN, pos)
        stray = text.find(_CLOSE, pos)
        if stray != -1 and (start == -1 or stray < start):
            raise ParseError("'}-->' without a matching '--{'", *where(stray))
        if start == -1:
            return arrows
        m = _LABEL_RE.match(text, start)
        if not m:
            raise ParseError(
                "expected step label 'Apply@Domain [Rule]' or 'Compute@Domain' closed by '}-->'",
                *where(start),
            )
        op, domain, rule = m.group("op"), m.group("domain"), m.group("rule")
        if op not in (APPLY, COMPUTE):
            raise ParseError(f"expected 'Apply' or 'Compute', found {op!r}", *where(start))
        if not DOMAIN_RE.fullmatch(domain):
            raise ParseError(f"invalid domain {domain!r}", *where(start))
        if op == APPLY and (rule is None or not rule.strip()):
            raise ParseError("expected '[Rule]' after Apply@Domain", *where(start))
        if op == COMPUTE and rule is not None:
            raise ParseError("Compute steps take no '[Rule]'", *where(start))
        label = StepLabel(op, domain, " ".join(rule.split()) if rule is not None else None)
        arrows.append((start, m.end(), label))
        pos = m.end()


def parse_trace(text: str) -> CdcTrace:
    """Parse CDC text. Raises ParseError, or BrokenChain when inline groups disagree."""
    source = text
    shift = 0
    given_at = _GIVEN_RE.search(text)
    if given_at:
        # Anything before the first "Given:" line (prompt, format reminder) is preamble.
        shift = given_at.end()
        text = text[shift:]

    def where(offset: int) -> tuple[int, int]:
        return _position(source, shift + offset)

    arrows = _scan_arrows(text, source, shift)
    if not arrows:
        raise ParseError("expected at least one step arrow '--{...}-->'", 1, 1)

    segments = []
    prev_end = 0
    for start, end, _ in arrows:
        segments.append((prev_end, text[prev_end:start]))
        prev_end = end
    tail = text[prev_end:]
    final_at = _FINAL_RE.search(tail)
    if final_at:
        # Working shown before the final-answer line is not part of the answer.
        tail = tail[final_at.end():]
    segments.append((prev_end, tail))

    claims: list[str] = []
    for i, (offset, seg) in enumerate(segments):
        inner = 0 < i < len(segments) - 1
        lines = seg.split("\n")
        if inner and len(lines) > 1 and lines[0].strip() and lines[-1].strip():
            left, right = normalize_claim(lines[0]), normalize_claim(lines[-1])
            if any(line.strip() for line in lines[1:-1]):
                raise ParseError("unexpected text between arrow groups", *where(offset + len(lines[0]) + 1))
            if left != right:
                raise BrokenChain(
                    f"arrow group ends with {left!r} but the next group starts with {right!r}",
                    *where(offset),
                )
            claim = left
        else:
            claim = normalize_claim(seg)
        if not claim:
            what = "given claim" if i == 0 else "final claim" if i == len(segments) - 1 else "intermediate claim"
            raise ParseError(f"expected {what}", *where(offset))
        claims.append(claim)
    try:
        return CdcTrace.from_claims(claims, [lab for _, _, lab in arrows])
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def serialize_trace(trace: CdcTrace) -> str:
    """Canonical form: one claim line, one arrow line, alternating."""
    lines = [f"Given: {trace.given}"]
    for i, step in enumerate(trace.steps):
        lines.append(step.label.render())
        lines.append(f"Final answer: {step.to_claim}" if i == len(trace.steps) - 1 else step.to_claim)
    return "\n".join(lines) + "\n"


# --- validation ---------------------------------------------------------------------

VIOLATION_CODES = (
    "UnknownDomain",
    "UnknownRule",
    "RuleDomainMismatch",
    "InadmissibleTransition",
    "UnsatisfiedPrerequisite",
    "BrokenChain",
)


@dataclass(frozen=True)
class TraceViolation:
    step_index: int
    code: str
    message: str

    def render(self) -> str:
        return f"{self.step_index} {self.code} {self.message}"


def render_violations(violations: list[TraceViolation]) -> str:
    lines = [v.render() for v in violations]
    lines.append(f"{len(violations)} violations")
    return "\n".join(lines) + "\n"


def transition_admissible(graph: CognitiveGraph, src: str, dst: str) -> bool:
    if src == dst or (src, dst) in graph.domain_transitions:
        return True
    return any(
        isinstance(ref.kind, AnalogousTo) and {ref.kind.d1, ref.kind.d2} == {src, dst} for ref in graph.edges
    )


def resolve_rule(graph: CognitiveGraph, label: StepLabel) -> tuple[ConceptId | None, TraceViolation | None]:
    """Find the rule node an Apply label invokes; index 0 in the returned violation is a placeholder."""
    slug = slugify(label.rule or "")
    try:
        cid = ConceptId(slug, label.domain)
    except ValueError:
        return None, TraceViolation(0, "UnknownRule", f"rule {label.rule!r} has no valid graph term")
    node = graph.nodes.get(cid)
    if node is not None and node.kind is NodeKind.RULE:
        return cid, None
    elsewhere = sorted(
        str(n) for n, node in graph.nodes.items() if n.term == slug and node.kind is NodeKind.RULE
    )
    if elsewhere:
        return None, TraceViolation(
            0, "RuleDomainMismatch", f"rule {slug} is not in {label.domain}; it exists as {', '.join(elsewhere)}"
        )
    return None, TraceViolation(0, "UnknownRule", f"no rule node {cid}")


def _step_violations(
    graph: CognitiveGraph,
    index: int,
    label: StepLabel,
    prev_domain: str | None,
    mastered: frozenset[ConceptId] | None,
) -> list[TraceViolation]:
    out = []
    if label.domain not in graph.declared_domains:
        out.append(TraceViolation(index, "UnknownDomain", f"domain {label.domain} is not declared"))
    if label.op == APPLY:
        rule_id, problem = resolve_rule(graph, label)
        if problem is not None:
            out.append(TraceViolation(index, problem.code, problem.message))
        elif mastered is not None:
            missing = sorted(graph.prerequisite_closure(rule_id) - mastered)
            if missing:
                out.append(
                    TraceViolation(
                        index,
                        "UnsatisfiedPrerequisite",
                        f"{rule_id} requires unmastered " + ", ".join(str(m) for m in missing),
                    )
                )
    if prev_domain is not None and not transition_admissible(graph, prev_domain, label.domain):
        out.append(
            TraceViolation(index, "InadmissibleTransition", f"no admissible transition {prev_domain} -> {label.domain}")
        )
    return out


def validate_trace(
    graph: CognitiveGraph, trace: CdcTrace, mastered: Iterable[ConceptId] | None = None
) -> list[TraceViolation]:
    """Every violation in ``trace``, sorted by (step_index, code). Empty means the trace is admissible."""
    known = frozenset(mastered) if mastered is not None else None
    out: list[TraceViolation] = []
    prev = None
    for i, step in enumerate(trace.steps):
        out += _step_violations(graph, i, step.label, prev, known)
        prev = step.label.domain
    out += [TraceViolation(i, "BrokenChain", msg) for i, msg in trace.chain_breaks()]
    return sorted(out, key=lambda v: (v.step_index, v.code, v.message))


def _addressable_rules(graph: CognitiveGraph, domain: str) -> list[ConceptId]:
    # Only rules whose term survives the display-name round trip can be invoked by name.
    return [n.id for n in graph.rules(domain) if slugify(rule_display_name(n.id.term)) == n.id.term]


def permitted_next_steps(
    graph: CognitiveGraph, current_domain: str, mastered: Iterable[ConceptId] | None = None
) -> list[StepLabel]:
    """Labels that may follow a step taken in ``current_domain`` without adding a violation."""
    if current_domain not in graph.declared_domains:
        raise UnknownDomain(f"domain {current_domain} is not declared")
    known = frozenset(mastered) if mastered is not None else None
    reachable = sorted(
        d for d in graph.declared_domains if transition_admissible(graph, current_domain, d)
    )
    labels = []
    for d in reachable:
        for rule_id in _addressable_rules(graph, d):
            if known is not None and not graph.prerequisite_closure(rule_id) <= known:
                continue
            labels.append(StepLabel(APPLY, d, rule_display_name(rule_id.term)))
        labels.append(StepLabel(COMPUTE, d))
    return sorted(labels, key=StepLabel.sort_key)


def parse_label(text: str) -> StepLabel:
    """Parse ``Apply@D [Rule]`` / ``Compute@D`` with or without the arrow decoration."""
    text = text.strip()
    if not text.startswith(_OPEN):
        text = f"{_OPEN}{text}{_CLOSE}"
    arrows = _scan_arrows(text)
    if len(arrows) != 1 or arrows[0][0] != 0 or arrows[0][1] != len(text):
        raise ParseError(f"not a single step label: {text!r}")
    return arrows[0][2]
