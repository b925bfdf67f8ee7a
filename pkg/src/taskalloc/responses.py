"""The standardized response grammar: rendering and parsing decisions.

The reasoner (rule engine or remote model) must answer in a fixed markdown
layout whose section headers are "Decision:", "Expected Success:",
"Reasoning:", "Workload After Assignment:", "Confidence Level:" and
"Trade-Off Summary:". Parsing is regex-based and tolerant of markdown bold
markers and missing optional sections; the four structurally required
fields raise ResponseParseError with a short reason code instead.
"""

from __future__ import annotations

import re

from .errors import ResponseParseError
from .fmt import fmt_num, fmt_pct
from .model import ROBOT_ORDER, RobotKind, Task
from .phase import WorkloadLedger
from .reasoning import AllocationDecision, Confidence

SECTION_HEADERS = (
    "Decision:",
    "Expected Success:",
    "Reasoning:",
    "Workload After Assignment:",
    "Confidence Level:",
    "Trade-Off Summary:",
)

_ROBOT_BY_NAME = {r.value: r for r in ROBOT_ORDER}


def _robot_from_name(text: str) -> RobotKind | None:
    name = text.strip().strip("*").strip().lower()
    if name.endswith("robot"):
        name = name[: -len("robot")].strip()
    return _ROBOT_BY_NAME.get(name)


def render_decision(
    decision: AllocationDecision,
    *,
    task_name: str = "",
    features: tuple[str, ...] = (),
    target: float | None = None,
) -> str:
    """Emit the canonical response text for a decision.

    Task name, features, and the deviation column are display context; they
    are not stored on the decision and default to blanks when unknown.
    """
    lines: list[str] = []
    title = f"Task {decision.task_id}:"
    if task_name:
        title += f" {task_name}"
    lines.append(title)
    if features:
        lines.append(f"Features: [{', '.join(features)}]")
    lines.append("")

    if decision.analysis_rates:
        lines.append("Robot Analysis:")
        for robot in ROBOT_ORDER:
            if robot not in decision.analysis_rates:
                continue
            entry = f"- {robot.display_name}: {fmt_pct(decision.analysis_rates[robot])} success"
            if decision.claimed_post_workload:
                current = decision.claimed_post_workload[robot] - (1 if robot is decision.chosen else 0)
                entry += f" (current: {current} tasks"
                if target is not None:
                    entry += f", deviation: {fmt_num(current - target)}"
                entry += ")"
            lines.append(entry)
        lines.append("")

    lines.append(f"Decision: {decision.chosen.display_name}")
    lines.append(f"Expected Success: {fmt_pct(decision.expected_success)}")
    lines.append("")
    lines.append("Reasoning:")
    lines.append(decision.reasoning_text)
    lines.append("")
    if decision.claimed_post_workload:
        lines.append("Workload After Assignment:")
        for robot in ROBOT_ORDER:
            lines.append(f"- {robot.value.capitalize()}: {decision.claimed_post_workload[robot]} tasks")
        lines.append("")
    lines.append(f"Confidence Level: {decision.confidence.value}")
    lines.append("")
    lines.append(f"Trade-Off Summary: {decision.tradeoff_summary}")
    return "\n".join(lines)


def decision_template(task: Task, ledger: WorkloadLedger | None = None) -> str:
    """The fill-in-the-blanks response template sent inside prompts."""
    lines = [
        f"Task {task.action_id}: {task.action_name}",
        f"Features: [{', '.join(task.features)}]",
        "",
        "Robot Analysis:",
    ]
    for robot in ROBOT_ORDER:
        if ledger is not None:
            lines.append(
                f"- {robot.display_name}: [X%] success (current: {ledger.counts[robot]} tasks, "
                f"deviation: {fmt_num(ledger.counts[robot] - ledger.target)})"
            )
        else:
            lines.append(f"- {robot.display_name}: [X%] success")
    lines += [
        "",
        "Decision: [Chosen Robot]",
        "Expected Success: [X%]",
        "",
        "Reasoning:",
        "[2-4 sentences explaining the choice, the success gap, and the workload trade-off.]",
        "",
        "Workload After Assignment:",
        "- Light: [X] tasks",
        "- Medium: [Y] tasks",
        "- Heavy: [Z] tasks",
        "",
        "Confidence Level: [High/Medium/Low]",
        "",
        "Trade-Off Summary: [What was sacrificed, if anything, and why it was acceptable]",
    ]
    return "\n".join(lines)


_TASK_RE = re.compile(r"^\s*\**\s*Task\s+(\d+)\s*\**\s*:", re.MULTILINE)
_SECTION_RE = re.compile(r"^\s*\**\s*(?P<name>[A-Za-z][A-Za-z \-]*?)\s*\**\s*:\s*(?P<rest>.*)$")
_ANALYSIS_LINE_RE = re.compile(
    r"^\s*[-*]\s*\**\s*(?P<robot>[A-Za-z]+(?:\s+Robot)?)\s*\**\s*:\s*(?P<pct>-?[\d.]+)\s*%",
    re.IGNORECASE,
)
_WORKLOAD_LINE_RE = re.compile(
    r"^\s*[-*]\s*\**\s*(?P<robot>[A-Za-z]+(?:\s+Robot)?)\s*\**\s*:\s*(?P<count>-?\d+)\s*tasks?",
    re.IGNORECASE,
)
_PCT_RE = re.compile(r"(-?[\d.]+)\s*%")

_KNOWN_SECTIONS = {
    "decision": "decision",
    "expected success": "expected",
    "reasoning": "reasoning",
    "workload after assignment": "workload",
    "confidence level": "confidence",
    "trade-off summary": "tradeoff",
    "trade off summary": "tradeoff",
    "robot analysis": "analysis",
}


def _split_sections(raw: str) -> dict[str, list[str]]:
    """Group lines under the most recent recognized section header."""
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for line in raw.splitlines():
        m = _SECTION_RE.match(line)
        key = _KNOWN_SECTIONS.get(m.group("name").strip().lower()) if m else None
        if key is not None:
            current = key
            sections.setdefault(current, [])
            rest = m.group("rest").strip()
            if rest:
                sections[current].append(rest)
        elif current is not None:
            sections[current].append(line)
    return sections


def parse_response(raw: str) -> AllocationDecision:
    """Parse reasoner text into an AllocationDecision.

    Raises ResponseParseError with reason "no decision", "unknown robot",
    "bad success rate", or "no confidence"; every other section degrades to
    an empty field that validation will score down rather than crash on.
    """
    sections = _split_sections(raw)

    if "decision" not in sections or not "".join(sections["decision"]).strip():
        raise ResponseParseError("no decision", "response has no Decision section")
    decision_text = sections["decision"][0].strip()
    chosen = _robot_from_name(decision_text)
    if chosen is None:
        raise ResponseParseError("unknown robot", f"cannot map {decision_text!r} to a robot")

    expected_lines = sections.get("expected", [])
    pct_match = _PCT_RE.search(" ".join(expected_lines))
    if not pct_match:
        raise ResponseParseError("bad success rate", "no parseable percentage in Expected Success")
    try:
        expected = float(pct_match.group(1)) / 100.0
    except ValueError as exc:
        raise ResponseParseError("bad success rate", str(exc)) from exc
    if not (0.0 <= expected <= 1.0):
        raise ResponseParseError("bad success rate", f"{expected} outside [0, 1]")

    confidence_text = " ".join(sections.get("confidence", [])).strip().strip("*").strip()
    if not confidence_text:
        raise ResponseParseError("no confidence", "response has no Confidence Level section")
    try:
        confidence = Confidence(confidence_text.split()[0].capitalize())
    except (ValueError, IndexError) as exc:
        raise ResponseParseError("no confidence", f"unrecognized level {confidence_text!r}") from exc

    analysis_rates: dict[RobotKind, float] = {}
    for line in sections.get("analysis", []):
        m = _ANALYSIS_LINE_RE.match(line)
        if m:
            robot = _robot_from_name(m.group("robot"))
            if robot is not None:
                analysis_rates[robot] = float(m.group("pct")) / 100.0

    claimed: dict[RobotKind, int] = {}
    for line in sections.get("workload", []):
        m = _WORKLOAD_LINE_RE.match(line)
        if m:
            robot = _robot_from_name(m.group("robot"))
            if robot is not None:
                claimed[robot] = int(m.group("count"))

    task_match = _TASK_RE.search(raw)
    reasoning = "\n".join(sections.get("reasoning", [])).strip()
    tradeoff = "\n".join(sections.get("tradeoff", [])).strip()

    return AllocationDecision(
        task_id=int(task_match.group(1)) if task_match else -1,
        chosen=chosen,
        expected_success=expected,
        reasoning_text=reasoning,
        confidence=confidence,
        tradeoff_summary=tradeoff,
        claimed_post_workload=claimed,
        analysis_rates=analysis_rates,
    )
