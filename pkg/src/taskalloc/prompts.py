"""Dynamic prompt construction for the reasoning stage.

The system prompt is a fixed policy statement; the user prompt is rebuilt
for every attempt from the live task, workload, phase, and mode context,
with the output template appended so responses stay parseable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .capability import CapabilityScore
from .fmt import fmt_num, fmt_pct
from .model import OperationalMode, ROBOT_ORDER, Task
from .phase import BalanceReport, Phase, PhaseState, WorkloadLedger, phase_weights
from .responses import decision_template

SYSTEM_PROMPT = (
    "You are an experienced allocation manager coordinating a crew of three robots: "
    "a Light Robot (Precision Specialist), a Medium Robot (Balanced Generalist), and "
    "a Heavy Robot (Force Specialist). For every task you weigh two goals: completing "
    "the task successfully and keeping the workload spread fairly across the crew. "
    "Reason in plain language, make exactly one assignment per task, explain the "
    "trade-offs behind it, and answer in the requested output format exactly."
)

_MODE_GUIDANCE = {
    OperationalMode.SUCCESS_FOCUSED: (
        "Mode SUCCESS_FOCUSED (weights 90% success / 10% balance): completion comes "
        "first. Take the higher-success robot whenever its lead exceeds 8 points; "
        "workload only breaks near-ties."
    ),
    OperationalMode.BALANCED: (
        "Mode BALANCED (phase-adaptive weights): weigh the success gap against the "
        "current workload spread using the strategic weights below; neither goal "
        "dominates by default."
    ),
    OperationalMode.AGGRESSIVE_BALANCE: (
        "Mode AGGRESSIVE_BALANCE (weights 30% success / 70% balance): fairness comes "
        "first. Take the less-loaded robot whenever the success lead is under 18 "
        "points."
    ),
}

_PHASE_GUIDANCE = {
    Phase.EARLY: (
        "EARLY PHASE strategy: build a reliable base. Favor higher success rates and "
        "tolerate modest imbalance; most of the sequence is still ahead to even "
        "things out."
    ),
    Phase.MIDDLE: (
        "MIDDLE PHASE strategy: keep success strong while actively narrowing workload "
        "gaps; prefer the less-loaded robot when rates are close."
    ),
    Phase.LATE: (
        "LATE PHASE strategy: few chances remain to rebalance. Favor underloaded "
        "robots unless the success gap is decisive."
    ),
}


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str

    @property
    def char_length(self) -> int:
        return len(self.system_text) + len(self.user_text)


def build_prompt(
    task: Task,
    phase: PhaseState,
    ledger: WorkloadLedger,
    balance: BalanceReport,
    mode: OperationalMode,
    scores: list[CapabilityScore],
    feedback: str | None = None,
) -> PromptBundle:
    """Assemble the per-task user prompt.

    The text always carries the task identity, all three success rates, the
    per-robot counts and deviations, the target load, the balance score (one
    decimal), the phase and mode names, and the output template. Validation
    feedback, when present, is appended as its own correction section.
    """
    by_robot = {s.robot: s.success_rate for s in scores}
    weights = phase_weights(phase.phase, mode)

    lines: list[str] = [
        "CURRENT SITUATION",
        "",
        f'Task to Allocate: #{task.action_id} "{task.action_name}" (type: {task.action_type})',
        f"Features Required: [{', '.join(task.features)}]",
        "",
        "Current Workload Status:",
    ]
    for robot in ROBOT_ORDER:
        count = ledger.counts[robot]
        lines.append(
            f"- {robot.display_name}: {count} tasks (target: {fmt_num(ledger.target)}, "
            f"deviation: {fmt_num(count - ledger.target)})"
        )
    lines += [
        "",
        f"Balance Score: {balance.score:.1f} (imbalance severity: {balance.severity.value})",
        f"Allocation Progress: {phase.phase.value.upper()} phase "
        f"({phase.remaining} tasks remaining, {phase.progress_ratio * 100.0:.1f}% complete)",
        f"Balance Urgency: {phase.balance_urgency:.2f}",
        f"Mode: {mode.display_name}",
        "",
        "CALCULATED SUCCESS RATES FOR THIS TASK",
        "",
    ]
    for robot in ROBOT_ORDER:
        lines.append(f"- {robot.display_name}: {fmt_pct(by_robot[robot])} success for this task")
    lines += [
        "",
        "STRATEGY GUIDANCE",
        "",
        _MODE_GUIDANCE[mode],
        "",
        _PHASE_GUIDANCE[phase.phase],
        "",
        f"Strategic weights for this decision: success {fmt_pct(weights.alpha_success)} / "
        f"balance {fmt_pct(weights.alpha_balance)}",
        "",
        "DECISION RULES",
        "",
        "- Success gap above 25 points: always take the higher-success robot.",
        "- Success gap below 5 points: always take the robot with fewer tasks.",
        "- Anything in between: apply the mode guidance above.",
        "",
        "REQUIRED OUTPUT FORMAT",
        "",
        "Respond in exactly this markdown format:",
        "",
        decision_template(task, ledger),
    ]
    if feedback:
        lines += [
            "",
            "VALIDATION FEEDBACK — CORRECT THESE ISSUES",
            "",
            feedback,
        ]
    return PromptBundle(system_text=SYSTEM_PROMPT, user_text="\n".join(lines))
