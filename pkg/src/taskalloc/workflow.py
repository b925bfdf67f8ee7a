"""The sequential allocation workflow.

Each task flows through one cycle: phase detection, prompt construction,
reasoning, parsing + validation, then finalization, ledger update and
storage. A rejected response triggers up to three progressively richer
retry prompts before the conservative fallback assignment. Iteration
counting guards against runaway retry loops, and the whole state can be
checkpointed between tasks and resumed later.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Protocol

from .capability import CapabilityScore, rank_robots
from .errors import (
    EmptyResponseError,
    ReasonerConfigError,
    RecursionLimitError,
    ResponseParseError,
    TransportError,
)
from .model import OperationalMode, ROBOT_ORDER, RobotKind, SuccessMatrix, Task, TaskDataset
from .phase import (
    BalanceReport,
    Phase,
    PhaseState,
    WorkloadLedger,
    balance_score,
    compute_ledger,
    detect_phase,
)
from .prompts import PromptBundle, build_prompt
from .reasoning import AllocationDecision, Confidence, rule_reason
from .responses import decision_template, parse_response, render_decision
from .validation import (
    DEFAULT_THRESHOLD,
    ValidationReport,
    build_feedback,
    report_for_parse_failure,
    validate,
)

FALLBACK_ROBOT = RobotKind.LIGHT
FALLBACK_SUCCESS_ESTIMATE = 0.50
ITERATION_FACTOR = 15


class ValidationStatus(Enum):
    VALIDATED = "validated"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class ReasoningContext:
    """Everything a reasoner backend may need for one attempt."""

    prompt: PromptBundle
    task: Task
    phase: PhaseState
    ledger: WorkloadLedger
    balance: BalanceReport
    mode: OperationalMode
    scores: list[CapabilityScore]
    attempt: int


@dataclass(frozen=True)
class ReasonerReply:
    text: str
    input_tokens: int
    output_tokens: int


class ReasonerBackend(Protocol):
    name: str

    def generate(self, context: ReasoningContext) -> ReasonerReply: ...


class RuleReasoner:
    """Deterministic backend: renders the rule engine's decision as response
    text so it passes through the same parse/validate path as a model would.
    Token counts are a chars/4 proxy kept only for the efficiency report."""

    name = "rule"

    def generate(self, context: ReasoningContext) -> ReasonerReply:
        decision = rule_reason(
            context.task, context.phase, context.ledger,
            context.balance, context.mode, context.scores,
        )
        text = render_decision(
            decision,
            task_name=context.task.action_name,
            features=context.task.features,
            target=context.ledger.target,
        )
        return ReasonerReply(
            text=text,
            input_tokens=context.prompt.char_length // 4,
            output_tokens=len(text) // 4,
        )


@dataclass(frozen=True)
class FinalizedAllocation:
    decision: AllocationDecision
    quality: float
    validation_status: ValidationStatus
    retries_used: int
    phase_at_allocation: Phase
    balance_after: BalanceReport


@dataclass(frozen=True)
class RunSettings:
    threshold: float = DEFAULT_THRESHOLD
    max_retries: int = 3
    iteration_factor: int = ITERATION_FACTOR
    transport_attempts: int = 3
    checkpoint_path: str | None = None
    # Default checkpoint cadence is once per finalized task; flip this to
    # also snapshot after every reasoning attempt.
    checkpoint_every_attempt: bool = False

    def __post_init__(self):
        from .validation import THRESHOLD_RANGE

        lo, hi = THRESHOLD_RANGE
        if not (lo <= self.threshold <= hi):
            raise ValueError(f"quality threshold must lie in [{lo}, {hi}], got {self.threshold}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.transport_attempts < 1:
            raise ValueError("transport_attempts must be >= 1")


@dataclass
class WorkflowState:
    """Mutable working state for one run; everything derived (ledger, phase,
    balance) is recomputed from history so restores cannot drift."""

    dataset: TaskDataset
    mode: OperationalMode
    matrix: SuccessMatrix
    queue_position: int = 0
    history: list[FinalizedAllocation] = field(default_factory=list)
    retry_count: int = 0
    iteration_count: int = 0
    feedback_log: list[str] = field(default_factory=list)
    input_tokens: int = 0
    output_tokens: int = 0
    current_prompt: PromptBundle | None = None
    current_raw: str | None = None
    current_report: ValidationReport | None = None

    def ledger(self) -> WorkloadLedger:
        counts = {r: 0 for r in ROBOT_ORDER}
        for item in self.history:
            counts[item.decision.chosen] += 1
        return compute_ledger(counts, self.dataset.total_count)

    def phase(self) -> PhaseState:
        return detect_phase(len(self.history), self.dataset.total_count)

    def summary(self) -> dict:
        return {
            "queue_position": self.queue_position,
            "iteration_count": self.iteration_count,
            "retry_count": self.retry_count,
            "completed": len(self.history),
            "total": self.dataset.total_count,
            "mode": self.mode.value,
        }


@dataclass(frozen=True)
class AllocationRun:
    """Completed-run record: full history plus efficiency counters."""

    mode: OperationalMode
    history: tuple[FinalizedAllocation, ...]
    final_ledger: WorkloadLedger
    final_balance: BalanceReport
    iteration_count: int
    input_tokens: int
    output_tokens: int
    fallback_count: int
    elapsed_seconds: float

    @property
    def assignment(self) -> dict[int, RobotKind]:
        return {item.decision.task_id: item.decision.chosen for item in self.history}


def initial_state(
    dataset: TaskDataset, mode: OperationalMode, matrix: SuccessMatrix
) -> WorkflowState:
    if dataset.total_count == 0:
        raise ValueError("dataset is empty; nothing to allocate")
    return WorkflowState(dataset=dataset, mode=mode, matrix=matrix)


def escalate_retry(state: WorkflowState, report: ValidationReport) -> PromptBundle:
    """Build the retry prompt for the current tier (state.retry_count, 1-3).

    Tier 1 appends the specific criterion feedback; tier 2 adds broader
    guidance plus a rendered example of a compliant response; tier 3 adds a
    step-by-step scaffold with the full output template. Each tier extends
    the previous tier's text, so earlier feedback is never lost.
    """
    if report.accepted:
        raise ValueError("escalate_retry called on an accepted report")
    if state.current_prompt is None:
        raise ValueError("no prompt on state to escalate from")
    tier = state.retry_count
    task = state.dataset.tasks[state.queue_position]
    parts = [state.current_prompt.user_text]

    parts.append(
        f"\n\nVALIDATION FEEDBACK (retry {tier} of {len(_TIER_NAMES)})\n\n" + build_feedback(report)
    )
    if tier >= 2:
        ledger = state.ledger()
        phase = state.phase()
        balance = balance_score(ledger)
        scores = rank_robots(task, state.matrix)
        example = rule_reason(task, phase, ledger, balance, state.mode, scores)
        parts.append(
            "\n\nCOMPREHENSIVE GUIDANCE\n\n"
            "Work through the decision in order: compare the top two success rates, "
            "compute the gap in percentage points, check which compared robot carries "
            "fewer tasks, then apply the mode rule. A fully compliant response to this "
            "exact situation looks like this:\n\n"
            + render_decision(
                example,
                task_name=task.action_name,
                features=task.features,
                target=ledger.target,
            )
        )
    if tier >= 3:
        parts.append(
            "\n\nSTEP-BY-STEP RESPONSE SCAFFOLD\n\n"
            "1. List each robot with its calculated success rate for this task.\n"
            "2. Name the decision as a single robot.\n"
            "3. Set Expected Success to that robot's calculated rate.\n"
            "4. Explain the choice in 2-4 sentences citing the gap and the workload.\n"
            "5. Report the post-assignment counts with only the chosen robot incremented.\n"
            "6. State a confidence level and summarize the trade-off.\n\n"
            "Fill in this template verbatim:\n\n" + decision_template(task, state.ledger())
        )
    return PromptBundle(system_text=state.current_prompt.system_text, user_text="".join(parts))


_TIER_NAMES = ("specific feedback", "comprehensive guidance", "maximum support")


def fallback_allocation(
    task: Task,
    ledger: WorkloadLedger,
    phase: PhaseState,
    failure_log: tuple[str, ...] = (),
    max_retries: int = 3,
    quality: float = 0.0,
) -> FinalizedAllocation:
    """Conservative assignment after all retries failed: the Light robot at
    a flat 0.50 estimate, with the accumulated failure log preserved."""
    log_text = " | ".join(failure_log) if failure_log else "no failure details recorded"
    decision = AllocationDecision(
        task_id=task.action_id,
        chosen=FALLBACK_ROBOT,
        expected_success=FALLBACK_SUCCESS_ESTIMATE,
        reasoning_text=(
            f"Conservative fallback after {max_retries} failed retries. "
            f"Failure log: {log_text}"
        ),
        confidence=Confidence.LOW,
        tradeoff_summary="Fallback assignment; accepted the conservative default instead of an unvalidated answer.",
        claimed_post_workload={
            r: ledger.counts[r] + (1 if r is FALLBACK_ROBOT else 0) for r in ROBOT_ORDER
        },
        analysis_rates={},
    )
    return FinalizedAllocation(
        decision=decision,
        quality=quality,
        validation_status=ValidationStatus.FALLBACK,
        retries_used=max_retries,
        phase_at_allocation=phase.phase,
        balance_after=balance_score(ledger.with_increment(FALLBACK_ROBOT)),
    )


def _call_reasoner(
    reasoner: ReasonerBackend, context: ReasoningContext, attempts: int
) -> ReasonerReply:
    # Transport-level hiccups are retried in place; they do not consume
    # validation retries. A persistent outage is a configuration problem.
    last: Exception | None = None
    for _ in range(attempts):
        try:
            return reasoner.generate(context)
        except (TransportError, EmptyResponseError) as exc:
            last = exc
    raise ReasonerConfigError(
        f"reasoner failed {attempts} consecutive transport attempts: {last}"
    ) from last


def run_from_state(
    state: WorkflowState,
    reasoner: ReasonerBackend,
    settings: RunSettings = RunSettings(),
) -> AllocationRun:
    """Drive the workflow from `state` to completion."""
    from .checkpoint import write_checkpoint  # local import to avoid a cycle

    dataset = state.dataset
    total = dataset.total_count
    budget = settings.iteration_factor * total
    started = time.monotonic()

    while state.queue_position < total:
        task = dataset.tasks[state.queue_position]
        state.retry_count = 0
        state.current_report = None
        attempt_feedback: list[str] = []
        final: FinalizedAllocation | None = None

        while final is None:
            state.iteration_count += 1
            if state.iteration_count > budget:
                raise RecursionLimitError(
                    f"iteration budget exceeded ({state.iteration_count} > "
                    f"{settings.iteration_factor} x {total})",
                    state_dump=state.summary(),
                )

            phase = state.phase()
            ledger = state.ledger()
            balance = balance_score(ledger)
            scores = rank_robots(task, state.matrix)

            if state.retry_count == 0:
                state.current_prompt = build_prompt(task, phase, ledger, balance, state.mode, scores)
            else:
                state.current_prompt = escalate_retry(state, state.current_report)

            context = ReasoningContext(
                prompt=state.current_prompt,
                task=task,
                phase=phase,
                ledger=ledger,
                balance=balance,
                mode=state.mode,
                scores=scores,
                attempt=state.retry_count,
            )
            try:
                reply = _call_reasoner(reasoner, context, settings.transport_attempts)
            except ReasonerConfigError:
                if settings.checkpoint_path:
                    write_checkpoint(state, settings.checkpoint_path)
                raise
            state.current_raw = reply.text
            state.input_tokens += reply.input_tokens
            state.output_tokens += reply.output_tokens

            try:
                decision = parse_response(reply.text)
                if decision.task_id == -1:
                    decision = replace(decision, task_id=task.action_id)
                report = validate(
                    decision, task, phase, ledger, state.mode, scores, settings.threshold
                )
            except ResponseParseError as exc:
                decision = None
                report = report_for_parse_failure(exc.reason, settings.threshold)
            state.current_report = report

            if settings.checkpoint_path and settings.checkpoint_every_attempt:
                write_checkpoint(state, settings.checkpoint_path)

            if report.accepted:
                final = FinalizedAllocation(
                    decision=decision,
                    quality=report.quality,
                    validation_status=ValidationStatus.VALIDATED,
                    retries_used=state.retry_count,
                    phase_at_allocation=phase.phase,
                    balance_after=balance_score(ledger.with_increment(decision.chosen)),
                )
            else:
                feedback = build_feedback(report)
                attempt_feedback.append(
                    f"task {task.action_id} attempt {state.retry_count + 1}: "
                    f"Q={report.quality:.2f}"
                )
                state.feedback_log.append(feedback)
                if state.retry_count < settings.max_retries:
                    state.retry_count += 1
                else:
                    final = fallback_allocation(
                        task,
                        ledger,
                        phase,
                        failure_log=tuple(attempt_feedback),
                        max_retries=settings.max_retries,
                        quality=report.quality,
                    )

        state.history.append(final)
        state.queue_position += 1
        state.current_prompt = None
        state.current_raw = None
        state.current_report = None
        if settings.checkpoint_path:
            write_checkpoint(state, settings.checkpoint_path)

    final_ledger = state.ledger()
    return AllocationRun(
        mode=state.mode,
        history=tuple(state.history),
        final_ledger=final_ledger,
        final_balance=balance_score(final_ledger),
        iteration_count=state.iteration_count,
        input_tokens=state.input_tokens,
        output_tokens=state.output_tokens,
        fallback_count=sum(
            1 for h in state.history if h.validation_status is ValidationStatus.FALLBACK
        ),
        elapsed_seconds=time.monotonic() - started,
    )


def run(
    dataset: TaskDataset,
    mode: OperationalMode,
    matrix: SuccessMatrix,
    reasoner: ReasonerBackend,
    settings: RunSettings = RunSettings(),
) -> AllocationRun:
    """Allocate every task in order; each ends validated or fallback."""
    return run_from_state(initial_state(dataset, mode, matrix), reasoner, settings)


# --- history serialization (canonical, deterministic) ---

def decision_to_record(d: AllocationDecision) -> dict:
    return {
        "task_id": d.task_id,
        "chosen": d.chosen.value,
        "expected_success": d.expected_success,
        "reasoning_text": d.reasoning_text,
        "confidence": d.confidence.value,
        "tradeoff_summary": d.tradeoff_summary,
        "claimed_post_workload": {r.value: c for r, c in d.claimed_post_workload.items()},
        "analysis_rates": {r.value: v for r, v in d.analysis_rates.items()},
    }


def decision_from_record(rec: dict) -> AllocationDecision:
    by_name = {r.value: r for r in ROBOT_ORDER}
    return AllocationDecision(
        task_id=rec["task_id"],
        chosen=by_name[rec["chosen"]],
        expected_success=rec["expected_success"],
        reasoning_text=rec["reasoning_text"],
        confidence=Confidence(rec["confidence"]),
        tradeoff_summary=rec["tradeoff_summary"],
        claimed_post_workload={by_name[k]: v for k, v in rec["claimed_post_workload"].items()},
        analysis_rates={by_name[k]: v for k, v in rec["analysis_rates"].items()},
    )


def finalized_to_record(item: FinalizedAllocation) -> dict:
    return {
        "decision": decision_to_record(item.decision),
        "quality": item.quality,
        "validation_status": item.validation_status.value,
        "retries_used": item.retries_used,
        "phase_at_allocation": item.phase_at_allocation.value,
        "balance_after": {
            "score": item.balance_after.score,
            "max_abs_deviation": item.balance_after.max_abs_deviation,
            "severity": item.balance_after.severity.value,
        },
    }


def finalized_from_record(rec: dict) -> FinalizedAllocation:
    from .phase import Severity

    bal = rec["balance_after"]
    return FinalizedAllocation(
        decision=decision_from_record(rec["decision"]),
        quality=rec["quality"],
        validation_status=ValidationStatus(rec["validation_status"]),
        retries_used=rec["retries_used"],
        phase_at_allocation=Phase(rec["phase_at_allocation"]),
        balance_after=BalanceReport(
            score=bal["score"],
            max_abs_deviation=bal["max_abs_deviation"],
            severity=Severity(bal["severity"]),
        ),
    )


def history_to_json(history) -> str:
    """Canonical JSON for a run history; byte-stable across identical runs."""
    return json.dumps(
        [finalized_to_record(h) for h in history],
        sort_keys=True,
        separators=(",", ":"),
    )
