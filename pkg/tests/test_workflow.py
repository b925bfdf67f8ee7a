from __future__ import annotations

import pytest

from taskalloc.errors import RecursionLimitError, ReasonerConfigError, TransportError
from taskalloc.model import OperationalMode, RobotKind, TaskDataset
from taskalloc.reasoning import Confidence
from taskalloc.workflow import (
    FALLBACK_SUCCESS_ESTIMATE,
    ReasonerReply,
    RuleReasoner,
    RunSettings,
    ValidationStatus,
    escalate_retry,
    history_to_json,
    initial_state,
    run,
)

from conftest import make_task

MODE = OperationalMode.BALANCED


class BrokenReasoner:
    """Never produces a parseable decision."""

    name = "broken"

    def __init__(self):
        self.prompts = []

    def generate(self, context):
        self.prompts.append(context.prompt.user_text)
        return ReasonerReply(text="I would rather discuss the weather.", input_tokens=1, output_tokens=1)


class FlakyTransportReasoner:
    """Fails the first N calls at transport level, then behaves like the rule engine."""

    name = "flaky"

    def __init__(self, failures):
        self.remaining = failures
        self.inner = RuleReasoner()

    def generate(self, context):
        if self.remaining > 0:
            self.remaining -= 1
            raise TransportError("synthetic outage")
        return self.inner.generate(context)


class DeadTransportReasoner:
    name = "dead"

    def generate(self, context):
        raise TransportError("endpoint never reachable")


def small_dataset(n=3):
    feats = [("dexterous",), ("heavy",), ("careful", "heavy")]
    return TaskDataset(
        "small", tuple(make_task(i, f"T{i}", "t", feats[i % 3]) for i in range(n))
    )


class TestFullRun:
    def test_bundled_run_totality(self, bundled_dataset, matrix):
        result = run(bundled_dataset, MODE, matrix, RuleReasoner())
        assert len(result.history) == 36
        assert result.fallback_count == 0
        assert result.iteration_count == 36
        assert result.elapsed_seconds < 5.0
        assert sum(result.final_ledger.counts.values()) == 36
        assert [h.decision.task_id for h in result.history] == [
            t.action_id for t in bundled_dataset
        ]
        assert all(h.validation_status is ValidationStatus.VALIDATED for h in result.history)

    def test_deterministic_reruns(self, bundled_dataset, matrix):
        first = run(bundled_dataset, MODE, matrix, RuleReasoner())
        second = run(bundled_dataset, MODE, matrix, RuleReasoner())
        assert history_to_json(first.history) == history_to_json(second.history)

    def test_empty_dataset_rejected(self, matrix):
        with pytest.raises(ValueError, match="empty"):
            run(TaskDataset("none", ()), MODE, matrix, RuleReasoner())

    def test_token_accounting_accumulates(self, bundled_dataset, matrix):
        result = run(bundled_dataset, MODE, matrix, RuleReasoner())
        assert result.input_tokens > 0 and result.output_tokens > 0


class TestRetryAndFallback:
    def test_three_retries_then_fallback(self, matrix):
        dataset = small_dataset(1)
        result = run(dataset, MODE, matrix, BrokenReasoner())
        assert len(result.history) == 1
        item = result.history[0]
        assert item.validation_status is ValidationStatus.FALLBACK
        assert item.retries_used == 3
        assert item.decision.chosen is RobotKind.LIGHT
        assert item.decision.expected_success == FALLBACK_SUCCESS_ESTIMATE
        assert item.decision.confidence is Confidence.LOW
        assert "Failure log" in item.decision.reasoning_text
        assert result.iteration_count == 4  # initial attempt + 3 retries
        assert result.fallback_count == 1

    def test_fallback_increments_only_light(self, matrix):
        dataset = small_dataset(3)
        result = run(dataset, MODE, matrix, BrokenReasoner())
        assert result.final_ledger.counts[RobotKind.LIGHT] == 3
        assert result.final_ledger.counts[RobotKind.MEDIUM] == 0
        assert result.final_ledger.counts[RobotKind.HEAVY] == 0
        assert result.iteration_count == 12 <= 15 * 3

    def test_escalation_tiers_grow_strictly(self, matrix):
        reasoner = BrokenReasoner()
        run(small_dataset(1), MODE, matrix, reasoner)
        base, tier1, tier2, tier3 = reasoner.prompts
        assert "VALIDATION FEEDBACK" not in base
        assert "VALIDATION FEEDBACK" in tier1
        assert "ExplanationQuality" in tier1  # names the failed criteria
        assert "COMPREHENSIVE GUIDANCE" in tier2
        assert "Decision: " in tier2  # rendered compliant example
        assert "STEP-BY-STEP RESPONSE SCAFFOLD" in tier3
        assert "Decision: [Chosen Robot]" in tier3  # full template
        # Each tier strictly contains its predecessor's text.
        assert base in tier1 and tier1 in tier2 and tier2 in tier3

    def test_escalate_preconditions(self, bundled_dataset, matrix):
        from taskalloc.capability import rank_robots
        from taskalloc.phase import balance_score
        from taskalloc.prompts import build_prompt
        from taskalloc.validation import report_for_parse_failure, validate
        from taskalloc.reasoning import rule_reason

        state = initial_state(bundled_dataset, MODE, matrix)
        rejected = report_for_parse_failure("no decision")
        state.retry_count = 1
        with pytest.raises(ValueError, match="no prompt"):
            escalate_retry(state, rejected)

        task = bundled_dataset.tasks[0]
        ledger, phase = state.ledger(), state.phase()
        balance = balance_score(ledger)
        scores = rank_robots(task, matrix)
        state.current_prompt = build_prompt(task, phase, ledger, balance, MODE, scores)
        decision = rule_reason(task, phase, ledger, balance, MODE, scores)
        accepted = validate(decision, task, phase, ledger, MODE, scores, 0.6)
        with pytest.raises(ValueError, match="accepted"):
            escalate_retry(state, accepted)

    def test_recursion_guard_trips(self, matrix):
        dataset = small_dataset(1)
        settings = RunSettings(max_retries=50, iteration_factor=15)
        with pytest.raises(RecursionLimitError) as err:
            run(dataset, MODE, matrix, BrokenReasoner(), settings)
        assert err.value.state_dump["iteration_count"] == 16


class TestTransportHandling:
    def test_transient_failures_do_not_consume_retries(self, matrix):
        dataset = small_dataset(2)
        result = run(dataset, MODE, matrix, FlakyTransportReasoner(failures=2))
        assert all(h.retries_used == 0 for h in result.history)
        assert all(h.validation_status is ValidationStatus.VALIDATED for h in result.history)

    def test_persistent_failure_aborts_with_checkpoint(self, matrix, tmp_path):
        dataset = small_dataset(2)
        checkpoint = tmp_path / "state.json"
        settings = RunSettings(checkpoint_path=str(checkpoint))
        with pytest.raises(ReasonerConfigError):
            run(dataset, MODE, matrix, DeadTransportReasoner(), settings)
        assert checkpoint.exists()


class TestModeOrdering:
    def test_success_and_balance_orderings(self, bundled_dataset, matrix):
        from taskalloc.evaluation import expected_success

        by_mode = {}
        for mode in OperationalMode:
            result = run(bundled_dataset, mode, matrix, RuleReasoner())
            by_mode[mode] = (
                expected_success(result.assignment, bundled_dataset, matrix),
                result.final_balance.max_abs_deviation,
            )
        sf = by_mode[OperationalMode.SUCCESS_FOCUSED]
        bal = by_mode[OperationalMode.BALANCED]
        ab = by_mode[OperationalMode.AGGRESSIVE_BALANCE]
        assert sf[0] >= bal[0] >= ab[0]
        assert ab[1] <= bal[1] <= sf[1]
