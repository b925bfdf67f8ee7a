"""Weighted multi-criteria validation of allocation decisions.

Eight criteria contribute to one quality score Q in [0, 1]; a decision is
accepted when Q reaches the configured threshold. Every rubric here is
deterministic and machine-checkable so the validator itself is testable;
none of them call a model.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .capability import CapabilityScore
from .fmt import sentence_count
from .model import OperationalMode, ROBOT_ORDER, Task
from .phase import PhaseState, WorkloadLedger, phase_weights
from .reasoning import (
    AllocationDecision,
    Confidence,
    TradeoffInput,
    confidence_for_gap,
    decide_tradeoff,
    rank_scores,
    tradeoff_for,
)


class Criterion(Enum):
    EXPLANATION_QUALITY = "ExplanationQuality"
    SUCCESS_RATE_ACCURACY = "SuccessRateAccuracy"
    TRADEOFF_ANALYSIS = "TradeoffAnalysis"
    WORKLOAD_AWARENESS = "WorkloadAwareness"
    MODE_COMPLIANCE = "ModeCompliance"
    PHASE_CONSISTENCY = "PhaseConsistency"
    LOGICAL_CONSISTENCY = "LogicalConsistency"
    CONFIDENCE_JUSTIFICATION = "ConfidenceJustification"


# Integer weights over 100 keep the weighted sum exact for the common
# rubric outcomes (0, 0.5, 1).
_WEIGHTS_PCT: dict[Criterion, int] = {
    Criterion.EXPLANATION_QUALITY: 20,
    Criterion.SUCCESS_RATE_ACCURACY: 20,
    Criterion.TRADEOFF_ANALYSIS: 15,
    Criterion.WORKLOAD_AWARENESS: 15,
    Criterion.MODE_COMPLIANCE: 10,
    Criterion.PHASE_CONSISTENCY: 10,
    Criterion.LOGICAL_CONSISTENCY: 5,
    Criterion.CONFIDENCE_JUSTIFICATION: 5,
}

assert sum(_WEIGHTS_PCT.values()) == 100

CRITERIA = tuple(_WEIGHTS_PCT)
WEIGHTS = {c: w / 100.0 for c, w in _WEIGHTS_PCT.items()}

DEFAULT_THRESHOLD = 0.6
THRESHOLD_RANGE = (0.6, 0.8)

_SUGGESTIONS = {
    Criterion.EXPLANATION_QUALITY: "write 2-4 sentences that name the chosen robot and quote at least one success rate",
    Criterion.SUCCESS_RATE_ACCURACY: "set Expected Success to the chosen robot's calculated rate for this task",
    Criterion.TRADEOFF_ANALYSIS: "state in the Trade-Off Summary what was sacrificed, or say explicitly that no trade-off was needed",
    Criterion.WORKLOAD_AWARENESS: "report Workload After Assignment as the current counts with only the chosen robot incremented by one",
    Criterion.MODE_COMPLIANCE: "apply the mode's gap thresholds to the top-two success gap before choosing",
    Criterion.PHASE_CONSISTENCY: "weigh the success gap against the workload spread using this phase's strategic weights",
    Criterion.LOGICAL_CONSISTENCY: "make Expected Success match the chosen robot's rate in your own Robot Analysis",
    Criterion.CONFIDENCE_JUSTIFICATION: "set confidence High for clear-cut gaps (>25 or <5 points), Medium for 8-25, Low otherwise",
}


@dataclass(frozen=True)
class CriterionScore:
    name: Criterion
    weight: float
    score: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    criteria: tuple[CriterionScore, ...]
    quality: float
    threshold: float
    accepted: bool
    feedback: tuple[str, ...]


def quality_from_scores(scores: dict[Criterion, float]) -> float:
    """Weighted sum of per-criterion scores (weights sum to 1)."""
    return sum(_WEIGHTS_PCT[c] * scores[c] for c in CRITERIA) / 100.0


def _check_threshold(threshold: float) -> None:
    lo, hi = THRESHOLD_RANGE
    if not (lo <= threshold <= hi):
        raise ValueError(f"quality threshold must lie in [{lo}, {hi}], got {threshold}")


def _score_explanation(decision: AllocationDecision) -> tuple[float, str]:
    text = decision.reasoning_text
    n_sentences = sentence_count(text)
    ok_length = 2 <= n_sentences <= 4
    ok_names = decision.chosen.display_name.lower() in text.lower() or (
        decision.chosen.value in text.lower().split()
    )
    ok_rate = "%" in text or any(ch.isdigit() for ch in text)
    passed = sum((ok_length, ok_names, ok_rate))
    detail = (
        f"{n_sentences} sentences; names chosen robot: {ok_names}; cites a numeric rate: {ok_rate}"
    )
    return (1.0 if passed == 3 else 0.5 if passed == 2 else 0.0), detail


def _score_success_accuracy(decision: AllocationDecision, actual: float) -> tuple[float, str]:
    diff = abs(decision.expected_success - actual)
    detail = f"claimed {decision.expected_success:.4f} vs calculated {actual:.4f} (diff {diff:.4f})"
    if diff <= 0.01:
        return 1.0, detail
    if diff <= 0.05:
        return 0.5, detail
    return 0.0, detail


def _score_tradeoff(decision: AllocationDecision) -> tuple[float, str]:
    text = decision.tradeoff_summary.lower()
    if not text.strip():
        return 0.0, "trade-off summary is empty"
    no_tradeoff = "no trade-off" in text or "no tradeoff" in text or "no meaningful trade" in text
    sacrifice = any(
        kw in text
        for kw in ("sacrific", "accept", "imbalance", "trade", "cost", "forgo", "give up", "expense")
    )
    if no_tradeoff or sacrifice:
        return 1.0, "summary names a sacrifice or states no trade-off was needed"
    return 0.0, "summary mentions neither a sacrifice nor the absence of a trade-off"


def _score_workload(decision: AllocationDecision, ledger: WorkloadLedger) -> tuple[float, str]:
    expected = {r: ledger.counts[r] + (1 if r is decision.chosen else 0) for r in ROBOT_ORDER}
    if decision.claimed_post_workload == expected:
        return 1.0, "post-allocation counts increment exactly the chosen robot"
    return 0.0, f"claimed {_counts_text(decision.claimed_post_workload)}, expected {_counts_text(expected)}"


def _counts_text(counts: dict) -> str:
    if not counts:
        return "(missing)"
    return ", ".join(f"{r.value}: {counts[r]}" for r in ROBOT_ORDER if r in counts)


def _score_mode(decision, inp: TradeoffInput) -> tuple[float, str]:
    required = decide_tradeoff(inp)
    if decision.chosen is required:
        return 1.0, f"choice matches the {inp.mode.display_name} rule at a {inp.gap:.2f}-point gap"
    return 0.0, (
        f"the {inp.mode.display_name} rule requires {required.display_name} at a "
        f"{inp.gap:.2f}-point gap, decision chose {decision.chosen.display_name}"
    )


def _score_phase(decision, inp: TradeoffInput) -> tuple[float, str]:
    # Consistency with the phase's strategic weights, checked via the
    # weighted composite rule regardless of the operating mode.
    weighted = TradeoffInput(
        gap=inp.gap,
        top_robot=inp.top_robot,
        lighter_robot=inp.lighter_robot,
        mode=OperationalMode.BALANCED,
        weights=inp.weights,
        ledger=inp.ledger,
    )
    required = decide_tradeoff(weighted)
    if decision.chosen is required:
        return 1.0, "choice agrees with the phase-weighted composite rule"
    return 0.0, (
        f"phase weights ({inp.weights.alpha_success:.2f}/{inp.weights.alpha_balance:.2f}) "
        f"favor {required.display_name}, decision chose {decision.chosen.display_name}"
    )


def _score_logic(decision: AllocationDecision) -> tuple[float, str]:
    listed = decision.analysis_rates.get(decision.chosen)
    if listed is None:
        return 0.0, "robot analysis does not list the chosen robot's rate"
    if abs(listed - decision.expected_success) <= 0.005:
        return 1.0, "expected success matches the decision's own robot analysis"
    return 0.0, f"analysis lists {listed:.4f} but expected success is {decision.expected_success:.4f}"


_ADJACENT = {
    Confidence.HIGH: {Confidence.MEDIUM},
    Confidence.MEDIUM: {Confidence.HIGH, Confidence.LOW},
    Confidence.LOW: {Confidence.MEDIUM},
}


def _score_confidence(decision: AllocationDecision, gap: float) -> tuple[float, str]:
    expected = confidence_for_gap(gap)
    if decision.confidence is expected:
        return 1.0, f"confidence {decision.confidence.value} matches the {gap:.2f}-point gap band"
    if decision.confidence in _ADJACENT[expected]:
        return 0.5, f"confidence {decision.confidence.value} is adjacent to expected {expected.value}"
    return 0.0, f"gap {gap:.2f} calls for {expected.value}, decision claims {decision.confidence.value}"


def validate(
    decision: AllocationDecision,
    task: Task,
    phase: PhaseState,
    ledger: WorkloadLedger,
    mode: OperationalMode,
    scores: list[CapabilityScore],
    threshold: float = DEFAULT_THRESHOLD,
) -> ValidationReport:
    """Score a decision against all eight criteria. Never raises on bad
    decisions; malformed content simply scores low."""
    _check_threshold(threshold)
    weights = phase_weights(phase.phase, mode)
    inp = tradeoff_for(scores, ledger, mode, weights)
    by_robot = {s.robot: s.success_rate for s in rank_scores(scores)}
    # scores should cover every robot; an uncovered choice simply scores 0
    # on accuracy instead of crashing the validation stage.
    actual_rate = by_robot.get(decision.chosen, float("nan"))

    results: dict[Criterion, tuple[float, str]] = {
        Criterion.EXPLANATION_QUALITY: _score_explanation(decision),
        Criterion.SUCCESS_RATE_ACCURACY: _score_success_accuracy(decision, actual_rate),
        Criterion.TRADEOFF_ANALYSIS: _score_tradeoff(decision),
        Criterion.WORKLOAD_AWARENESS: _score_workload(decision, ledger),
        Criterion.MODE_COMPLIANCE: _score_mode(decision, inp),
        Criterion.PHASE_CONSISTENCY: _score_phase(decision, inp),
        Criterion.LOGICAL_CONSISTENCY: _score_logic(decision),
        Criterion.CONFIDENCE_JUSTIFICATION: _score_confidence(decision, inp.gap),
    }
    return _build_report({c: r[0] for c, r in results.items()},
                         {c: r[1] for c, r in results.items()}, threshold)


def report_for_parse_failure(reason: str, threshold: float = DEFAULT_THRESHOLD) -> ValidationReport:
    """All-zero report standing in for an unparseable response."""
    _check_threshold(threshold)
    detail = f"response could not be parsed ({reason})"
    return _build_report({c: 0.0 for c in CRITERIA}, {c: detail for c in CRITERIA}, threshold)


def report_from_scores(
    scores: dict[Criterion, float],
    threshold: float = DEFAULT_THRESHOLD,
    details: dict[Criterion, str] | None = None,
) -> ValidationReport:
    """Assemble a report from raw criterion scores (same accept rule as
    validate); useful for drills and for feeding synthetic profiles."""
    _check_threshold(threshold)
    if details is None:
        details = {c: "synthetic score" for c in CRITERIA}
    return _build_report(dict(scores), details, threshold)


def _build_report(
    scores: dict[Criterion, float],
    details: dict[Criterion, str],
    threshold: float,
) -> ValidationReport:
    criteria = tuple(
        CriterionScore(name=c, weight=WEIGHTS[c], score=scores[c], detail=details[c])
        for c in CRITERIA
    )
    quality = quality_from_scores(scores)
    feedback = tuple(
        f"{c.value} scored {scores[c]:.2f}: {details[c]}. Suggestion: {_SUGGESTIONS[c]}."
        for c in CRITERIA
        if scores[c] < 1.0
    )
    return ValidationReport(
        criteria=criteria,
        quality=quality,
        threshold=threshold,
        accepted=quality >= threshold,
        feedback=feedback,
    )


def build_feedback(report: ValidationReport) -> str:
    """Feedback text for a rejected report: one block per failed criterion.

    Calling this on an accepted report is a caller bug.
    """
    if report.accepted:
        raise ValueError("build_feedback called on an accepted report")
    lines = [
        f"The previous response scored {report.quality:.2f}, below the required "
        f"{report.threshold:.2f}. Fix the following:",
        "",
    ]
    for item in report.feedback:
        lines.append(f"- {item}")
    return "\n".join(lines)
