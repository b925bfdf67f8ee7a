"""Trade-off decision logic and the deterministic rule reasoner.

The rule reasoner is a drop-in stand-in for a remote language model: it
emits the same structured text the response grammar expects, so the whole
pipeline can run, be validated, and be tested without network access.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .capability import CapabilityScore
from .fmt import fmt_num, fmt_pct, parse_pct
from .model import OperationalMode, ROBOT_ORDER, RobotKind, Task
from .phase import BalanceReport, PhaseState, StrategyWeights, WorkloadLedger, phase_weights

# Success-gap thresholds, in percentage points.
GAP_UNIVERSAL_TOP = 25.0     # above this every mode takes the higher-success robot
GAP_UNIVERSAL_LIGHTER = 5.0  # below this every mode takes the less-loaded robot
GAP_SUCCESS_FOCUSED = 8.0    # success-focused takes the top robot for gaps above this
GAP_AGGRESSIVE = 18.0        # aggressive balance takes the lighter robot below this


class Confidence(Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"


def confidence_for_gap(gap: float) -> Confidence:
    """Band the success gap: clear-cut calls (very large or negligible gaps)
    are High, the mode-decided 8-25 band is Medium, the rest Low."""
    if gap > GAP_UNIVERSAL_TOP or gap < GAP_UNIVERSAL_LIGHTER:
        return Confidence.HIGH
    if gap >= GAP_SUCCESS_FOCUSED:
        return Confidence.MEDIUM
    return Confidence.LOW


@dataclass(frozen=True)
class TradeoffInput:
    """The two-robot comparison a trade-off decision is made over."""

    gap: float  # top success rate minus runner-up, in percentage points
    top_robot: RobotKind
    lighter_robot: RobotKind
    mode: OperationalMode
    weights: StrategyWeights
    ledger: WorkloadLedger

    def __post_init__(self):
        if self.gap < 0:
            raise ValueError(f"gap must be non-negative, got {self.gap}")


@dataclass(frozen=True)
class AllocationDecision:
    """A parsed (or rule-generated) allocation decision for one task."""

    task_id: int
    chosen: RobotKind
    expected_success: float
    reasoning_text: str
    confidence: Confidence
    tradeoff_summary: str
    claimed_post_workload: dict[RobotKind, int] = field(default_factory=dict)
    # Per-robot rates quoted in the response's own analysis section; used to
    # check the decision's internal consistency.
    analysis_rates: dict[RobotKind, float] = field(default_factory=dict)


def decide_tradeoff(inp: TradeoffInput) -> RobotKind:
    """Resolve the success-vs-balance trade-off for one task.

    Gaps above 25 points always go to the higher-success robot and gaps
    below 5 points always to the less-loaded one. Inside the band each mode
    applies its own rule: success-focused switches to the top robot above 8
    points, aggressive balance sticks with the lighter robot below 18, and
    balanced compares the weighted normalized gap against the weighted
    normalized workload spread (ties favor the lighter robot).
    """
    if inp.gap > GAP_UNIVERSAL_TOP:
        return inp.top_robot
    if inp.gap < GAP_UNIVERSAL_LIGHTER:
        return inp.lighter_robot
    if inp.mode is OperationalMode.SUCCESS_FOCUSED:
        return inp.top_robot if inp.gap > GAP_SUCCESS_FOCUSED else inp.lighter_robot
    if inp.mode is OperationalMode.AGGRESSIVE_BALANCE:
        return inp.lighter_robot if inp.gap < GAP_AGGRESSIVE else inp.top_robot
    return _weighted_choice(inp)


def _weighted_choice(inp: TradeoffInput) -> RobotKind:
    # Normalize the gap by the 25-point universal threshold and the workload
    # spread by the target load, then let the strategy weights arbitrate.
    devs = inp.ledger.deviations
    spread = abs(devs[inp.top_robot] - devs[inp.lighter_robot])
    success_pull = inp.weights.alpha_success * (inp.gap / GAP_UNIVERSAL_TOP)
    balance_pull = inp.weights.alpha_balance * (spread / inp.ledger.target)
    return inp.top_robot if success_pull >= balance_pull else inp.lighter_robot


def rank_scores(scores: list[CapabilityScore]) -> list[CapabilityScore]:
    """Descending by rate, ties in fixed robot order."""
    order = {r: i for i, r in enumerate(ROBOT_ORDER)}
    return sorted(scores, key=lambda s: (-s.success_rate, order[s.robot]))


def tradeoff_for(
    scores: list[CapabilityScore],
    ledger: WorkloadLedger,
    mode: OperationalMode,
    weights: StrategyWeights,
) -> TradeoffInput:
    """Build the top-two comparison the trade-off logic operates on.

    The lighter robot is whichever of the two compared robots currently has
    fewer tasks; with equal counts there is no balance gain to chase, so the
    top robot stands in.
    """
    ranked = rank_scores(scores)
    top, runner = ranked[0], ranked[1]
    gap = (top.success_rate - runner.success_rate) * 100.0
    if ledger.counts[runner.robot] < ledger.counts[top.robot]:
        lighter = runner.robot
    else:
        lighter = top.robot
    return TradeoffInput(
        gap=gap, top_robot=top.robot, lighter_robot=lighter,
        mode=mode, weights=weights, ledger=ledger,
    )


def _tradeoff_summary(chosen: RobotKind, inp: TradeoffInput, sacrifice_pp: float) -> str:
    if chosen is inp.top_robot and inp.top_robot is inp.lighter_robot:
        return "No trade-off required: the strongest robot is also the least loaded."
    if chosen is inp.top_robot:
        return (
            f"Accepted extra workload imbalance on {chosen.display_name} to keep the "
            f"{fmt_num(inp.gap)}-point success advantage."
        )
    return (
        f"Sacrificed {fmt_num(sacrifice_pp)} percentage points of expected success to "
        f"steer work toward the less loaded {chosen.display_name}."
    )


def rule_reason(
    task: Task,
    phase: PhaseState,
    ledger: WorkloadLedger,
    balance: BalanceReport,
    mode: OperationalMode,
    scores: list[CapabilityScore],
) -> AllocationDecision:
    """Deterministic reasoning over the top-two capability gap.

    Identical inputs always produce the identical decision; the generated
    explanation names the chosen robot, quotes its rate, and states the
    workload context so it clears the validator by construction.
    """
    weights = phase_weights(phase.phase, mode)
    inp = tradeoff_for(scores, ledger, mode, weights)
    # Rates are quoted at the response grammar's percent precision so a
    # rendered decision parses back field-identical.
    by_robot = {s.robot: parse_pct(fmt_pct(s.success_rate)) for s in scores}
    chosen = decide_tradeoff(inp)
    expected = by_robot[chosen]
    sacrifice_pp = (by_robot[inp.top_robot] - expected) * 100.0

    chosen_count = ledger.counts[chosen]
    sentences = [
        f"{chosen.display_name} takes this task at {fmt_pct(expected)} expected success.",
        (
            f"The leading option beats the runner-up by {fmt_num(inp.gap)} percentage points, "
            f"which the {mode.display_name} mode treats as "
            f"{'decisive' if chosen is inp.top_robot else 'not worth the imbalance'} "
            f"in the {phase.phase.value} phase."
        ),
        (
            f"{chosen.display_name} currently holds {chosen_count} of the "
            f"{fmt_num(ledger.target)}-task target, so this assignment "
            f"{'stays within' if abs(chosen_count + 1 - ledger.target) <= ledger.target * 0.25 else 'widens'} "
            f"the workload spread."
        ),
    ]
    return AllocationDecision(
        task_id=task.action_id,
        chosen=chosen,
        expected_success=expected,
        reasoning_text=" ".join(sentences),
        confidence=confidence_for_gap(inp.gap),
        tradeoff_summary=_tradeoff_summary(chosen, inp, sacrifice_pp),
        claimed_post_workload={r: ledger.counts[r] + (1 if r is chosen else 0) for r in ROBOT_ORDER},
        analysis_rates=dict(by_robot),
    )
