"""Phase detection, workload deviation tracking, and balance scoring.

All functions here are pure; the workflow recomputes these values from
scratch at every allocation cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import OperationalMode, RobotKind, ROBOT_ORDER


class Phase(Enum):
    EARLY = "early"
    MIDDLE = "middle"
    LATE = "late"


class Severity(Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"
    CRITICAL = "critical"


@dataclass(frozen=True)
class PhaseState:
    """Progress snapshot: how far along the task sequence the run is."""

    completed_count: int
    total_count: int
    progress_ratio: float
    phase: Phase

    @property
    def balance_urgency(self) -> float:
        # Urgency grows with progress; surfaced in prompts only.
        return self.progress_ratio

    @property
    def remaining(self) -> int:
        return self.total_count - self.completed_count


@dataclass(frozen=True)
class WorkloadLedger:
    """Per-robot assigned counts with target load and signed deviations."""

    counts: dict[RobotKind, int]
    target: float

    @property
    def deviations(self) -> dict[RobotKind, float]:
        return {r: self.counts[r] - self.target for r in ROBOT_ORDER}

    @property
    def total_assigned(self) -> int:
        return sum(self.counts.values())

    def with_increment(self, robot: RobotKind) -> WorkloadLedger:
        counts = dict(self.counts)
        counts[robot] += 1
        return WorkloadLedger(counts=counts, target=self.target)


@dataclass(frozen=True)
class BalanceReport:
    """Fairness summary: 0-100 score, worst deviation, severity bucket."""

    score: float
    max_abs_deviation: float
    severity: Severity


@dataclass(frozen=True)
class StrategyWeights:
    """Relative priority of success maximization vs workload balance."""

    alpha_success: float
    alpha_balance: float

    def __post_init__(self):
        if abs(self.alpha_success + self.alpha_balance - 1.0) > 1e-9:
            raise ValueError(
                f"strategy weights must sum to 1, got {self.alpha_success} + {self.alpha_balance}"
            )


def detect_phase(completed: int, total: int) -> PhaseState:
    """Classify progress into early/middle/late.

    Boundaries are strict ratio comparisons: early below 0.33, middle from
    0.33 up to (not including) 0.67, late from 0.67. A zero-task sequence is
    early by definition.
    """
    if completed < 0 or total < 0:
        raise ValueError(f"counts must be non-negative, got ({completed}, {total})")
    if completed > total:
        raise ValueError(f"completed ({completed}) exceeds total ({total})")
    if total == 0:
        return PhaseState(completed_count=0, total_count=0, progress_ratio=0.0, phase=Phase.EARLY)
    p = completed / total
    if p < 0.33:
        phase = Phase.EARLY
    elif p < 0.67:
        phase = Phase.MIDDLE
    else:
        phase = Phase.LATE
    return PhaseState(completed_count=completed, total_count=total, progress_ratio=p, phase=phase)


def compute_ledger(counts: dict[RobotKind, int], total_tasks: int) -> WorkloadLedger:
    """Build a ledger with target = total_tasks / number of robots.

    The target stays real-valued; deviations are count minus target.
    """
    if total_tasks <= 0:
        raise ValueError(f"total_tasks must be positive, got {total_tasks}")
    full = {r: int(counts.get(r, 0)) for r in ROBOT_ORDER}
    for robot, c in full.items():
        if c < 0:
            raise ValueError(f"negative count for {robot.value}: {c}")
    return WorkloadLedger(counts=full, target=total_tasks / len(ROBOT_ORDER))


def decide_severity(max_abs_deviation: float, target: float) -> Severity:
    """Bucket the worst-case deviation relative to the target load.

    Thresholds scale with the target (at target 12: low <= 3, moderate <= 6,
    high <= 12, critical beyond); boundary values land in the lower bucket.
    """
    if max_abs_deviation < 0:
        raise ValueError("max_abs_deviation must be non-negative")
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    ratio = max_abs_deviation / target
    if ratio <= 0.25:
        return Severity.LOW
    if ratio <= 0.5:
        return Severity.MODERATE
    if ratio <= 1.0:
        return Severity.HIGH
    return Severity.CRITICAL


def balance_score(ledger: WorkloadLedger) -> BalanceReport:
    """Score workload fairness as 100 * (1 - max|deviation| / target).

    The raw value goes negative once the worst deviation exceeds the target,
    so the score is clamped to [0, 100].
    """
    if ledger.target <= 0:
        raise ValueError(f"ledger target must be positive, got {ledger.target}")
    max_abs = max(abs(d) for d in ledger.deviations.values())
    raw = 100.0 * (1.0 - max_abs / ledger.target)
    score = min(100.0, max(0.0, raw))
    return BalanceReport(
        score=score,
        max_abs_deviation=max_abs,
        severity=decide_severity(max_abs, ledger.target),
    )


# Balanced mode shifts priority from success toward fairness as the run
# progresses; the fixed modes keep one weighting throughout.
_BALANCED_WEIGHTS = {
    Phase.EARLY: StrategyWeights(0.80, 0.20),
    Phase.MIDDLE: StrategyWeights(0.60, 0.40),
    Phase.LATE: StrategyWeights(0.40, 0.60),
}


def phase_weights(phase: Phase, mode: OperationalMode) -> StrategyWeights:
    if mode is OperationalMode.SUCCESS_FOCUSED:
        return StrategyWeights(0.90, 0.10)
    if mode is OperationalMode.AGGRESSIVE_BALANCE:
        return StrategyWeights(0.30, 0.70)
    return _BALANCED_WEIGHTS[phase]
