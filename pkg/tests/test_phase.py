from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from taskalloc.model import OperationalMode, RobotKind
from taskalloc.phase import (
    Phase,
    Severity,
    StrategyWeights,
    WorkloadLedger,
    balance_score,
    compute_ledger,
    decide_severity,
    detect_phase,
    phase_weights,
)

from conftest import counts


def transcribed_phase(completed: int, total: int) -> Phase:
    # Literal transcription of the phase-detection steps, kept independent
    # of the implementation under test.
    if total == 0:
        return Phase.EARLY
    p = completed / total
    if p < 0.33:
        return Phase.EARLY
    elif 0.33 <= p < 0.67:
        return Phase.MIDDLE
    else:
        return Phase.LATE


class TestDetectPhase:
    def test_start_is_early_with_zero_urgency(self):
        state = detect_phase(0, 36)
        assert state.phase is Phase.EARLY
        assert state.balance_urgency == 0.0

    def test_halfway_is_middle(self):
        assert detect_phase(18, 36).phase is Phase.MIDDLE

    def test_late_boundary(self):
        state = detect_phase(30, 36)
        assert state.phase is Phase.LATE
        assert state.progress_ratio == pytest.approx(0.833, abs=1e-3)

    def test_zero_total_forces_early(self):
        assert detect_phase(0, 0).phase is Phase.EARLY

    def test_completed_beyond_total_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            detect_phase(5, 4)

    def test_exhaustive_against_transcription(self):
        for completed in range(37):
            assert detect_phase(completed, 36).phase is transcribed_phase(completed, 36)

    @given(total=st.integers(0, 200), frac=st.floats(0, 1))
    def test_matches_transcription_for_any_total(self, total, frac):
        completed = min(total, int(round(frac * total)))
        assert detect_phase(completed, total).phase is transcribed_phase(completed, total)


class TestLedger:
    def test_worked_example(self):
        ledger = compute_ledger(counts(19, 10, 7), 36)
        assert ledger.target == 12
        assert ledger.deviations == {
            RobotKind.LIGHT: 7,
            RobotKind.MEDIUM: -2,
            RobotKind.HEAVY: -5,
        }

    def test_perfect_balance(self):
        ledger = compute_ledger(counts(12, 12, 12), 36)
        assert all(d == 0 for d in ledger.deviations.values())

    def test_empty_counts(self):
        ledger = compute_ledger(counts(), 36)
        assert all(d == -12 for d in ledger.deviations.values())

    def test_fractional_target(self):
        assert compute_ledger(counts(), 10).target == pytest.approx(10 / 3)

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError):
            compute_ledger(counts(), 0)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            compute_ledger(counts(light=-1), 36)


class TestBalanceScore:
    def test_worked_example(self):
        report = balance_score(compute_ledger(counts(19, 10, 7), 36))
        assert report.score == pytest.approx(41.67, abs=0.05)
        assert report.max_abs_deviation == 7
        assert report.severity is Severity.HIGH

    def test_perfect(self):
        report = balance_score(compute_ledger(counts(12, 12, 12), 36))
        assert report.score == 100.0
        assert report.severity is Severity.LOW

    def test_clamped_at_zero(self):
        # Raw value is -100 here; the score floor is 0.
        report = balance_score(compute_ledger(counts(36, 0, 0), 36))
        assert report.score == 0.0
        assert report.severity is Severity.CRITICAL

    def test_zero_target_rejected(self):
        with pytest.raises(ValueError):
            balance_score(WorkloadLedger(counts=counts(), target=0.0))

    def test_monotone_in_max_deviation(self):
        scores = [
            balance_score(compute_ledger(counts(12 + k, 12 - k, 12), 36)).score
            for k in range(13)
        ]
        assert scores == sorted(scores, reverse=True)


class TestSeverity:
    @pytest.mark.parametrize(
        "deviation,expected",
        [
            (0, Severity.LOW),
            (3, Severity.LOW),        # boundary lands in the lower bucket
            (3.5, Severity.MODERATE),
            (6, Severity.MODERATE),
            (7, Severity.HIGH),
            (12, Severity.HIGH),
            (13, Severity.CRITICAL),
        ],
    )
    def test_buckets_at_target_twelve(self, deviation, expected):
        assert decide_severity(deviation, 12) is expected

    def test_thresholds_scale_with_target(self):
        # Proportional thresholds: d/target drives the bucket.
        assert decide_severity(1.5, 6) is Severity.LOW
        assert decide_severity(2, 6) is Severity.MODERATE
        assert decide_severity(5, 6) is Severity.HIGH
        assert decide_severity(7, 6) is Severity.CRITICAL

    @given(st.floats(0, 1e6), st.floats(0.1, 1e4))
    def test_total_partition(self, deviation, target):
        # Every non-negative deviation maps to exactly one bucket.
        assert decide_severity(deviation, target) in Severity

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            decide_severity(-1, 12)
        with pytest.raises(ValueError):
            decide_severity(1, 0)


class TestPhaseWeights:
    @pytest.mark.parametrize(
        "phase,expected",
        [
            (Phase.EARLY, (0.80, 0.20)),
            (Phase.MIDDLE, (0.60, 0.40)),
            (Phase.LATE, (0.40, 0.60)),
        ],
    )
    def test_balanced_mode_adapts(self, phase, expected):
        w = phase_weights(phase, OperationalMode.BALANCED)
        assert (w.alpha_success, w.alpha_balance) == expected

    @pytest.mark.parametrize("phase", list(Phase))
    def test_fixed_modes_ignore_phase(self, phase):
        sf = phase_weights(phase, OperationalMode.SUCCESS_FOCUSED)
        ab = phase_weights(phase, OperationalMode.AGGRESSIVE_BALANCE)
        assert (sf.alpha_success, sf.alpha_balance) == (0.90, 0.10)
        assert (ab.alpha_success, ab.alpha_balance) == (0.30, 0.70)

    @pytest.mark.parametrize("phase", list(Phase))
    @pytest.mark.parametrize("mode", list(OperationalMode))
    def test_weights_sum_to_one(self, phase, mode):
        w = phase_weights(phase, mode)
        assert w.alpha_success + w.alpha_balance == pytest.approx(1.0, abs=1e-12)

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError):
            StrategyWeights(0.5, 0.6)
