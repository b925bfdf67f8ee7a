from __future__ import annotations

import json

import pytest

from taskalloc.evaluation import benchmark, expected_success, simulate
from taskalloc.model import (
    FEATURES,
    OperationalMode,
    ROBOT_ORDER,
    RobotKind,
    SuccessMatrix,
    TaskDataset,
)

from conftest import make_task


def constant_matrix(value):
    return SuccessMatrix(entries={r: {f: value for f in FEATURES} for r in ROBOT_ORDER})


def all_light(dataset):
    return {t.action_id: RobotKind.LIGHT for t in dataset}


@pytest.fixture
def dex3():
    return TaskDataset("dex3", tuple(make_task(i, "Fiddle", "t", ("dexterous",)) for i in range(3)))


class TestExpectedSuccess:
    def test_all_light_dexterous(self, dex3, matrix):
        assert expected_success(all_light(dex3), dex3, matrix) == pytest.approx(0.80)

    def test_empty_dataset(self, matrix):
        assert expected_success({}, TaskDataset("none", ()), matrix) == 0.0

    def test_mixed_two_task_mean(self, matrix):
        dataset = TaskDataset(
            "two",
            (make_task(0, "a", "t", ("careful",)), make_task(1, "b", "t", ("heavy",))),
        )
        assignment = {0: RobotKind.LIGHT, 1: RobotKind.HEAVY}
        assert expected_success(assignment, dataset, matrix) == pytest.approx(0.90)


class TestSimulate:
    def test_degenerate_one(self, dex3):
        result = simulate(all_light(dex3), dex3, constant_matrix(1.0), trials=500, seed=1)
        assert result.overall_success == 1.0
        assert result.standard_error == 0.0

    def test_degenerate_zero(self, dex3):
        result = simulate(all_light(dex3), dex3, constant_matrix(0.0), trials=500, seed=1)
        assert result.overall_success == 0.0

    def test_within_three_stated_standard_errors(self, dex3, matrix):
        result = simulate(all_light(dex3), dex3, matrix, trials=10_000, seed=42)
        assert abs(result.overall_success - 0.80) <= 3 * result.standard_error

    def test_reproducible(self, dex3, matrix):
        a = simulate(all_light(dex3), dex3, matrix, trials=1000, seed=7)
        b = simulate(all_light(dex3), dex3, matrix, trials=1000, seed=7)
        assert a == b

    def test_error_shrinks_with_trials(self, dex3, matrix):
        # Mean absolute error over several seeds should drop roughly like
        # 1/sqrt(trials); a factor-25 trial increase leaves ample margin.
        def mad(trials):
            errs = [
                abs(simulate(all_light(dex3), dex3, matrix, trials, seed).overall_success - 0.80)
                for seed in range(10)
            ]
            return sum(errs) / len(errs)

        assert mad(25_000) < mad(100)

    def test_multi_feature_task_pools_both_features(self, matrix):
        dataset = TaskDataset("one", (make_task(0, "x", "t", ("careful", "heavy")),))
        result = simulate(all_light(dataset), dataset, matrix, trials=400, seed=3)
        assert result.per_feature_success["careful"] == result.per_feature_success["heavy"]
        assert result.per_feature_success["careful"] == result.overall_success
        assert "dexterous" not in result.per_feature_success  # no task carries it

    def test_trials_must_be_positive(self, dex3, matrix):
        with pytest.raises(ValueError):
            simulate(all_light(dex3), dex3, matrix, trials=0)


class TestBenchmark:
    def test_workload_conservation(self, bundled_dataset, matrix):
        report = benchmark(bundled_dataset, matrix, methods=("workflow", "greedy"), trials=200)
        assert len(report.rows) == 2
        for row in report.rows:
            assert sum(row.workload.values()) == 36

    def test_mode_orderings(self, bundled_dataset, matrix):
        report = benchmark(
            bundled_dataset,
            matrix,
            methods=("workflow",),
            modes=tuple(OperationalMode),
            trials=100,
        )
        by_mode = {row.mode: row for row in report.rows}
        sf = by_mode[OperationalMode.SUCCESS_FOCUSED.value]
        bal = by_mode[OperationalMode.BALANCED.value]
        ab = by_mode[OperationalMode.AGGRESSIVE_BALANCE.value]
        assert sf.expected >= bal.expected >= ab.expected
        assert ab.max_abs_deviation <= bal.max_abs_deviation <= sf.max_abs_deviation

    def test_failed_method_recorded_not_fatal(self, bundled_dataset, matrix):
        report = benchmark(bundled_dataset, matrix, methods=("brute", "greedy"), trials=100)
        brute_row = next(r for r in report.rows if r.method == "brute")
        greedy_row = next(r for r in report.rows if r.method == "greedy")
        assert brute_row.error is not None  # 36 tasks exceed the cap
        assert greedy_row.error is None

    def test_unknown_method_rejected(self, bundled_dataset, matrix):
        with pytest.raises(ValueError, match="unknown method"):
            benchmark(bundled_dataset, matrix, methods=("magic",))

    def test_machine_record_deterministic(self, bundled_dataset, matrix):
        a = benchmark(bundled_dataset, matrix, methods=("workflow", "greedy", "dp"), trials=300, seed=9)
        b = benchmark(bundled_dataset, matrix, methods=("workflow", "greedy", "dp"), trials=300, seed=9)
        assert json.dumps(a.to_record(), sort_keys=True) == json.dumps(b.to_record(), sort_keys=True)

    def test_volatile_fields_opt_in(self, bundled_dataset, matrix):
        report = benchmark(bundled_dataset, matrix, methods=("greedy",), trials=100)
        assert "runtime_seconds" not in report.to_record()["rows"][0]
        assert "runtime_seconds" in report.to_record(include_volatile=True)["rows"][0]

    def test_fallback_accounting_coincides_without_fallbacks(self, bundled_dataset, matrix):
        report = benchmark(bundled_dataset, matrix, methods=("workflow",), trials=100)
        row = report.rows[0]
        assert row.fallback_count == 0
        assert row.expected_estimate_basis == pytest.approx(row.expected)

    def test_human_table_renders(self, bundled_dataset, matrix):
        report = benchmark(bundled_dataset, matrix, methods=("greedy", "brute"), trials=100)
        table = report.to_table()
        assert "greedy" in table and "brute" in table
        assert "expected" in table.splitlines()[0]
