from __future__ import annotations

import itertools
import random

import pytest

from taskalloc.capability import load_scenario, rank_robots, scenario_config_path, success_rate
from taskalloc.model import FEATURES, RobotKind, SuccessMatrix, default_matrix

from conftest import make_task


def mean_oracle(features, robot, matrix):
    # Hand-rolled aggregate: sum the raw entries, divide by the count.
    total = 0.0
    for f in features:
        total += matrix.entries[robot][f]
    return total / len(features)


class TestSuccessRate:
    def test_single_feature_equals_raw_entry(self, matrix):
        score = success_rate(make_task(features=("dexterous",)), RobotKind.LIGHT, matrix)
        assert score.success_rate == 0.80

    def test_two_feature_mean(self, matrix):
        score = success_rate(make_task(features=("careful", "heavy")), RobotKind.MEDIUM, matrix)
        assert score.success_rate == pytest.approx(0.70, abs=1e-12)

    def test_three_feature_mean(self, matrix):
        score = success_rate(
            make_task(features=("careful", "dexterous", "heavy")), RobotKind.LIGHT, matrix
        )
        assert score.success_rate == pytest.approx((0.90 + 0.80 + 0.50) / 3, abs=1e-15)

    def test_random_tasks_match_oracle(self, matrix):
        rng = random.Random(1234)
        for _ in range(200):
            k = rng.randint(1, 3)
            features = tuple(rng.sample(FEATURES, k))
            robot = rng.choice(list(RobotKind))
            got = success_rate(make_task(features=features), robot, matrix).success_rate
            assert abs(got - mean_oracle(features, robot, matrix)) <= 1e-12

    def test_feature_order_invariance(self, matrix):
        for robot in RobotKind:
            rates = {
                success_rate(make_task(features=perm), robot, matrix).success_rate
                for perm in itertools.permutations(("careful", "dexterous", "heavy"))
            }
            assert len(rates) == 1

    def test_within_feature_bounds(self, matrix):
        for features in [("careful", "heavy"), ("dexterous", "heavy"), ("careful", "dexterous")]:
            for robot in RobotKind:
                rate = success_rate(make_task(features=features), robot, matrix).success_rate
                entries = [matrix.entries[robot][f] for f in features]
                assert min(entries) <= rate <= max(entries)


class TestRankRobots:
    def test_dexterous_ranking(self, matrix):
        ranked = rank_robots(make_task(features=("dexterous",)), matrix)
        assert [(s.robot, s.success_rate) for s in ranked] == [
            (RobotKind.LIGHT, 0.80),
            (RobotKind.MEDIUM, 0.60),
            (RobotKind.HEAVY, 0.40),
        ]

    def test_heavy_ranking(self, matrix):
        ranked = rank_robots(make_task(features=("heavy",)), matrix)
        assert [s.robot for s in ranked] == [RobotKind.HEAVY, RobotKind.MEDIUM, RobotKind.LIGHT]

    def test_tie_break_uses_fixed_order(self):
        uniform = SuccessMatrix(
            entries={r: {f: 0.5 for f in FEATURES} for r in RobotKind}
        )
        ranked = rank_robots(make_task(features=("careful",)), uniform)
        assert [s.robot for s in ranked] == [RobotKind.LIGHT, RobotKind.MEDIUM, RobotKind.HEAVY]
        assert all(s.success_rate == 0.5 for s in ranked)


class TestScenarios:
    def test_default_scenario_is_builtin_table(self):
        assert load_scenario("default").matrix.entries == default_matrix().entries

    @pytest.mark.parametrize("name", ["default", "heavy_excels", "medium_excels", "light_excels"])
    def test_all_scenarios_load(self, name):
        scenario = load_scenario(name)
        assert scenario.name == name
        for row in scenario.matrix.entries.values():
            assert all(0.0 <= v <= 1.0 for v in row.values())

    def test_medium_excels_anchored_rates(self):
        matrix = load_scenario("medium_excels").matrix
        row = matrix.entries[RobotKind.MEDIUM]
        assert (row["careful"], row["dexterous"], row["heavy"]) == (0.925, 0.866, 0.85)

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            scenario_config_path("mystery")

    def test_scenario_names_accept_dashes(self):
        assert load_scenario("heavy-excels").name == "heavy_excels"
