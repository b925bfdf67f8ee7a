"""Feature-aggregated robot success rates and the benchmark scenarios."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .model import ROBOT_ORDER, RobotKind, SuccessMatrix, Task, load_robot_config


@dataclass(frozen=True)
class CapabilityScore:
    robot: RobotKind
    task_id: int
    success_rate: float


@dataclass(frozen=True)
class Scenario:
    """A named success-matrix variant for benchmark runs."""

    name: str
    matrix: SuccessMatrix


def success_rate(task: Task, robot: RobotKind, matrix: SuccessMatrix) -> CapabilityScore:
    """A robot's success rate on a task: the mean matrix entry over the
    task's required features (a single-feature task returns the raw entry)."""
    rates = [matrix.rate(f, robot) for f in task.features]
    return CapabilityScore(robot=robot, task_id=task.action_id, success_rate=sum(rates) / len(rates))


def rank_robots(task: Task, matrix: SuccessMatrix) -> list[CapabilityScore]:
    """All three robots sorted by descending success rate.

    Ties keep the fixed Light, Medium, Heavy order, so ranking is total and
    deterministic.
    """
    scores = [success_rate(task, robot, matrix) for robot in ROBOT_ORDER]
    order = {r: i for i, r in enumerate(ROBOT_ORDER)}
    return sorted(scores, key=lambda s: (-s.success_rate, order[s.robot]))


SCENARIO_NAMES = ("default", "heavy_excels", "medium_excels", "light_excels")


def scenario_config_path(name: str) -> Path:
    """Path to the bundled config file for a named scenario."""
    key = name.strip().lower().replace("-", "_")
    if key not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r} (expected one of {SCENARIO_NAMES})")
    return Path(str(resources.files("taskalloc").joinpath(f"data/scenarios/{key}.json")))


def load_scenario(name: str) -> Scenario:
    key = name.strip().lower().replace("-", "_")
    return Scenario(name=key, matrix=load_robot_config(scenario_config_path(key)))
