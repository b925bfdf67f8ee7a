"""Greedy per-task allocation: always the highest success rate."""

from __future__ import annotations

from ..capability import success_rate
from ..model import ROBOT_ORDER, RobotKind, SuccessMatrix, TaskDataset

# task_id -> assigned robot; shared output shape of every baseline
Assignment = dict[int, RobotKind]


def greedy(dataset: TaskDataset, matrix: SuccessMatrix) -> Assignment:
    """Assign each task in order to the robot with the best rate for it.

    Ties go to the robot currently holding fewer tasks, then to the fixed
    Light, Medium, Heavy order, so the result is deterministic.
    """
    order = {r: i for i, r in enumerate(ROBOT_ORDER)}
    counts = {r: 0 for r in ROBOT_ORDER}
    assignment: Assignment = {}
    for task in dataset:
        best = min(
            ROBOT_ORDER,
            key=lambda r: (-success_rate(task, r, matrix).success_rate, counts[r], order[r]),
        )
        assignment[task.action_id] = best
        counts[best] += 1
    return assignment
