"""Exact allocators: exhaustive enumeration and capacity-constrained DP."""

from __future__ import annotations

import sys
from itertools import product

from ..capability import success_rate
from ..model import ROBOT_ORDER, RobotKind, SuccessMatrix, TaskDataset
from ..phase import balance_score, compute_ledger
from .greedy import Assignment

BRUTE_FORCE_CAP = 12


def _task_rates(dataset: TaskDataset, matrix: SuccessMatrix) -> list[dict[RobotKind, float]]:
    return [
        {r: success_rate(task, r, matrix).success_rate for r in ROBOT_ORDER} for task in dataset
    ]


def assignment_objective(
    assignment: Assignment,
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    balance_weight: float = 0.0,
) -> float:
    """Mean expected success, optionally plus balance_weight * (B / 100)."""
    if dataset.total_count == 0:
        return 0.0
    rates = _task_rates(dataset, matrix)
    mean = sum(rates[i][assignment[t.action_id]] for i, t in enumerate(dataset)) / dataset.total_count
    if balance_weight == 0.0:
        return mean
    counts = {r: 0 for r in ROBOT_ORDER}
    for t in dataset:
        counts[assignment[t.action_id]] += 1
    bal = balance_score(compute_ledger(counts, dataset.total_count)).score
    return mean + balance_weight * bal / 100.0


def brute_force(
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    balance_weight: float = 0.0,
    cap: int = BRUTE_FORCE_CAP,
) -> Assignment:
    """Enumerate all 3^N assignments and keep the objective maximum.

    `balance_weight` = 0 maximizes pure mean expected success; a positive
    weight adds balance_weight * B/100 to the objective. Instances above
    `cap` tasks are refused (use dp_balanced for larger ones).
    """
    n = dataset.total_count
    if n > cap:
        raise ValueError(
            f"brute force enumerates 3^{n} assignments; the cap is {cap} tasks. "
            "Use dp_balanced for larger instances."
        )
    if n == 0:
        return {}
    rates = _task_rates(dataset, matrix)
    ids = [t.action_id for t in dataset]
    best: tuple[RobotKind, ...] | None = None
    best_value = float("-inf")
    for combo in product(ROBOT_ORDER, repeat=n):
        value = sum(rates[i][combo[i]] for i in range(n)) / n
        if balance_weight != 0.0:
            counts = {r: 0 for r in ROBOT_ORDER}
            for robot in combo:
                counts[robot] += 1
            bal = balance_score(compute_ledger(counts, n)).score
            value += balance_weight * bal / 100.0
        if value > best_value:
            best_value = value
            best = combo
    return dict(zip(ids, best))


def dp_balanced(
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    capacities: dict[RobotKind, int],
) -> Assignment:
    """Maximize total expected success with each robot limited to its
    capacity, by dynamic programming over (task index, remaining capacities).

    Capacities must cover the dataset; when they sum to exactly the task
    count every robot receives exactly its capacity, and looser capacities
    act as upper bounds. Optimal among all capacity-feasible assignments;
    ties resolve toward the fixed robot order at each task.
    """
    n = dataset.total_count
    caps = tuple(int(capacities.get(r, 0)) for r in ROBOT_ORDER)
    if any(c < 0 for c in caps):
        raise ValueError(f"capacities must be non-negative, got {capacities}")
    if sum(caps) < n:
        raise ValueError(
            f"infeasible capacities: they sum to {sum(caps)} but the dataset has {n} tasks"
        )
    if n == 0:
        return {}

    rates = _task_rates(dataset, matrix)
    # value[(i, remaining)] = best total success for tasks i.. given the
    # remaining capacity vector; choice stores the argmax robot index.
    value: dict[tuple[int, tuple[int, int, int]], float] = {}
    choice: dict[tuple[int, tuple[int, int, int]], int] = {}

    def solve(i: int, remaining: tuple[int, int, int]) -> float:
        if i == n:
            return 0.0
        key = (i, remaining)
        if key in value:
            return value[key]
        best = float("-inf")
        best_j = -1
        for j, robot in enumerate(ROBOT_ORDER):
            if remaining[j] == 0:
                continue
            nxt = list(remaining)
            nxt[j] -= 1
            candidate = rates[i][robot] + solve(i + 1, tuple(nxt))
            if candidate > best:
                best = candidate
                best_j = j
        value[key] = best
        choice[key] = best_j
        return best

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n + 100))
    try:
        solve(0, caps)
    finally:
        sys.setrecursionlimit(old_limit)

    assignment: Assignment = {}
    remaining = caps
    for i, task in enumerate(dataset):
        j = choice[(i, remaining)]
        assignment[task.action_id] = ROBOT_ORDER[j]
        nxt = list(remaining)
        nxt[j] -= 1
        remaining = tuple(nxt)
    return assignment
