"""Tabular Q-learning over the allocation MDP.

# Training loop:
# 1. Q starts at zero for every (task index, counts) state.
# 2. Per episode, walk the task sequence with epsilon-greedy actions.
# 3. Reward each step with a seeded Bernoulli draw at the task's rate;
#    the final step adds the balance bonus.
# 4. TD update with learning rate alpha; epsilon decays per episode.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from ..model import ROBOT_ORDER, SuccessMatrix, TaskDataset
from .greedy import Assignment
from .mdp import AllocationMDP, RLConfig, State

QTable = dict[State, list[float]]


def _argmax(values: list[float]) -> int:
    best, best_i = values[0], 0
    for i in range(1, len(values)):
        if values[i] > best:
            best, best_i = values[i], i
    return best_i


def q_learning(
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    config: RLConfig,
) -> tuple[QTable, Assignment]:
    """Train a tabular policy; returns the Q table and its greedy rollout.

    Fully reproducible: all randomness comes from one seeded generator.
    """
    mdp = AllocationMDP(dataset, matrix, balance_weight=config.balance_weight)
    rng = random.Random(config.seed)
    n_actions = len(ROBOT_ORDER)
    q: QTable = {}

    def q_values(state: State) -> list[float]:
        if state not in q:
            q[state] = [0.0] * n_actions
        return q[state]

    for episode in range(config.episodes):
        epsilon = config.epsilon_at(episode)
        state = mdp.initial_state
        while not mdp.is_terminal(state):
            values = q_values(state)
            if rng.random() < epsilon:
                action = rng.randrange(n_actions)
            else:
                action = _argmax(values)
            reward = 1.0 if rng.random() < mdp.rates[state[0]][action] else 0.0
            nxt = mdp.next_state(state, action)
            if mdp.is_terminal(nxt):
                target = reward + config.discount * mdp.terminal_bonus(nxt[1])
            else:
                target = reward + config.discount * max(q_values(nxt))
            values[action] += config.learning_rate * (target - values[action])
            state = nxt

    # Greedy rollout of the learned policy.
    actions: list[int] = []
    state = mdp.initial_state
    while not mdp.is_terminal(state):
        actions.append(_argmax(q_values(state)))
        state = mdp.next_state(state, actions[-1])
    return q, mdp.assignment_from_actions(actions)


def greedy_policy(q: QTable):
    """Wrap a Q table as a policy function; unseen states fall back to 0."""

    def policy(state: State) -> int:
        values = q.get(state)
        return _argmax(values) if values else 0

    return policy


def dump_policy(q: QTable, path) -> None:
    """Write the Q table to a JSON file for inspection.

    Keys are "task_index|c_light,c_medium,c_heavy"; values are the three
    action values in fixed robot order.
    """
    record = {
        f"{i}|{','.join(map(str, cs))}": values for (i, cs), values in sorted(q.items())
    }
    Path(path).write_text(json.dumps(record, indent=1, sort_keys=True) + "\n")
