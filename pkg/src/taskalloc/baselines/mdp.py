"""The allocation MDP shared by the RL baselines, plus exact solvers.

State is (task index, per-robot counts); actions are the three robots;
stepping to the next task yields a Bernoulli success reward at the task's
aggregate rate, and finishing the sequence pays an extra bonus of
balance_weight * B/100 for the final workload balance. Transitions are
deterministic, so the optimum is computable exactly by backward induction
(value_iteration) and any fixed policy can be evaluated the same way
(policy_value).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..capability import success_rate
from ..model import ROBOT_ORDER, RobotKind, SuccessMatrix, TaskDataset
from ..phase import balance_score, compute_ledger

State = tuple[int, tuple[int, int, int]]


@dataclass(frozen=True)
class RLConfig:
    """Hyperparameters shared by the tabular and deep Q baselines."""

    episodes: int = 50_000
    learning_rate: float = 0.1
    discount: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.999
    replay_capacity: int = 4096
    batch_size: int = 32
    target_sync: int = 250
    hidden_widths: tuple[int, int] = (32, 32)
    balance_weight: float = 0.5
    seed: int = 42

    def __post_init__(self):
        if self.episodes <= 0 or self.learning_rate <= 0 or self.discount <= 0:
            raise ValueError("episodes, learning_rate, and discount must be positive")
        for eps in (self.epsilon_start, self.epsilon_end):
            if not (0.0 <= eps <= 1.0):
                raise ValueError(f"epsilon values must lie in [0, 1], got {eps}")
        if self.replay_capacity <= 0 or self.batch_size <= 0 or self.target_sync <= 0:
            raise ValueError("replay_capacity, batch_size, and target_sync must be positive")
        if any(w <= 0 for w in self.hidden_widths):
            raise ValueError("hidden widths must be positive")

    def epsilon_at(self, episode: int) -> float:
        return max(self.epsilon_end, self.epsilon_start * self.epsilon_decay**episode)


class AllocationMDP:
    def __init__(self, dataset: TaskDataset, matrix: SuccessMatrix, balance_weight: float = 0.5):
        self.dataset = dataset
        self.matrix = matrix
        self.balance_weight = balance_weight
        self.n = dataset.total_count
        self.rates = [
            [success_rate(task, r, matrix).success_rate for r in ROBOT_ORDER] for task in dataset
        ]

    @property
    def initial_state(self) -> State:
        return (0, (0, 0, 0))

    def is_terminal(self, state: State) -> bool:
        return state[0] >= self.n

    def next_state(self, state: State, action: int) -> State:
        i, counts = state
        nxt = list(counts)
        nxt[action] += 1
        return (i + 1, tuple(nxt))

    def expected_reward(self, state: State, action: int) -> float:
        return self.rates[state[0]][action]

    def terminal_bonus(self, counts: tuple[int, int, int]) -> float:
        if self.balance_weight == 0.0:
            return 0.0
        ledger = compute_ledger(dict(zip(ROBOT_ORDER, counts)), self.n)
        return self.balance_weight * balance_score(ledger).score / 100.0

    def states_at(self, i: int):
        """All workload count triples reachable after i assignments."""
        for a in range(i + 1):
            for b in range(i - a + 1):
                yield (i, (a, b, i - a - b))

    def assignment_from_actions(self, actions: list[int]) -> dict[int, RobotKind]:
        return {
            task.action_id: ROBOT_ORDER[actions[idx]] for idx, task in enumerate(self.dataset)
        }


def value_iteration(mdp: AllocationMDP, discount: float = 1.0) -> tuple[float, dict[State, int]]:
    """Exact optimum by backward induction over the layered state space.

    Returns the optimal expected return from the initial state and the
    optimal action for every state.
    """
    values: dict[State, float] = {}
    policy: dict[State, int] = {}
    for state in mdp.states_at(mdp.n):
        values[state] = mdp.terminal_bonus(state[1])
    for i in range(mdp.n - 1, -1, -1):
        for state in mdp.states_at(i):
            best, best_a = float("-inf"), 0
            for a in range(len(ROBOT_ORDER)):
                v = mdp.expected_reward(state, a) + discount * values[mdp.next_state(state, a)]
                if v > best:
                    best, best_a = v, a
            values[state] = best
            policy[state] = best_a
    return values[mdp.initial_state], policy


def policy_value(mdp: AllocationMDP, policy, discount: float = 1.0) -> float:
    """Expected return of a deterministic policy (state -> action index)."""
    state = mdp.initial_state
    total = 0.0
    factor = 1.0
    while not mdp.is_terminal(state):
        a = policy(state)
        total += factor * mdp.expected_reward(state, a)
        factor *= discount
        state = mdp.next_state(state, a)
    total += factor * mdp.terminal_bonus(state[1])
    return total
