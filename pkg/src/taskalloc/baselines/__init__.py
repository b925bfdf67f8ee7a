"""Comparison allocators: brute force, greedy, DP, Q-learning, DQN.

All methods operate on the same task/matrix model as the workflow and
return an Assignment (task_id -> robot), so the evaluation harness can
score every approach identically.
"""

from .exact import brute_force, dp_balanced
from .greedy import greedy
from .mdp import AllocationMDP, RLConfig, policy_value, value_iteration
from .qlearning import q_learning
from .dqn import dqn

__all__ = [
    "AllocationMDP",
    "RLConfig",
    "brute_force",
    "dp_balanced",
    "dqn",
    "greedy",
    "policy_value",
    "q_learning",
    "value_iteration",
]
