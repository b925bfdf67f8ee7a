"""A minimal deep Q-network built from first principles on numpy.

Two hidden ReLU layers, squared TD loss, plain SGD, uniform replay, and a
periodically synced target network. No learning framework: forward pass,
backprop, and the update rule are spelled out so the gradients can be
checked against finite differences.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..model import ROBOT_ORDER, SuccessMatrix, TaskDataset
from ..errors import DivergenceError
from .greedy import Assignment
from .mdp import AllocationMDP, RLConfig, State

N_ACTIONS = len(ROBOT_ORDER)
INPUT_DIM = 7  # 3 feature indicators + 3 normalized workloads + progress ratio

Params = dict[str, np.ndarray]


def encode_state(mdp: AllocationMDP, state: State) -> np.ndarray:
    i, counts = state
    task = mdp.dataset.tasks[i]
    feat = [1.0 if f in task.features else 0.0 for f in ("careful", "dexterous", "heavy")]
    loads = [c / mdp.n for c in counts]
    return np.array(feat + loads + [i / mdp.n], dtype=np.float64)


def init_params(rng: np.random.Generator, hidden: tuple[int, int]) -> Params:
    h1, h2 = hidden
    # He initialization for the ReLU layers.
    return {
        "W1": rng.normal(0.0, np.sqrt(2.0 / INPUT_DIM), size=(INPUT_DIM, h1)),
        "b1": np.zeros(h1),
        "W2": rng.normal(0.0, np.sqrt(2.0 / h1), size=(h1, h2)),
        "b2": np.zeros(h2),
        "W3": rng.normal(0.0, np.sqrt(2.0 / h2), size=(h2, N_ACTIONS)),
        "b3": np.zeros(N_ACTIONS),
    }


def forward(params: Params, x: np.ndarray) -> np.ndarray:
    """Q-values for a batch of encoded states, shape (B, 3)."""
    z1 = x @ params["W1"] + params["b1"]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params["W2"] + params["b2"]
    a2 = np.maximum(z2, 0.0)
    return a2 @ params["W3"] + params["b3"]


def td_loss(params: Params, x: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> float:
    q = forward(params, x)[np.arange(len(actions)), actions]
    return float(np.mean((q - targets) ** 2))


def td_loss_grad(
    params: Params, x: np.ndarray, actions: np.ndarray, targets: np.ndarray
) -> tuple[float, Params]:
    """Loss and its analytic gradient with respect to every parameter."""
    batch = len(actions)
    z1 = x @ params["W1"] + params["b1"]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params["W2"] + params["b2"]
    a2 = np.maximum(z2, 0.0)
    out = a2 @ params["W3"] + params["b3"]

    q = out[np.arange(batch), actions]
    diff = q - targets
    loss = float(np.mean(diff**2))

    dout = np.zeros_like(out)
    dout[np.arange(batch), actions] = 2.0 * diff / batch
    grads: Params = {}
    grads["W3"] = a2.T @ dout
    grads["b3"] = dout.sum(axis=0)
    da2 = dout @ params["W3"].T
    dz2 = da2 * (z2 > 0.0)
    grads["W2"] = a1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    da1 = dz2 @ params["W2"].T
    dz1 = da1 * (z1 > 0.0)
    grads["W1"] = x.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


class ReplayBuffer:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self.items: list[tuple] = []
        self.position = 0

    def push(self, transition: tuple) -> None:
        if len(self.items) < self.capacity:
            self.items.append(transition)
        else:
            self.items[self.position] = transition
        self.position = (self.position + 1) % self.capacity

    def sample(self, rng: np.random.Generator, batch_size: int) -> list[tuple]:
        idx = rng.choice(len(self.items), size=batch_size, replace=False)
        return [self.items[i] for i in idx]

    def __len__(self) -> int:
        return len(self.items)


def dqn(
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    config: RLConfig,
) -> tuple[Params, Assignment]:
    """Train the network and return (parameters, greedy-rollout assignment).

    Raises DivergenceError if the TD loss ever goes non-finite.
    """
    mdp = AllocationMDP(dataset, matrix, balance_weight=config.balance_weight)
    rng = np.random.default_rng(config.seed)
    params = init_params(rng, config.hidden_widths)
    target_params = {k: v.copy() for k, v in params.items()}
    buffer = ReplayBuffer(config.replay_capacity)
    train_steps = 0

    for episode in range(config.episodes):
        epsilon = config.epsilon_at(episode)
        state = mdp.initial_state
        while not mdp.is_terminal(state):
            x = encode_state(mdp, state)
            if rng.random() < epsilon:
                action = int(rng.integers(N_ACTIONS))
            else:
                action = int(np.argmax(forward(params, x[None, :])[0]))
            reward = 1.0 if rng.random() < mdp.rates[state[0]][action] else 0.0
            nxt = mdp.next_state(state, action)
            done = mdp.is_terminal(nxt)
            if done:
                reward += mdp.terminal_bonus(nxt[1])
                buffer.push((x, action, reward, None))
            else:
                buffer.push((x, action, reward, encode_state(mdp, nxt)))
            state = nxt

            if len(buffer) < config.batch_size:
                continue
            batch = buffer.sample(rng, config.batch_size)
            xs = np.stack([b[0] for b in batch])
            actions = np.array([b[1] for b in batch], dtype=np.intp)
            rewards = np.array([b[2] for b in batch])
            targets = rewards.copy()
            live = [i for i, b in enumerate(batch) if b[3] is not None]
            if live:
                next_x = np.stack([batch[i][3] for i in live])
                next_q = forward(target_params, next_x).max(axis=1)
                targets[live] += config.discount * next_q
            loss, grads = td_loss_grad(params, xs, actions, targets)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite TD loss at episode {episode}, step {train_steps}: "
                    f"loss={loss}, |W1|={np.abs(params['W1']).max():.3g}"
                )
            for key in params:
                params[key] -= config.learning_rate * grads[key]
            train_steps += 1
            if train_steps % config.target_sync == 0:
                target_params = {k: v.copy() for k, v in params.items()}

    actions_taken: list[int] = []
    state = mdp.initial_state
    while not mdp.is_terminal(state):
        x = encode_state(mdp, state)
        actions_taken.append(int(np.argmax(forward(params, x[None, :])[0])))
        state = mdp.next_state(state, actions_taken[-1])
    return params, mdp.assignment_from_actions(actions_taken)


def greedy_network_policy(mdp: AllocationMDP, params: Params):
    """Wrap trained parameters as a deterministic policy for evaluation."""

    def policy(state: State) -> int:
        return int(np.argmax(forward(params, encode_state(mdp, state)[None, :])[0]))

    return policy


def dump_network(params: Params, path) -> None:
    """Write the network weights to a JSON file for inspection."""
    record = {key: value.tolist() for key, value in sorted(params.items())}
    Path(path).write_text(json.dumps(record, indent=1) + "\n")


def load_network(path) -> Params:
    record = json.loads(Path(path).read_text())
    return {key: np.asarray(value, dtype=np.float64) for key, value in record.items()}
