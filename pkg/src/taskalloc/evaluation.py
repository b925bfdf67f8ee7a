"""Stochastic execution simulation and the cross-method benchmark report.

Expected success is the analytic mean of the assigned robots' rates; the
Monte Carlo simulator realizes the same probabilities with seeded Bernoulli
draws so both views of every method can be reported side by side.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .capability import success_rate
from .baselines import RLConfig, brute_force, dp_balanced, dqn, greedy, q_learning
from .baselines.exact import BRUTE_FORCE_CAP
from .baselines.greedy import Assignment
from .model import FEATURES, OperationalMode, ROBOT_ORDER, RobotKind, SuccessMatrix, TaskDataset
from .phase import balance_score, compute_ledger
from .workflow import (
    AllocationRun,
    ReasonerBackend,
    RuleReasoner,
    RunSettings,
    ValidationStatus,
    run,
)

DEFAULT_TRIALS = 10_000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class SimulationResult:
    trials: int
    overall_success: float
    standard_error: float
    per_feature_success: dict[str, float]
    per_task_success: dict[int, float]


def expected_success(assignment: Assignment, dataset: TaskDataset, matrix: SuccessMatrix) -> float:
    """Mean over tasks of the assigned robot's aggregate rate (0 if empty)."""
    if dataset.total_count == 0:
        return 0.0
    total = sum(
        success_rate(task, assignment[task.action_id], matrix).success_rate for task in dataset
    )
    return total / dataset.total_count


def simulate(
    assignment: Assignment,
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
) -> SimulationResult:
    """Monte Carlo realization: every trial draws one success sample per task.

    Seeded and reproducible. A multi-feature task contributes to each of its
    features' pools in the per-feature breakdown.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    n = dataset.total_count
    rng = np.random.default_rng(seed)
    if n == 0:
        return SimulationResult(trials, 0.0, 0.0, {}, {})

    rates = np.array(
        [success_rate(t, assignment[t.action_id], matrix).success_rate for t in dataset]
    )
    draws = rng.random((trials, n)) < rates  # (trials, tasks)
    per_task = draws.mean(axis=0)
    pooled = float(draws.mean())
    se = math.sqrt(max(pooled * (1.0 - pooled), 0.0) / trials)

    # Only features carried by at least one task appear in the breakdown.
    per_feature: dict[str, float] = {}
    for feat in FEATURES:
        cols = [i for i, t in enumerate(dataset) if feat in t.features]
        if cols:
            per_feature[feat] = float(draws[:, cols].mean())

    return SimulationResult(
        trials=trials,
        overall_success=pooled,
        standard_error=se,
        per_feature_success=per_feature,
        per_task_success={t.action_id: float(per_task[i]) for i, t in enumerate(dataset)},
    )


@dataclass(frozen=True)
class MethodResult:
    method: str
    mode: str | None
    assignment: Assignment | None
    expected: float | None
    simulated: float | None
    simulated_se: float | None
    per_feature: dict[str, float] = field(default_factory=dict)
    workload: dict[RobotKind, int] = field(default_factory=dict)
    final_balance: float | None = None
    max_abs_deviation: float | None = None
    runtime_seconds: float | None = None
    input_tokens: int | None = None
    output_tokens: int | None = None
    fallback_count: int | None = None
    # Fallback accounting: estimate basis scores fallbacks at the flat 0.50
    # estimate, matrix basis at the fallback robot's true rate. They coincide
    # when no fallbacks occurred.
    expected_estimate_basis: float | None = None
    error: str | None = None

    @property
    def label(self) -> str:
        return f"{self.method}[{self.mode}]" if self.mode else self.method


@dataclass(frozen=True)
class BenchmarkReport:
    dataset_name: str
    scenario: str
    trials: int
    seed: int
    rows: tuple[MethodResult, ...]

    def to_record(self, include_volatile: bool = False) -> dict:
        """Machine-readable form. Wall-clock runtimes are volatile and are
        omitted unless explicitly requested, so identical configurations
        produce byte-identical reports."""
        rows = []
        for r in self.rows:
            row = {
                "method": r.method,
                "mode": r.mode,
                "expected": r.expected,
                "simulated": r.simulated,
                "simulated_se": r.simulated_se,
                "per_feature": r.per_feature,
                "workload": {k.value: v for k, v in r.workload.items()},
                "final_balance": r.final_balance,
                "max_abs_deviation": r.max_abs_deviation,
                "input_tokens": r.input_tokens,
                "output_tokens": r.output_tokens,
                "fallback_count": r.fallback_count,
                "expected_estimate_basis": r.expected_estimate_basis,
                "assignment": {str(k): v.value for k, v in (r.assignment or {}).items()} or None,
                "error": r.error,
            }
            if include_volatile:
                row["runtime_seconds"] = r.runtime_seconds
            rows.append(row)
        return {
            "dataset": self.dataset_name,
            "scenario": self.scenario,
            "trials": self.trials,
            "seed": self.seed,
            "rows": rows,
        }

    def to_table(self) -> str:
        """Aligned human-readable summary, runtimes included."""
        headers = ("method", "expected", "simulated", "balance", "L/M/H", "runtime", "tokens", "error")
        lines = []
        for r in self.rows:
            if r.error:
                lines.append((r.label, "-", "-", "-", "-", "-", "-", r.error))
                continue
            wl = "/".join(str(r.workload[k]) for k in ROBOT_ORDER)
            tokens = (
                f"{r.input_tokens + r.output_tokens}"
                if r.input_tokens is not None
                else "-"
            )
            lines.append(
                (
                    r.label,
                    f"{r.expected:.4f}",
                    f"{r.simulated:.4f}±{r.simulated_se:.4f}",
                    f"{r.final_balance:.1f}",
                    wl,
                    f"{r.runtime_seconds:.2f}s" if r.runtime_seconds is not None else "-",
                    tokens,
                    "",
                )
            )
        widths = [max(len(h), *(len(row[i]) for row in lines)) if lines else len(h)
                  for i, h in enumerate(headers)]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        out = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
        out += [fmt.format(*row) for row in lines]
        return "\n".join(out)


def _workload_of(assignment: Assignment) -> dict[RobotKind, int]:
    counts = {r: 0 for r in ROBOT_ORDER}
    for robot in assignment.values():
        counts[robot] += 1
    return counts


def _workflow_row(
    name: str,
    mode: OperationalMode,
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    reasoner: ReasonerBackend,
    settings: RunSettings,
    trials: int,
    seed: int,
) -> MethodResult:
    started = time.monotonic()
    result: AllocationRun = run(dataset, mode, matrix, reasoner, settings)
    elapsed = time.monotonic() - started
    assignment = result.assignment
    exp = expected_success(assignment, dataset, matrix)
    sim = simulate(assignment, dataset, matrix, trials, seed)
    # Estimate basis replaces fallback tasks' matrix rates with the flat 0.50.
    per_task = []
    for item in result.history:
        if item.validation_status is ValidationStatus.FALLBACK:
            per_task.append(0.50)
        else:
            task = next(t for t in dataset if t.action_id == item.decision.task_id)
            per_task.append(success_rate(task, item.decision.chosen, matrix).success_rate)
    estimate_basis = sum(per_task) / len(per_task) if per_task else 0.0
    wl = _workload_of(assignment)
    bal = balance_score(compute_ledger(wl, dataset.total_count))
    return MethodResult(
        method=name,
        mode=mode.value,
        assignment=assignment,
        expected=exp,
        simulated=sim.overall_success,
        simulated_se=sim.standard_error,
        per_feature=sim.per_feature_success,
        workload=wl,
        final_balance=bal.score,
        max_abs_deviation=bal.max_abs_deviation,
        runtime_seconds=elapsed,
        input_tokens=result.input_tokens,
        output_tokens=result.output_tokens,
        fallback_count=result.fallback_count,
        expected_estimate_basis=estimate_basis,
    )


def _assignment_row(
    name: str,
    assignment: Assignment,
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    trials: int,
    seed: int,
    elapsed: float,
) -> MethodResult:
    exp = expected_success(assignment, dataset, matrix)
    sim = simulate(assignment, dataset, matrix, trials, seed)
    wl = _workload_of(assignment)
    bal = balance_score(compute_ledger(wl, dataset.total_count))
    return MethodResult(
        method=name,
        mode=None,
        assignment=assignment,
        expected=exp,
        simulated=sim.overall_success,
        simulated_se=sim.standard_error,
        per_feature=sim.per_feature_success,
        workload=wl,
        final_balance=bal.score,
        max_abs_deviation=bal.max_abs_deviation,
        runtime_seconds=elapsed,
        expected_estimate_basis=exp,
    )


KNOWN_METHODS = ("workflow", "greedy", "dp", "brute", "qlearning", "dqn")


def benchmark(
    dataset: TaskDataset,
    matrix: SuccessMatrix,
    methods: tuple[str, ...] = ("workflow", "greedy", "dp"),
    modes: tuple[OperationalMode, ...] = (OperationalMode.BALANCED,),
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    reasoner: ReasonerBackend | None = None,
    settings: RunSettings = RunSettings(),
    rl_config: RLConfig | None = None,
    scenario: str = "default",
) -> BenchmarkReport:
    """Run the requested methods and collect one comparable row per run.

    A method failure is recorded as a failed row; the others still report.
    """
    for m in methods:
        if m not in KNOWN_METHODS:
            raise ValueError(f"unknown method {m!r}; known: {KNOWN_METHODS}")
    reasoner = reasoner or RuleReasoner()
    rl = rl_config or RLConfig(seed=seed)
    rows: list[MethodResult] = []

    for method in methods:
        if method == "workflow":
            for mode in modes:
                try:
                    rows.append(
                        _workflow_row("workflow", mode, dataset, matrix, reasoner, settings, trials, seed)
                    )
                except Exception as exc:
                    rows.append(_failed_row("workflow", mode.value, exc))
            continue
        started = time.monotonic()
        try:
            if method == "greedy":
                assignment = greedy(dataset, matrix)
            elif method == "dp":
                assignment = dp_balanced(dataset, matrix, _balanced_capacities(dataset))
            elif method == "brute":
                if dataset.total_count > BRUTE_FORCE_CAP:
                    raise ValueError(
                        f"brute force capped at {BRUTE_FORCE_CAP} tasks, dataset has "
                        f"{dataset.total_count}"
                    )
                assignment = brute_force(dataset, matrix)
            elif method == "qlearning":
                _, assignment = q_learning(dataset, matrix, rl)
            else:  # dqn
                _, assignment = dqn(dataset, matrix, rl)
        except Exception as exc:
            rows.append(_failed_row(method, None, exc))
            continue
        elapsed = time.monotonic() - started
        rows.append(_assignment_row(method, assignment, dataset, matrix, trials, seed, elapsed))

    return BenchmarkReport(
        dataset_name=dataset.name,
        scenario=scenario,
        trials=trials,
        seed=seed,
        rows=tuple(rows),
    )


def _balanced_capacities(dataset: TaskDataset) -> dict[RobotKind, int]:
    """Even capacities mirroring the target load; remainders go in robot order."""
    n = dataset.total_count
    base, extra = divmod(n, len(ROBOT_ORDER))
    return {r: base + (1 if i < extra else 0) for i, r in enumerate(ROBOT_ORDER)}


def _failed_row(method: str, mode: str | None, exc: Exception) -> MethodResult:
    return MethodResult(
        method=method,
        mode=mode,
        assignment=None,
        expected=None,
        simulated=None,
        simulated_se=None,
        error=f"{type(exc).__name__}: {exc}",
    )
