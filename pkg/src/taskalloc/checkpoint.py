"""Checkpoint files: a JSON snapshot of the workflow state between tasks.

Restoring treats the stored history as the source of truth: workload
counts, balance score, and phase are recomputed from it and compared to
the values recorded at save time. Any disagreement is an integrity error
naming the first mismatched field, which blocks double counting and stale
phase bugs after a crash.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import CheckpointError, IntegrityError
from .model import OperationalMode, ROBOT_ORDER, SuccessMatrix, Task, TaskDataset
from .phase import balance_score, compute_ledger, detect_phase
from .workflow import WorkflowState, finalized_from_record, finalized_to_record

FORMAT_VERSION = 1


def _matrix_to_record(matrix: SuccessMatrix) -> dict:
    return {r.value: dict(matrix.entries[r]) for r in ROBOT_ORDER}


def _matrix_from_record(rec: dict) -> SuccessMatrix:
    by_name = {r.value: r for r in ROBOT_ORDER}
    try:
        entries = {by_name[k]: {f: float(v) for f, v in row.items()} for k, row in rec.items()}
    except KeyError as exc:
        raise CheckpointError(f"unknown robot in stored matrix: {exc}") from exc
    return SuccessMatrix(entries=entries)


def _dataset_to_record(dataset: TaskDataset) -> dict:
    return {
        "name": dataset.name,
        "tasks": [
            {
                "action_id": t.action_id,
                "action_name": t.action_name,
                "action_type": t.action_type,
                "features": list(t.features),
            }
            for t in dataset.tasks
        ],
    }


def _dataset_from_record(rec: dict) -> TaskDataset:
    tasks = tuple(
        Task(
            action_id=t["action_id"],
            action_name=t["action_name"],
            action_type=t["action_type"],
            features=tuple(t["features"]),
        )
        for t in rec["tasks"]
    )
    return TaskDataset(name=rec["name"], tasks=tasks)


def state_to_record(state: WorkflowState) -> dict:
    ledger = state.ledger()
    record = {
        "format_version": FORMAT_VERSION,
        "dataset": _dataset_to_record(state.dataset),
        "mode": state.mode.value,
        "matrix": _matrix_to_record(state.matrix),
        "queue_position": state.queue_position,
        "iteration_count": state.iteration_count,
        "retry_count": state.retry_count,
        "input_tokens": state.input_tokens,
        "output_tokens": state.output_tokens,
        "feedback_log": list(state.feedback_log),
        "history": [finalized_to_record(h) for h in state.history],
        # Derived values stored for the integrity cross-check on restore.
        "ledger_counts": {r.value: ledger.counts[r] for r in ROBOT_ORDER},
        "balance_score": balance_score(ledger).score,
        "phase": state.phase().phase.value,
    }
    return record


def write_checkpoint(state: WorkflowState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_record(state), sort_keys=True, indent=1) + "\n")


def restore_checkpoint(path: str | Path) -> WorkflowState:
    """Load and integrity-check a checkpoint.

    Raises CheckpointError for unreadable or structurally corrupt files and
    IntegrityError when stored derived values contradict the history.
    """
    path = Path(path)
    try:
        record = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(record, dict):
        raise CheckpointError(f"{path}: checkpoint must be a JSON object")
    version = record.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format_version {version!r}")

    required = (
        "dataset", "mode", "matrix", "queue_position", "iteration_count",
        "history", "ledger_counts", "balance_score", "phase",
    )
    for key in required:
        if key not in record:
            raise CheckpointError(f"{path}: missing field {key!r}")

    try:
        dataset = _dataset_from_record(record["dataset"])
        matrix = _matrix_from_record(record["matrix"])
        mode = OperationalMode(record["mode"])
        history = [finalized_from_record(h) for h in record["history"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint content: {exc}") from exc

    state = WorkflowState(
        dataset=dataset,
        mode=mode,
        matrix=matrix,
        queue_position=int(record["queue_position"]),
        history=history,
        retry_count=int(record.get("retry_count", 0)),
        iteration_count=int(record["iteration_count"]),
        feedback_log=list(record.get("feedback_log", [])),
        input_tokens=int(record.get("input_tokens", 0)),
        output_tokens=int(record.get("output_tokens", 0)),
    )
    _verify_integrity(state, record)
    return state


def _verify_integrity(state: WorkflowState, record: dict) -> None:
    total = state.dataset.total_count
    if len(state.history) > total:
        raise IntegrityError("history", f"history holds {len(state.history)} items for {total} tasks")
    if state.queue_position != len(state.history):
        raise IntegrityError(
            "queue_position",
            f"queue_position {state.queue_position} does not match {len(state.history)} finalized tasks",
        )

    counts = {r: 0 for r in ROBOT_ORDER}
    for item in state.history:
        counts[item.decision.chosen] += 1
    stored_counts = record["ledger_counts"]
    for robot in ROBOT_ORDER:
        stored = stored_counts.get(robot.value)
        if stored != counts[robot]:
            raise IntegrityError(
                "ledger_counts",
                f"stored count for {robot.value} is {stored}, history implies {counts[robot]}",
            )

    recomputed_balance = balance_score(compute_ledger(counts, total)).score
    if abs(recomputed_balance - float(record["balance_score"])) > 1e-9:
        raise IntegrityError(
            "balance_score",
            f"stored balance score {record['balance_score']} vs recomputed {recomputed_balance}",
        )

    recomputed_phase = detect_phase(len(state.history), total).phase.value
    if record["phase"] != recomputed_phase:
        raise IntegrityError(
            "phase", f"stored phase {record['phase']!r} vs recomputed {recomputed_phase!r}"
        )
