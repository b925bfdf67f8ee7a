"""Core domain types: tasks, robots, success matrices, operational modes.

Everything here is immutable after construction and safe to share between
threads or processes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DatasetError

# Canonical capability feature names, in display order.
FEATURES = ("careful", "dexterous", "heavy")


class RobotKind(Enum):
    """The three robot classes and their specialization labels."""

    LIGHT = "light"
    MEDIUM = "medium"
    HEAVY = "heavy"

    @property
    def specialization(self) -> str:
        return _SPECIALIZATIONS[self]

    @property
    def display_name(self) -> str:
        return self.value.capitalize() + " Robot"


_SPECIALIZATIONS = {
    RobotKind.LIGHT: "Precision Specialist",
    RobotKind.MEDIUM: "Balanced Generalist",
    RobotKind.HEAVY: "Force Specialist",
}

# Fixed robot order used for deterministic tie-breaking everywhere.
ROBOT_ORDER = (RobotKind.LIGHT, RobotKind.MEDIUM, RobotKind.HEAVY)


class OperationalMode(Enum):
    """Allocation philosophy selecting the success-vs-balance weighting."""

    SUCCESS_FOCUSED = "success-focused"
    BALANCED = "balanced"
    AGGRESSIVE_BALANCE = "aggressive-balance"

    @property
    def display_name(self) -> str:
        return self.value.replace("-", "_").upper()


def canonical_feature(name: str) -> str:
    """Lowercase a feature name, rejecting anything outside the known set."""
    feat = name.strip().lower()
    if feat not in FEATURES:
        raise DatasetError(f"unknown feature name: {name!r} (expected one of {FEATURES})")
    return feat


@dataclass(frozen=True)
class Task:
    """One allocatable action.

    `features` is an ordered, duplicate-free tuple of canonical feature
    names; `action_type` is carried for provenance but never consulted by
    allocation logic.
    """

    action_id: int
    action_name: str
    action_type: str
    features: tuple[str, ...]

    def __post_init__(self):
        if self.action_id < 0:
            raise DatasetError(f"action_id must be non-negative, got {self.action_id}")
        if not self.features:
            raise DatasetError(f"task {self.action_id} ({self.action_name!r}): features must be non-empty")
        canon = tuple(canonical_feature(f) for f in self.features)
        if len(set(canon)) != len(canon):
            raise DatasetError(f"task {self.action_id}: duplicate features in {self.features}")
        object.__setattr__(self, "features", canon)


@dataclass(frozen=True)
class TaskDataset:
    """An ordered task list; order is the processing order."""

    name: str
    tasks: tuple[Task, ...]

    @property
    def total_count(self) -> int:
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self):
        return len(self.tasks)


@dataclass(frozen=True)
class SuccessMatrix:
    """Per-feature, per-robot success probabilities.

    `entries` maps robot -> feature -> probability; every (feature, robot)
    pair must be present with a value in [0, 1].
    """

    entries: dict[RobotKind, dict[str, float]]

    def __post_init__(self):
        for robot in ROBOT_ORDER:
            row = self.entries.get(robot)
            if row is None:
                raise DatasetError(f"success matrix missing robot {robot.value!r}")
            for feat in FEATURES:
                if feat not in row:
                    raise DatasetError(f"success matrix missing pair ({feat!r}, {robot.value!r})")
                p = row[feat]
                if not (0.0 <= p <= 1.0):
                    raise DatasetError(
                        f"success matrix entry ({feat!r}, {robot.value!r}) = {p} outside [0, 1]"
                    )

    def rate(self, feature: str, robot: RobotKind) -> float:
        return self.entries[robot][feature]

    def row(self, robot: RobotKind) -> dict[str, float]:
        return dict(self.entries[robot])


def default_matrix() -> SuccessMatrix:
    """The built-in success matrix used when no robot config is supplied."""
    return SuccessMatrix(
        entries={
            RobotKind.LIGHT: {"careful": 0.90, "dexterous": 0.80, "heavy": 0.50},
            RobotKind.MEDIUM: {"careful": 0.70, "dexterous": 0.60, "heavy": 0.70},
            RobotKind.HEAVY: {"careful": 0.50, "dexterous": 0.40, "heavy": 0.90},
        }
    )


def _task_from_record(index: int, rec: object) -> Task:
    if not isinstance(rec, dict):
        raise DatasetError(f"record {index}: expected an object, got {type(rec).__name__}")
    for field in ("action_id", "action_name", "action_type", "features"):
        if field not in rec:
            raise DatasetError(f"record {index}: missing field {field!r}")
    if not isinstance(rec["action_id"], int) or isinstance(rec["action_id"], bool):
        raise DatasetError(f"record {index}: field 'action_id' must be an integer")
    if not isinstance(rec["action_name"], str):
        raise DatasetError(f"record {index}: field 'action_name' must be a string")
    if not isinstance(rec["action_type"], str):
        raise DatasetError(f"record {index}: field 'action_type' must be a string")
    feats = rec["features"]
    if not isinstance(feats, list) or not all(isinstance(f, str) for f in feats):
        raise DatasetError(f"record {index}: field 'features' must be an array of strings")
    return Task(
        action_id=rec["action_id"],
        action_name=rec["action_name"],
        action_type=rec["action_type"],
        features=tuple(feats),
    )


def load_dataset(path: str | Path) -> TaskDataset:
    """Load a task dataset from a JSON file (a list of task records)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise DatasetError(f"{path}: expected a top-level list of task records")
    tasks = [_task_from_record(i, rec) for i, rec in enumerate(raw)]
    seen: set[int] = set()
    for task in tasks:
        if task.action_id in seen:
            raise DatasetError(f"{path}: duplicate action_id {task.action_id}")
        seen.add(task.action_id)
    return TaskDataset(name=path.stem, tasks=tuple(tasks))


def dump_dataset(dataset: TaskDataset, path: str | Path) -> None:
    """Write a dataset back to the JSON record format accepted by load_dataset."""
    records = [
        {
            "action_id": t.action_id,
            "action_name": t.action_name,
            "action_type": t.action_type,
            "features": list(t.features),
        }
        for t in dataset.tasks
    ]
    Path(path).write_text(json.dumps(records, indent=2) + "\n")


def load_robot_config(path: str | Path | None) -> SuccessMatrix:
    """Load a robot success-rate config, merged entry-by-entry over the default.

    `None` or a missing file returns the built-in default matrix. Records are
    robot name -> {feature -> probability}; keys starting with "_" are
    ignored so config files can carry notes.
    """
    base = default_matrix()
    if path is None:
        return base
    path = Path(path)
    if not path.exists():
        return base
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DatasetError(f"{path}: expected an object of robot records")
    entries = {robot: dict(base.entries[robot]) for robot in ROBOT_ORDER}
    names = {r.value: r for r in ROBOT_ORDER}
    for key, row in raw.items():
        if key.startswith("_"):
            continue
        robot = names.get(key.strip().lower())
        if robot is None:
            raise DatasetError(f"{path}: unknown robot name {key!r}")
        if not isinstance(row, dict):
            raise DatasetError(f"{path}: robot {key!r}: expected a feature->probability object")
        for feat_name, value in row.items():
            feat = canonical_feature(feat_name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DatasetError(f"{path}: entry ({feat!r}, {key!r}) must be a number")
            entries[robot][feat] = float(value)
    return SuccessMatrix(entries=entries)
