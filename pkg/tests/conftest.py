from __future__ import annotations

import pytest

from taskalloc.cli import bundled_dataset_path
from taskalloc.model import RobotKind, Task, TaskDataset, default_matrix, load_dataset


@pytest.fixture(scope="session")
def matrix():
    return default_matrix()


@pytest.fixture(scope="session")
def bundled_dataset():
    return load_dataset(bundled_dataset_path())


def make_task(action_id=0, name="Stop", kind="Motion", features=("dexterous",)):
    return Task(action_id=action_id, action_name=name, action_type=kind, features=tuple(features))


@pytest.fixture
def toy6_dataset():
    """Small mixed-feature instance used by the RL baseline tests."""
    tasks = (
        make_task(0, "Stop", "Motion", ("dexterous",)),
        make_task(1, "Pickup Beam", "Handling", ("heavy",)),
        make_task(2, "Pour Sealant", "Manipulation", ("careful",)),
        make_task(3, "Open Crate", "Handling", ("careful", "heavy")),
        make_task(4, "Slice Material", "Manipulation", ("dexterous", "careful")),
        make_task(5, "Place Block", "Placement", ("heavy",)),
    )
    return TaskDataset("toy6", tasks)


def counts(light=0, medium=0, heavy=0):
    return {RobotKind.LIGHT: light, RobotKind.MEDIUM: medium, RobotKind.HEAVY: heavy}
