"""Exception hierarchy shared across the package."""


class TaskAllocError(Exception):
    """Base class for all package-specific errors."""


class DatasetError(TaskAllocError):
    """A dataset or robot-config file is malformed or violates an invariant."""


class ResponseParseError(TaskAllocError):
    """A reasoner response could not be parsed into a decision.

    `reason` is a short machine-checkable code ("no decision", "bad success
    rate", "unknown robot", "no confidence"); parse failures feed back into
    the retry loop instead of crashing the run.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class TransportError(TaskAllocError):
    """Remote reasoner call failed at the transport level (retryable)."""


class EmptyResponseError(TaskAllocError):
    """Remote reasoner returned an empty completion (retryable)."""


class ReasonerConfigError(TaskAllocError):
    """Remote reasoner is misconfigured (bad credentials, persistent outage);
    the run aborts instead of retrying."""


class RecursionLimitError(TaskAllocError):
    """The workflow exceeded its iteration budget; carries a state dump."""

    def __init__(self, message: str, state_dump: dict):
        self.state_dump = state_dump
        super().__init__(message)


class CheckpointError(TaskAllocError):
    """A checkpoint file is unreadable or structurally corrupt."""


class IntegrityError(CheckpointError):
    """A restored checkpoint contradicts values recomputed from its history.

    `field` names the first mismatching field.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(message)


class DivergenceError(TaskAllocError):
    """A training loop produced a non-finite loss."""
