"""Phase-adaptive multi-robot task allocation with validated reasoning."""

__version__ = "0.1.0"

from .model import (
    OperationalMode,
    RobotKind,
    SuccessMatrix,
    Task,
    TaskDataset,
    default_matrix,
    load_dataset,
    load_robot_config,
)
from .phase import (
    BalanceReport,
    Phase,
    PhaseState,
    Severity,
    StrategyWeights,
    WorkloadLedger,
    balance_score,
    compute_ledger,
    decide_severity,
    detect_phase,
    phase_weights,
)
from .capability import CapabilityScore, Scenario, load_scenario, rank_robots, success_rate
from .reasoning import (
    AllocationDecision,
    Confidence,
    TradeoffInput,
    decide_tradeoff,
    rule_reason,
)
from .responses import parse_response, render_decision
from .prompts import PromptBundle, build_prompt
from .validation import Criterion, ValidationReport, build_feedback, validate
from .workflow import (
    AllocationRun,
    FinalizedAllocation,
    RuleReasoner,
    RunSettings,
    ValidationStatus,
    run,
)
from .checkpoint import restore_checkpoint, write_checkpoint
from .evaluation import BenchmarkReport, SimulationResult, benchmark, expected_success, simulate

__all__ = [
    "AllocationDecision",
    "AllocationRun",
    "BalanceReport",
    "BenchmarkReport",
    "CapabilityScore",
    "Confidence",
    "Criterion",
    "FinalizedAllocation",
    "OperationalMode",
    "Phase",
    "PhaseState",
    "PromptBundle",
    "RobotKind",
    "RuleReasoner",
    "RunSettings",
    "Scenario",
    "Severity",
    "SimulationResult",
    "StrategyWeights",
    "SuccessMatrix",
    "Task",
    "TaskDataset",
    "TradeoffInput",
    "ValidationReport",
    "ValidationStatus",
    "WorkloadLedger",
    "balance_score",
    "benchmark",
    "build_feedback",
    "build_prompt",
    "compute_ledger",
    "decide_severity",
    "decide_tradeoff",
    "default_matrix",
    "detect_phase",
    "expected_success",
    "load_dataset",
    "load_robot_config",
    "load_scenario",
    "parse_response",
    "phase_weights",
    "rank_robots",
    "render_decision",
    "restore_checkpoint",
    "rule_reason",
    "run",
    "simulate",
    "success_rate",
    "validate",
    "write_checkpoint",
]
