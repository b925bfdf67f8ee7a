"""Command-line entry point: allocate, bench, and resume subcommands.

Exit codes: 0 success (bench: including partial failures), 1 missing or
invalid input file, 2 recursion-limit abort (bench: every method failed),
3 fatal reasoner configuration error (a checkpoint is written first),
4 checkpoint integrity failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .capability import SCENARIO_NAMES, Scenario, load_scenario, scenario_config_path
from .baselines import RLConfig
from .errors import (
    CheckpointError,
    DatasetError,
    IntegrityError,
    ReasonerConfigError,
    RecursionLimitError,
)
from .evaluation import DEFAULT_SEED, DEFAULT_TRIALS, KNOWN_METHODS, benchmark
from .checkpoint import restore_checkpoint
from .model import OperationalMode, ROBOT_ORDER, TaskDataset, load_dataset
from .remote import RemoteModelConfig, RemoteReasoner
from .validation import DEFAULT_THRESHOLD
from .workflow import (
    AllocationRun,
    RuleReasoner,
    RunSettings,
    finalized_to_record,
    run,
    run_from_state,
)

BUNDLED_DATASET = "data/tasks_default_36.json"


def bundled_dataset_path() -> Path:
    return Path(str(resources.files("taskalloc").joinpath(BUNDLED_DATASET)))


def _config_digest(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _header(config: dict, seed: int) -> dict:
    return {
        "tool": "taskalloc",
        "version": __version__,
        "config_digest": _config_digest(config),
        "seed": seed,
    }


def _build_reasoner(args):
    if args.reasoner == "rule":
        return RuleReasoner()
    if not args.endpoint or not args.model:
        raise ReasonerConfigError("remote reasoner needs --endpoint and --model")
    return RemoteReasoner(
        RemoteModelConfig(
            endpoint=args.endpoint,
            model=args.model,
            temperature=args.temperature,
            credential_env=args.credential_env,
        )
    )


def _settings(args, checkpoint_path: str) -> RunSettings:
    return RunSettings(
        threshold=args.threshold,
        max_retries=args.max_retries,
        checkpoint_path=checkpoint_path,
    )


def _run_output(result: AllocationRun, header: dict, scenario: str) -> dict:
    return {
        "header": header,
        "mode": result.mode.value,
        "scenario": scenario,
        "history": [finalized_to_record(h) for h in result.history],
        "final_ledger": {r.value: result.final_ledger.counts[r] for r in ROBOT_ORDER},
        "final_balance": {
            "score": result.final_balance.score,
            "max_abs_deviation": result.final_balance.max_abs_deviation,
            "severity": result.final_balance.severity.value,
        },
        "iteration_count": result.iteration_count,
        "token_usage": {"input": result.input_tokens, "output": result.output_tokens},
        "fallback_count": result.fallback_count,
    }


def _write_json(path: str | None, record: dict) -> None:
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_inputs(args) -> tuple[TaskDataset, Scenario]:
    dataset_path = Path(args.dataset) if args.dataset else bundled_dataset_path()
    if not dataset_path.exists():
        raise FileNotFoundError(f"dataset file not found: {dataset_path}")
    dataset = load_dataset(dataset_path)
    scenario = load_scenario(args.scenario)
    return dataset, scenario


def _load_rl_config(args) -> RLConfig:
    if not getattr(args, "rl_config", None):
        return RLConfig(seed=args.seed)
    raw = json.loads(Path(args.rl_config).read_text())
    if not isinstance(raw, dict):
        raise DatasetError(f"{args.rl_config}: expected a JSON object of RL settings")
    raw.setdefault("seed", args.seed)
    if "hidden_widths" in raw:
        raw["hidden_widths"] = tuple(raw["hidden_widths"])
    try:
        return RLConfig(**raw)
    except TypeError as exc:
        raise DatasetError(f"{args.rl_config}: {exc}") from exc


def cmd_allocate(args) -> int:
    try:
        dataset, scenario = _load_inputs(args)
    except (FileNotFoundError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    checkpoint_path = args.checkpoint or (args.out or "allocation") + ".checkpoint.json"
    config = {
        "command": "allocate",
        "dataset": str(args.dataset or "bundled"),
        "scenario": args.scenario,
        "mode": args.mode,
        "reasoner": args.reasoner,
        "threshold": args.threshold,
        "max_retries": args.max_retries,
        "seed": args.seed,
    }
    try:
        reasoner = _build_reasoner(args)
        result = run(
            dataset,
            OperationalMode(args.mode),
            scenario.matrix,
            reasoner,
            _settings(args, checkpoint_path),
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RecursionLimitError as exc:
        print(f"error: recursion limit: {exc} (state: {exc.state_dump})", file=sys.stderr)
        return 2
    except ReasonerConfigError as exc:
        print(
            f"error: reasoner configuration: {exc} (checkpoint: {checkpoint_path})",
            file=sys.stderr,
        )
        return 3
    _write_json(args.out, _run_output(result, _header(config, args.seed), args.scenario))
    print(
        f"allocated {len(result.history)} tasks ({result.fallback_count} fallbacks) "
        f"in {result.elapsed_seconds:.2f}s",
        file=sys.stderr,
    )
    return 0


def cmd_bench(args) -> int:
    try:
        dataset, scenario = _load_inputs(args)
    except (FileNotFoundError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    modes = tuple(OperationalMode(m.strip()) for m in args.modes.split(",") if m.strip())
    config = {
        "command": "bench",
        "dataset": str(args.dataset or "bundled"),
        "scenario": args.scenario,
        "methods": list(methods),
        "modes": [m.value for m in modes],
        "threshold": args.threshold,
        "max_retries": args.max_retries,
        "seed": args.seed,
        "trials": args.trials,
        "rl_config": args.rl_config,
    }
    try:
        report = benchmark(
            dataset,
            scenario.matrix,
            methods=methods,
            modes=modes,
            trials=args.trials,
            seed=args.seed,
            reasoner=_build_reasoner(args),
            settings=RunSettings(threshold=args.threshold, max_retries=args.max_retries),
            rl_config=_load_rl_config(args),
            scenario=args.scenario,
        )
    except (ValueError, DatasetError, ReasonerConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    record = report.to_record()
    record["header"] = _header(config, args.seed)
    record["scenario_config"] = scenario_config_path(args.scenario).name
    _write_json(args.out, record)
    print(report.to_table(), file=sys.stderr)
    if all(row.error for row in report.rows):
        return 2
    return 0


def cmd_resume(args) -> int:
    try:
        state = restore_checkpoint(args.checkpoint)
    except IntegrityError as exc:
        print(f"error: checkpoint integrity ({exc.field}): {exc}", file=sys.stderr)
        return 4
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    config = {
        "command": "resume",
        "checkpoint": str(args.checkpoint),
        "reasoner": args.reasoner,
        "threshold": args.threshold,
        "max_retries": args.max_retries,
        "seed": args.seed,
    }
    if state.queue_position >= state.dataset.total_count:
        print("checkpoint is already complete; nothing to resume", file=sys.stderr)
        return 0
    try:
        reasoner = _build_reasoner(args)
        result = run_from_state(state, reasoner, _settings(args, str(args.checkpoint)))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RecursionLimitError as exc:
        print(f"error: recursion limit: {exc}", file=sys.stderr)
        return 2
    except ReasonerConfigError as exc:
        print(
            f"error: reasoner configuration: {exc} (checkpoint: {args.checkpoint})",
            file=sys.stderr,
        )
        return 3
    _write_json(args.out, _run_output(result, _header(config, args.seed), "checkpoint"))
    print(f"resumed and completed {len(result.history)} tasks", file=sys.stderr)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", help="task dataset JSON (default: bundled 36-task set)")
    parser.add_argument("--scenario", default="default", choices=SCENARIO_NAMES)
    parser.add_argument(
        "--mode",
        default=OperationalMode.BALANCED.value,
        choices=[m.value for m in OperationalMode],
    )
    parser.add_argument("--reasoner", default="rule", choices=["rule", "remote"])
    parser.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    parser.add_argument("--max-retries", type=int, default=3)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--checkpoint", help="checkpoint file path")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--endpoint", help="remote reasoner endpoint URL")
    parser.add_argument("--model", help="remote model identifier")
    parser.add_argument("--temperature", type=float, default=0.1)
    parser.add_argument(
        "--credential-env",
        help="name of the environment variable holding the endpoint credential",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taskalloc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"taskalloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_alloc = sub.add_parser("allocate", help="run the allocation workflow over a dataset")
    _add_common(p_alloc)

    p_bench = sub.add_parser("bench", help="compare allocation methods on one dataset")
    _add_common(p_bench)
    p_bench.add_argument(
        "--methods",
        default="workflow,greedy,dp",
        help=f"comma-separated subset of {','.join(KNOWN_METHODS)}",
    )
    p_bench.add_argument(
        "--modes",
        default=OperationalMode.BALANCED.value,
        help="comma-separated operational modes for the workflow rows",
    )
    p_bench.add_argument(
        "--rl-config",
        help="JSON file overriding RL hyperparameters (episodes, learning_rate, ...)",
    )

    p_resume = sub.add_parser("resume", help="restore a checkpoint and finish the run")
    _add_common(p_resume)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "allocate":
        return cmd_allocate(args)
    if args.command == "bench":
        return cmd_bench(args)
    if args.command == "resume":
        if not args.checkpoint:
            print("error: resume requires --checkpoint", file=sys.stderr)
            return 1
        return cmd_resume(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())
