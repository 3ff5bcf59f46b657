"""
Command-Line Interface
optimize, run, analyze-theorems and validate-config subcommands
"""

import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

import pandas as pd

from src import __version__
from src.cli.output import (
    steps_frame,
    write_apv,
    write_metadata,
    write_results,
    write_tables,
    write_trace,
    write_traces,
)
from src.core.config import Settings, load_config, serialize_config, with_seed
from src.core.errors import (
    ConfigError,
    ErrorCategory,
    ToMAError,
    error_handler,
    error_handler_decorator,
    log_info,
)
from src.core.models import ExperimentKind, ExperimentSpec
from src.optimization.objective import ErgodicRateEvaluator
from src.optimization.riemannian import optimize
from src.simulation.experiments import KIND_STREAMS, base_scenario, run_experiment
from src.simulation.scenarios import experiment_rng, generate_realizations, initial_geometry
from src.simulation.theorems import analyze_theorems

# realization stream for the standalone optimize command, distinct from every experiment kind
OPTIMIZE_STREAM = len(KIND_STREAMS)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _threads(value: str) -> int:
    threads = int(value)
    if threads < 1:
        raise argparse.ArgumentTypeError("threads must be at least 1")
    return threads


def build_parser() -> argparse.ArgumentParser:
    settings = Settings()
    parser = argparse.ArgumentParser(
        prog="toma-sim",
        description="Towed movable antenna array geometry optimization and secrecy-rate simulation",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON experiment config (defaults if omitted)")
    common.add_argument("--seed", type=_seed, default=None, help="Override scenario.seed")
    common.add_argument("--out", type=Path, default=settings.output_dir, help="Output directory")
    common.add_argument("--threads", type=_threads, default=settings.threads, help="Worker threads")
    common.add_argument(
        "--deterministic", action="store_true", help="Single-threaded evaluation and byte-stable CSV output"
    )
    common.add_argument("--progress", action="store_true", help="Show a progress bar over sweep cells")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="Optimize the array geometry for one scenario")
    sub.add_parser("run", parents=[common], help="Run the configured experiment sweep")
    sub.add_parser("analyze-theorems", parents=[common], help="Closed-form versus brute-force correlation tables")
    validate = sub.add_parser("validate-config", help="Check a config file and print the resolved config")
    validate.add_argument("--config", type=Path, required=True, help="JSON experiment config")
    return parser


def _load(args: argparse.Namespace) -> ExperimentSpec:
    return with_seed(load_config(args.config), args.seed)


@error_handler_decorator(ErrorCategory.EXPERIMENT_ERROR)
def cmd_optimize(args: argparse.Namespace) -> int:
    """Optimize one scenario; writes apv.csv, trace.csv, steps.csv and metadata.json"""
    spec = _load(args)
    sc = base_scenario(spec)
    start = time.perf_counter()

    rng = experiment_rng(sc.seed, OPTIMIZE_STREAM, 0)
    realizations = generate_realizations(sc, spec.optimizer.mc_samples, rng)
    evaluator = ErgodicRateEvaluator(realizations, sc.radio.tx_power, sc.radio.noise_power, Settings().cache_size)
    geom, trace = optimize(
        initial_geometry(sc), realizations, spec.optimizer, sc.radio.tx_power, sc.radio.noise_power, evaluator
    )
    wall_time = time.perf_counter() - start

    out = args.out
    write_apv(geom, out)
    write_trace(trace.objective, out / "trace.csv")
    steps_frame(trace).to_csv(out / "steps.csv", index=False)
    write_metadata(
        spec,
        out,
        "optimize",
        wall_time,
        1,
        args.deterministic,
        extra={
            "termination": trace.termination.value if trace.termination else None,
            "outer_iterations": trace.outer_iterations,
            "objective_evaluations": trace.evaluations,
            "evaluator": evaluator.diagnostics(),
        },
    )
    print(f"objective {trace.objective[0]:.6f} -> {trace.objective[-1]:.6f} bps/Hz ({trace.termination.value})")
    log_info("Optimization finished", out=str(out), outer_iterations=trace.outer_iterations)
    return EXIT_OK


@error_handler_decorator(ErrorCategory.EXPERIMENT_ERROR)
def cmd_run(args: argparse.Namespace) -> int:
    """Run the configured sweep; writes results.csv, traces/ and metadata.json"""
    spec = _load(args)
    start = time.perf_counter()
    outcome = run_experiment(spec, threads=args.threads, deterministic=args.deterministic, progress=args.progress)
    wall_time = time.perf_counter() - start

    out = args.out
    if outcome.rows:
        write_results(outcome.rows, out)
    write_traces(outcome.traces, out)
    write_tables(outcome.tables, out)
    write_metadata(
        spec,
        out,
        "run",
        wall_time,
        1 if args.deterministic else args.threads,
        args.deterministic,
        timings=outcome.timings,
        extra={"error_counts": dict(error_handler.error_counts)},
    )

    failed = sum(1 for row in outcome.rows if row.errors)
    print(f"{spec.kind.value}: {len(outcome.rows)} rows, {failed} with errors, written to {out}")
    if outcome.rows:
        frame = pd.DataFrame([r.model_dump() for r in outcome.rows])
        summary = frame.pivot_table(index="sweep_value", columns="scheme", values="rate_bps_hz", aggfunc="mean")
        print(summary.to_string(float_format=lambda v: f"{v:.3f}"))
    return EXIT_OK


@error_handler_decorator(ErrorCategory.EXPERIMENT_ERROR)
def cmd_analyze(args: argparse.Namespace) -> int:
    """Correlation tables for the closed-form minima; the config's analysis block sets the grid"""
    spec = _load(args)
    if spec.kind != ExperimentKind.ANALYZE_THEOREMS:
        spec = ExperimentSpec.model_validate({**spec.model_dump(), "kind": ExperimentKind.ANALYZE_THEOREMS.value})
    start = time.perf_counter()
    workers = 1 if args.deterministic else args.threads
    tables = analyze_theorems(spec, workers=workers)
    wall_time = time.perf_counter() - start

    paths = write_tables(tables, args.out)
    write_metadata(spec, args.out, "analyze-theorems", wall_time, workers, args.deterministic)
    for name in ("theorem1", "theorem2", "theorem3"):
        frame = tables[name]
        print(f"{name}: {len(frame)} rows, max |closed - brute| = {frame['abs_error'].max():.3e}")
    print(f"{len(paths)} tables written to {args.out}")
    return EXIT_OK


@error_handler_decorator(ErrorCategory.CONFIGURATION_ERROR)
def cmd_validate(args: argparse.Namespace) -> int:
    spec = load_config(args.config)
    print(serialize_config(spec))
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "run": cmd_run,
    "analyze-theorems": cmd_analyze,
    "validate-config": cmd_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ToMAError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        # already logged and counted by the command decorator
        print(f"unexpected error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
