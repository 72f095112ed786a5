"""
PFSR Simulator - Command-line experiment driver
Run with: python cli.py run --config configs/memory_threshold.json5
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

# Add src directory to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from config_loader import RunManifest, load_config
from experiment_models import ConfigError, OracleSpec
from experiments import get_runner
from experiments.oracle_suite import run_oracle_suite, suite_frame
from experiments.validation import validate_config
from report_builder import build_report
from results_store import ResultsStore, read_results

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

logger = logging.getLogger("pfsr_sim")


def setup_logging(verbose: bool):
    logging.basicConfig(format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def cmd_run(args) -> int:
    config = load_config(args.config)
    runner = get_runner(config, seed=args.seed, workers=args.workers, shots=args.shots, progress=sys.stderr.isatty())
    out_dir = Path(args.out or config.output)
    effective = replace(config, seed=runner.seed, shots=runner.shots, output=str(out_dir))
    manifest = RunManifest(effective, runner.seed, runner.workers)

    output = runner.run()

    store = ResultsStore(out_dir)
    if output.results:
        path = store.write_results(output.results)
        print(f"✓ Wrote {len(output.results)} rows to {path}")
    for name, frame in output.tables.items():
        path = store.write_frame(frame, f"{name}.csv")
        print(f"✓ Wrote {len(frame)} rows to {path}")
    for message in output.messages:
        print(message)
    manifest.finish(output.row_counts())
    print(f"✓ Manifest: {manifest.write(out_dir)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"✗ {exc.field_path}: {exc.message}")
        return EXIT_CONFIG
    report = validate_config(config)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_CONFIG


def cmd_report(args) -> int:
    frame = read_results(args.results)
    report = build_report(frame, n_boot=args.bootstrap, seed=args.seed or 0)
    print(report.render())
    if args.out:
        path = ResultsStore(args.out).write_plot_data(frame)
        print(f"✓ Plot data: {path}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = OracleSpec(circuits=args.circuits, max_qubits=args.max_qubits, depth=args.depth)
    cases = run_oracle_suite(spec, args.seed or 0)
    frame = suite_frame(cases)
    failed = int((~frame["passed"]).sum())
    print(f"{len(cases) - failed}/{len(cases)} circuits matched (worst fidelity {frame['fidelity'].min():.12f})")
    if args.out:
        path = ResultsStore(args.out).write_frame(frame, "oracle_cases.csv")
        print(f"✓ Wrote {len(frame)} rows to {path}")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfsr-sim", description="Sparse stabilizer-frame QEC simulations")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config (or replay a manifest)")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out")
    run.add_argument("--shots", type=int, help="override shots per point")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="dry-run checks of a config")
    validate.add_argument("--config", required=True)
    validate.set_defaults(func=cmd_validate)

    report = sub.add_parser("report", help="summarize result CSVs and estimate thresholds")
    report.add_argument("results", nargs="+", help="results CSVs or output directories")
    report.add_argument("--out", help="directory for plot-ready CSV")
    report.add_argument("--seed", type=int)
    report.add_argument("--bootstrap", type=int, default=200)
    report.set_defaults(func=cmd_report)

    oracle = sub.add_parser("oracle", help="random-circuit equivalence against the dense simulator")
    oracle.add_argument("--circuits", type=int, default=500)
    oracle.add_argument("--max-qubits", type=int, default=8)
    oracle.add_argument("--depth", type=int, default=40)
    oracle.add_argument("--seed", type=int)
    oracle.add_argument("--out")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"✗ Config error in {exc.field_path}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ValueError, OSError) as exc:
        logger.debug("Run failed", exc_info=True)
        print(f"✗ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
