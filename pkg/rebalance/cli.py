"""Command line: python -m rebalance <command> ...

    bench          run the benchmark grid of a RunConfig
    stability      repeat over-sampling with several seeds on fixed folds
    validate-data  load configured datasets and check them against the registry
    gradcheck      finite-difference check of the network gradients

Exit codes: 0 success, 1 run failure (error.json written), 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from .config import METHODS, RunConfig, load_run_config
from .data_pipeline import load_dataset_ref, lookup_registry, validate_against_registry, write_csv
from .errors import BenchmarkError, ConfigError, RebalanceError
from .oracles import gradient_check
from .pipeline import run_benchmark, stability_report

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s:%(levelname)s:%(name)s:%(message)s"


def _method_list(text: str) -> List[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {', '.join(METHODS)}")
    return methods


def _seed_list(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rebalance", description="Deep SMOTE / DA-SMOTE over-sampling benchmark.")
    verbosity = p.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging (per-epoch losses)")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = p.add_subparsers(dest="command", required=True)

    def run_options(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", required=True, help="RunConfig JSON file")
        sp.add_argument("--seed", type=int, help="override global_seed")
        sp.add_argument("--k-folds", type=int, dest="k_folds", help="override k_folds")
        sp.add_argument("--methods", type=_method_list, help="comma list restricting the methods")
        sp.add_argument("--out", help="override output_dir")
        sp.add_argument("--jobs", type=int, help="worker count (-1 = all cores)")

    bench = sub.add_parser("bench", help="run the benchmark grid")
    run_options(bench)
    bench.add_argument("--audit", action="store_true", default=None, help="check fold indices for leakage")

    stab = sub.add_parser("stability", help="dispersion of metrics across over-sampling seeds")
    run_options(stab)
    stab.add_argument("--dataset", help="dataset name from the config (default: the first)")
    seeds = stab.add_mutually_exclusive_group()
    seeds.add_argument("--seeds", type=_seed_list, help="comma list of over-sampling seeds")
    seeds.add_argument("--runs", type=int, default=10, help="use seeds 0..runs-1 (default 10)")

    val = sub.add_parser("validate-data", help="load datasets and compare them with the registry")
    val.add_argument("--config", required=True, help="RunConfig JSON file")
    val.add_argument("--export", help="directory to write the loaded datasets to as CSV")

    grad = sub.add_parser("gradcheck", help="finite-difference gradient self-test")
    grad.add_argument("--cases", type=int, default=100)
    grad.add_argument("--seed", type=int, default=0)
    grad.add_argument("--tol", type=float, default=1e-4)
    return p


@dataclass
class CliRequest:
    command: str
    args: argparse.Namespace
    config: Optional[RunConfig] = None


def cli_parse(argv: Optional[Sequence[str]] = None) -> CliRequest:
    """Parse argv; for commands that take a config, load it with the CLI
    overrides applied. Usage errors exit 2 through argparse."""
    args = build_parser().parse_args(argv)
    config = None
    if args.command in ("bench", "stability"):
        overrides = {
            "global_seed": args.seed,
            "k_folds": args.k_folds,
            "methods": args.methods,
            "output_dir": args.out,
            "n_jobs": args.jobs,
            "audit": getattr(args, "audit", None),
        }
        config = load_run_config(args.config, overrides=overrides)
    elif args.command == "validate-data":
        config = load_run_config(args.config)
    return CliRequest(args.command, args, config)


def _write_error(out_dir: Path, record: dict) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "error.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        log.error("could not write error.json: %s", e)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


# ----------------------------
# Commands
# ----------------------------

def cmd_bench(cfg: RunConfig) -> int:
    report = run_benchmark(cfg)
    print(f"Done. {len(report.outcomes)} fold results written to {report.files['results']}")
    print(f"Summary: {report.files['summary_md']}")
    return 0


def cmd_stability(cfg: RunConfig, args: argparse.Namespace) -> int:
    refs = {r.display_name: r for r in cfg.datasets}
    name = args.dataset or cfg.dataset_names[0]
    if name not in refs:
        raise ConfigError(f"dataset {name!r} is not in the config; choose from {list(refs)}")
    seeds = args.seeds if args.seeds is not None else list(range(args.runs))

    ds = load_dataset_ref(refs[name])
    result = stability_report(cfg, ds, cfg.methods, seeds)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dispersion_path = out_dir / "stability.csv"
    result.dispersion.to_csv(dispersion_path, index=False, float_format="%.17g", lineterminator="\n")
    runs_path = out_dir / "stability_runs.json"
    runs_path.write_text(
        json.dumps(
            {"dataset": result.dataset, "seeds": result.seeds, "per_run": result.per_run, "digests": result.digests},
            indent=2,
            sort_keys=True,
        ) + "\n",
        encoding="utf-8",
    )
    print(result.dispersion.to_string(index=False))
    print(f"Done. Stability written to {dispersion_path}")
    return 0


def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    for ref in cfg.datasets:
        ds = load_dataset_ref(ref)
        entry = lookup_registry(ds.name)
        line = f"{ds.name}: {len(ds)} rows, {ds.n_features} attributes, {ds.n_pos} pos / {ds.n_neg} neg"
        if entry is None:
            print(f"{line} (not in registry)")
        else:
            report = validate_against_registry(ds, entry)
            print(f"{line} -> {'clean' if report.clean else f'{len(report.warnings)} warnings'}")
            for w in report.warnings:
                print(f"  - {w}")
        if args.export:
            path = write_csv(ds, Path(args.export) / f"{ds.name}.csv")
            print(f"  exported to {path}")
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    report = gradient_check(cases=args.cases, seed=args.seed, tolerance=args.tol)
    status = "passed" if report.passed else "FAILED"
    print(f"gradcheck {status}: {report.cases} cases, max relative error {report.max_rel_error:.3e} (tol {args.tol:g})")
    if not report.passed:
        print(f"worst: {report.worst_case}")
    return 0 if report.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        req = cli_parse(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    except ConfigError as e:
        print(f"rebalance: config error: {e}", file=sys.stderr)
        return 2

    args = req.args
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)

    if req.command == "gradcheck":
        return cmd_gradcheck(args)

    cfg = req.config
    try:
        if req.command == "bench":
            return cmd_bench(cfg)
        if req.command == "stability":
            return cmd_stability(cfg, args)
        return cmd_validate(cfg, args)
    except ConfigError as e:
        print(f"rebalance: config error: {e}", file=sys.stderr)
        return 2
    except BenchmarkError as e:
        log.error("%s", e)
        _write_error(Path(cfg.output_dir), e.record())
        return 1
    except (RebalanceError, OSError) as e:
        log.error("%s", e)
        _write_error(
            Path(cfg.output_dir),
            {"dataset": None, "repeat": None, "fold": None, "method": None,
             "error_type": type(e).__name__, "message": str(e)},
        )
        return 1
