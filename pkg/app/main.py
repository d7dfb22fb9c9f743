__module_name__ = "main"

"""
Command-line entry point.

    kronsolve solve --benchmark elliptic --grid 35x35 --lengthscale 0.1
    kronsolve sweep --benchmark burgers --vary grid=60x80,96x50,480x10
    kronsolve reproduce easy-small --rows elliptic-18x18 --max-iters 20000
    kronsolve truth --benchmark burgers --grid 49x49

Exit codes: 0 on success, 1 on solver failures or failed reproduction rows,
2 on usage and configuration errors.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

TABLE_IDS = (
    "easy-small",
    "hard-small",
    "fd-comparison",
    "fill-distance-trend",
    "grid-shape",
    "coefficient-ablation",
    "sensitivity",
    "irregular",
    "runtime",
)

logger = logging.getLogger(__name__)


def parse_shape(text: str) -> Tuple[int, ...]:
    """'35x35' -> (35, 35)."""
    try:
        shape = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid shape '{text}' (use 35x35)")
    if not shape or any(n < 2 for n in shape):
        raise argparse.ArgumentTypeError(f"invalid grid shape '{text}'")
    return shape


def _sweep_value(axis: str, text: str) -> Any:
    if axis == "grid":
        return parse_shape(text)
    if axis == "lengthscale" and ":" in text:
        return tuple(float(part) for part in text.split(":"))
    return float(text)


def parse_vary(text: str) -> Tuple[str, List[Any]]:
    """'alpha=1e4,1e6' -> ('alpha', [1e4, 1e6])."""
    axis, sep, values = text.partition("=")
    if not sep or not values:
        raise argparse.ArgumentTypeError(f"invalid sweep axis '{text}' (use KEY=V1,V2)")
    try:
        return axis.strip(), [_sweep_value(axis.strip(), v) for v in values.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid values in sweep axis '{text}'")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Manifest file (INI)")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--cache-dir", help="Reference solution cache directory")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity",
    )
    parser.add_argument("--log-file", help="Also write the log to this file")


def _add_problem(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--benchmark",
        choices=["burgers", "elliptic", "eikonal", "allen_cahn", "poisson"],
    )
    parser.add_argument("--domain", choices=["box", "circle", "triangle"])
    parser.add_argument("--nu", type=float, help="Burgers viscosity")
    parser.add_argument("--a", type=float, help="Allen-Cahn frequency parameter")
    parser.add_argument("--eps", type=float, help="Eikonal regularization")
    parser.add_argument("--grid", type=parse_shape, help="Grid shape, e.g. 35x35")
    parser.add_argument(
        "--lengthscale",
        type=float,
        action="append",
        help="Kernel lengthscale; repeat once per axis",
    )
    parser.add_argument("--nugget", type=float)
    parser.add_argument("--alpha", type=float, help="Interior residual weight")
    parser.add_argument("--beta", type=float, help="Boundary residual weight")
    parser.add_argument("--epsilon", type=float, help="Residual relaxation level")
    parser.add_argument("--lr", type=float, help="ADAM learning rate")
    parser.add_argument("--max-iters", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--parameterization", choices=["nodal", "coefficients"])
    parser.add_argument("--operator-mode", choices=["structured", "dense"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kronsolve",
        description="Kronecker-structured kernel solver for nonlinear PDEs",
    )
    verbs = parser.add_subparsers(dest="command", required=True)

    solve = verbs.add_parser("solve", help="Solve one configuration")
    _add_common(solve)
    _add_problem(solve)

    sweep = verbs.add_parser("sweep", help="Hyperparameter sweep")
    _add_common(sweep)
    _add_problem(sweep)
    sweep.add_argument(
        "--vary",
        type=parse_vary,
        action="append",
        required=True,
        help="Sweep axis KEY=V1,V2,... (lengthscale, nugget, alpha, beta, grid)",
    )

    reproduce = verbs.add_parser("reproduce", help="Re-run a published table")
    _add_common(reproduce)
    reproduce.add_argument("table", choices=TABLE_IDS)
    reproduce.add_argument(
        "--rows", help="Comma-separated row names (includes manual rows)"
    )
    reproduce.add_argument("--max-iters", type=int, help="Iteration cap per run")

    truth = verbs.add_parser("truth", help="Dump the ground truth table")
    _add_common(truth)
    _add_problem(truth)
    return parser


_FLAG_FIELDS = {
    "benchmark": ("benchmark", "name"),
    "domain": ("benchmark", "domain"),
    "nu": ("benchmark", "nu"),
    "a": ("benchmark", "a"),
    "eps": ("benchmark", "eps"),
    "nugget": ("kernel", "nugget"),
    "alpha": ("loss", "alpha"),
    "beta": ("loss", "beta"),
    "epsilon": ("loss", "epsilon"),
    "lr": ("optimizer", "lr"),
    "max_iters": ("optimizer", "max_iters"),
    "patience": ("optimizer", "patience"),
    "seed": ("optimizer", "seed"),
    "parameterization": ("optimizer", "parameterization"),
    "operator_mode": ("output", "operator_mode"),
    "out": ("output", "out_dir"),
    "threads": ("output", "threads"),
    "cache_dir": ("output", "cache_dir"),
}


def cli_overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """Manifest sections set by command-line flags."""
    overrides: Dict[str, Dict[str, Any]] = {}
    # reproduce caps iterations per row instead
    skipped = {"max_iters"} if args.command == "reproduce" else set()
    for flag, (section, name) in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None and flag not in skipped:
            overrides.setdefault(section, {})[name] = value
    if getattr(args, "grid", None):
        overrides.setdefault("grid", {})["shape"] = list(args.grid)
    if getattr(args, "lengthscale", None):
        overrides.setdefault("kernel", {})["lengthscales"] = list(args.lengthscale)
    return overrides


def _blas_threads(args: argparse.Namespace) -> int:
    if args.command == "sweep":
        return 1
    return args.threads or int(os.getenv("KRONSOLVE_OUTPUT__THREADS", "1") or 1)


def _dispatch(args: argparse.Namespace) -> int:
    from app.commands import (
        reproduce_command,
        solve_command,
        sweep_command,
        truth_command,
    )
    from app.config import resolve_manifest
    from app.reports import format_summary, solve_summary

    manifest = resolve_manifest(args.config, cli_overrides(args))

    if args.command == "solve":
        result = solve_command(manifest)
        sys.stdout.write(format_summary(solve_summary(result, manifest)))
        return EXIT_OK
    if args.command == "sweep":
        table = sweep_command(manifest, dict(args.vary))
        sys.stdout.write(table.to_string(index=False) + "\n")
        failed = ~table["status"].isin(["patience", "max_iters"])
        return EXIT_FAILURE if failed.any() else EXIT_OK
    if args.command == "reproduce":
        rows = [r.strip() for r in args.rows.split(",")] if args.rows else None
        table = reproduce_command(args.table, manifest, rows, args.max_iters)
        sys.stdout.write(table.to_string(index=False) + "\n")
        return EXIT_OK if table["passed"].all() else EXIT_FAILURE
    path = truth_command(manifest)
    sys.stdout.write(f"{path}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Thread pools are sized when numpy is first imported
    from utils.runtime_env import setup_environment

    setup_environment(_blas_threads(args))

    from utils.logging_method import setup_logger

    setup_logger(log_file=args.log_file, level=args.log_level)

    from backend.exceptions import ConfigurationError, KronSolveError

    try:
        return _dispatch(args)
    except ConfigurationError as e:
        logger.error(f"{__module_name__} - Configuration error: {e}")
        return EXIT_USAGE
    except KronSolveError as e:
        logger.error(f"{__module_name__} - {type(e).__name__}: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
