__module_name__ = "commands"

"""
The four CLI verbs: solve, sweep, reproduce and truth.

Each command takes a resolved RunManifest and returns its result, writing
reports under the manifest's output directory.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from backend.benchmarks import BenchmarkFactory, BenchmarkSpec, EvaluationSet
from backend.config import (
    LossConfig,
    RunManifest,
    create_data_directory,
    merge_sections,
)
from backend.exceptions import ConfigurationError, DivergenceError, KronSolveError
from backend.grid import DomainClassification, Grid
from backend.kernel1d import ProductKernel
from backend.optimizer import SolveResult, run
from backend.storage import write_array

from .reports import write_solve_report, write_table_csv

logger = logging.getLogger(__name__)

SWEEP_AXES = ("lengthscale", "nugget", "alpha", "beta", "grid")
SWEEP_RESULT_COLUMNS = [
    "grid",
    "rel_l2_min_logged",
    "rel_l2_best_loss",
    "best_loss",
    "iterations",
    "wall_time",
    "status",
]

SweepValue = Union[float, Tuple[float, ...], Tuple[int, ...]]


@dataclass
class PreparedRun:
    """A manifest resolved against its benchmark defaults."""

    manifest: RunManifest
    spec: BenchmarkSpec
    grid: Grid
    kernel: ProductKernel
    classification: DomainClassification
    loss_config: LossConfig

    def evaluation_set(self) -> Optional[EvaluationSet]:
        return self.spec.evaluation_set(
            self.classification, self.manifest.output.cache_dir
        )


def prepare_run(manifest: RunManifest) -> PreparedRun:
    """Build the benchmark, grid, kernel and domain split a manifest names."""
    spec = BenchmarkFactory.create(manifest.benchmark, manifest.output.cache_dir)
    grid = spec.build_grid(manifest.grid.shape or None)
    kernel = spec.kernel(manifest.kernel.lengthscales or None, manifest.kernel.nugget)
    classification = spec.classify(
        grid, manifest.benchmark.domain, manifest.benchmark.boundary_samples
    )
    loss_config = manifest.loss.resolve(spec.defaults.alpha, spec.defaults.beta)
    return PreparedRun(manifest, spec, grid, kernel, classification, loss_config)


def solve_manifest(manifest: RunManifest, timing_only: bool = False) -> SolveResult:
    """
    Run one solve without writing any files.

    ``timing_only`` skips the truth evaluation and the fill distance.
    """
    prepared = prepare_run(manifest)
    return run(
        prepared.spec.problem,
        prepared.grid,
        prepared.kernel,
        prepared.classification,
        prepared.loss_config,
        manifest.optimizer,
        operator_mode=manifest.output.operator_mode,
        evaluation=None if timing_only else prepared.evaluation_set(),
        compute_fill_distance=not timing_only,
        track_error=not timing_only,
    )


def solve_command(
    manifest: RunManifest, out_dir: Optional[Union[str, Path]] = None
) -> SolveResult:
    """Solve one manifest and write summary.txt, trace.csv, eta.bin."""
    result = solve_manifest(manifest)
    write_solve_report(result, manifest, out_dir or manifest.output.out_dir)
    return result


def _grid_label(shape: Sequence[int]) -> str:
    return "x".join(str(n) for n in shape)


def _column_value(axis: str, value: SweepValue) -> Any:
    if axis == "grid":
        return _grid_label(value)
    if isinstance(value, tuple):
        return ":".join(repr(v) for v in value)
    return value


def _sweep_overrides(axis: str, value: SweepValue) -> Dict[str, Dict[str, Any]]:
    if axis == "lengthscale":
        scales = list(value) if isinstance(value, tuple) else [value]
        return {"kernel": {"lengthscales": scales}}
    if axis == "nugget":
        return {"kernel": {"nugget": value}}
    if axis in ("alpha", "beta"):
        return {"loss": {axis: value}}
    if axis == "grid":
        return {"grid": {"shape": list(value)}}
    raise ConfigurationError(
        f"unknown sweep axis '{axis}'. Available axes: {', '.join(SWEEP_AXES)}"
    )


def expand_sweep(
    axes: Mapping[str, Sequence[SweepValue]], cap: int
) -> List[Dict[str, SweepValue]]:
    """
    Cartesian product of the sweep axes with duplicate values removed.

    Raises:
        ConfigurationError: unknown axis, empty axis, or more than ``cap``
            combinations
    """
    names = list(axes)
    unique: List[List[SweepValue]] = []
    for name in names:
        if name not in SWEEP_AXES:
            raise ConfigurationError(
                f"unknown sweep axis '{name}'. Available axes: {', '.join(SWEEP_AXES)}"
            )
        values = list(dict.fromkeys(axes[name]))
        if not values:
            raise ConfigurationError(f"sweep axis '{name}' has no values")
        if len(values) < len(axes[name]):
            logger.warning(
                f"{__module_name__} - Dropped {len(axes[name]) - len(values)} "
                f"duplicate values from sweep axis '{name}'"
            )
        unique.append(values)

    total = int(np.prod([len(v) for v in unique])) if unique else 0
    if total > cap:
        raise ConfigurationError(
            f"sweep has {total} combinations, above the cap of {cap}"
        )
    return [dict(zip(names, combo)) for combo in itertools.product(*unique)]


def _sweep_row(
    manifest: RunManifest, combo: Mapping[str, SweepValue]
) -> Dict[str, Any]:
    overrides: Dict[str, Dict[str, Any]] = {}
    for axis, value in combo.items():
        for section, fields in _sweep_overrides(axis, value).items():
            overrides.setdefault(section, {}).update(fields)
    row: Dict[str, Any] = {axis: _column_value(axis, v) for axis, v in combo.items()}
    row.setdefault("grid", "")
    try:
        variant = merge_sections(manifest, overrides)
        result = solve_manifest(variant)
    except DivergenceError as e:
        logger.warning(f"{__module_name__} - Sweep point {combo} diverged: {e}")
        return {**row, "status": "diverged"}
    except KronSolveError as e:
        logger.warning(f"{__module_name__} - Sweep point {combo} failed: {e}")
        return {**row, "status": f"error: {e}"}
    row.update(
        grid=_grid_label(result.grid_shape),
        rel_l2_min_logged=result.rel_l2_min_logged,
        rel_l2_best_loss=result.rel_l2_best_loss,
        best_loss=result.best_loss,
        iterations=result.iterations,
        wall_time=result.wall_time,
        status=result.stop_reason,
    )
    return row


def _sort_key(value: Any) -> Any:
    if isinstance(value, tuple):
        return value
    if isinstance(value, (int, float)):
        return (value,)
    return (str(value),)


def sweep_command(
    manifest: RunManifest,
    axes: Mapping[str, Sequence[SweepValue]],
    out_path: Optional[Union[str, Path]] = None,
) -> pd.DataFrame:
    """
    Solve every combination of the sweep axes, one solve per worker thread.

    Returns:
        One row per combination, sorted by the swept values
    """
    combos = expand_sweep(axes, manifest.output.sweep_cap)
    combos.sort(key=lambda c: tuple(_sort_key(c[a]) for a in axes))
    logger.info(
        f"{__module_name__} - Sweeping {len(combos)} combinations of "
        f"{', '.join(axes)} on {manifest.output.threads} threads"
    )
    with ThreadPoolExecutor(max_workers=manifest.output.threads) as pool:
        rows = list(pool.map(lambda c: _sweep_row(manifest, c), combos))

    swept = [a for a in axes if a != "grid"]
    table = pd.DataFrame(rows, columns=swept + SWEEP_RESULT_COLUMNS)
    path = out_path or Path(manifest.output.out_dir) / "sweep.csv"
    write_table_csv(table, path)
    return table


def truth_command(
    manifest: RunManifest, out_dir: Optional[Union[str, Path]] = None
) -> Path:
    """
    Write the ground truth on the refined evaluation grid as truth.csv (plus a
    binary truth.bin of the full grid table).

    Raises:
        ConfigurationError: the benchmark has no ground truth
    """
    prepared = prepare_run(manifest)
    spec = prepared.spec
    if spec.truth is None:
        raise ConfigurationError(f"{spec.name} has no ground truth")
    evaluation = prepared.evaluation_set()
    directory = create_data_directory(str(out_dir or manifest.output.out_dir))

    columns = {f"x{j}": evaluation.points[:, j] for j in range(spec.ndim)}
    columns["u"] = evaluation.truth
    csv_path = directory / "truth.csv"
    pd.DataFrame(columns).to_csv(
        csv_path, index=False, float_format="%.17g", encoding="utf-8"
    )
    write_array(directory / "truth.bin", evaluation.truth, spec.params)
    logger.info(
        f"{__module_name__} - Wrote {evaluation.size} truth values for "
        f"{spec.label} to {csv_path}"
    )
    return csv_path


def reproduce_command(
    table_id: str,
    manifest: Optional[RunManifest] = None,
    rows: Optional[Sequence[str]] = None,
    max_iters: Optional[int] = None,
) -> pd.DataFrame:
    """Run a published-table reproduction; see ``app.reproduction``."""
    from .reproduction import reproduce_table

    manifest = manifest if manifest is not None else RunManifest()
    table = reproduce_table(table_id, manifest, rows=rows, max_iters=max_iters)
    write_table_csv(
        table, Path(manifest.output.out_dir) / f"reproduce_{table_id}.csv"
    )
    return table


__all__ = [
    "SWEEP_AXES",
    "PreparedRun",
    "prepare_run",
    "solve_manifest",
    "solve_command",
    "expand_sweep",
    "sweep_command",
    "truth_command",
    "reproduce_command",
]
