__module_name__ = "reproduction"

"""
Published error tables and the harness that re-runs them.

Each row names a benchmark configuration, the published value and an
acceptance band. Rows marked ``manual`` take hours and run only when named
with ``--rows``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from backend.benchmarks import BenchmarkFactory, fd_solve
from backend.config import BenchmarkSettings, RunManifest, merge_sections
from backend.exceptions import ConfigurationError, KronSolveError

from .commands import solve_manifest

logger = logging.getLogger(__name__)

REPRODUCTION_COLUMNS = [
    "table",
    "row",
    "method",
    "published",
    "obtained",
    "ratio",
    "band",
    "passed",
]
RUNTIME_ITERS = 200
# seconds per iteration allowed on the 360 x 120 Burgers grid
LARGE_GRID_CEILING = 0.05
# structured rows whose per-iteration cost must grow sub-quadratically
SCALING_ROWS = ("burgers-structured-120x40", "burgers-structured-360x120")
SCALING_ROW = "burgers-structured-scaling"


@dataclass(frozen=True)
class ReproductionRow:
    """One published number and how to recompute it."""

    row: str
    benchmark: Dict[str, Any]
    shape: Tuple[int, ...]
    published: float
    method: str = "sks"
    band: float = 10.0
    lengthscales: Tuple[float, ...] = ()
    parameterization: str = "nodal"
    operator_mode: str = "structured"
    manual: bool = False
    expect_refusal: bool = False

    @property
    def metric(self) -> str:
        return "seconds_per_iteration" if self.method == "runtime" else "rel_l2"


def _rows(
    benchmark: Dict[str, Any],
    values: Dict[Tuple[int, ...], float],
    manual: Sequence[Tuple[int, ...]] = (),
    tag: str = "",
    **options,
) -> List[ReproductionRow]:
    rows = []
    for shape, published in values.items():
        label = "x".join(str(n) for n in shape)
        name = benchmark["name"]
        rows.append(
            ReproductionRow(
                row=f"{name}{tag}-{label}",
                benchmark=benchmark,
                shape=shape,
                published=published,
                manual=shape in manual,
                **options,
            )
        )
    return rows


ELLIPTIC = {"name": "elliptic"}
EIKONAL = {"name": "eikonal", "eps": 0.1}
BURGERS = {"name": "burgers", "nu": 0.02}
BURGERS_SHARP = {"name": "burgers", "nu": 0.001}
ALLEN_CAHN_15 = {"name": "allen_cahn", "a": 15.0}
ALLEN_CAHN_20 = {"name": "allen_cahn", "a": 20.0}
# Burgers nu=0.001 lengthscales (x, t)
SHARP = (0.02, 0.1)
NO_CEILING = math.nan

TABLES: Dict[str, List[ReproductionRow]] = {
    "easy-small": (
        _rows(
            ELLIPTIC,
            {
                (18, 18): 1.26e-02,
                (25, 25): 6.93e-05,
                (35, 35): 6.80e-06,
                (49, 49): 1.83e-06,
            },
        )
        + _rows(
            EIKONAL,
            {
                (18, 18): 6.23e-04,
                (25, 25): 2.68e-04,
                (35, 35): 1.91e-04,
                (49, 49): 2.51e-05,
            },
        )
        + _rows(
            BURGERS,
            {
                (25, 25): 1.44e-02,
                (35, 35): 5.40e-03,
                (49, 49): 7.83e-04,
                (70, 70): 3.21e-04,
            },
            manual=[(70, 70)],
        )
    ),
    "hard-small": (
        _rows(
            ALLEN_CAHN_15,
            {(49, 49): 5.15e-03, (70, 70): 9.20e-05},
            manual=[(70, 70)],
            tag="-a15",
        )
        + _rows(ALLEN_CAHN_20, {(70, 70): 9.83e-04}, manual=[(70, 70)], tag="-a20")
        + _rows(
            BURGERS_SHARP,
            {
                (42, 14): 1.34e-01,
                (60, 20): 1.11e-01,
                (84, 28): 8.04e-02,
                (120, 40): 1.89e-02,
            },
            manual=[(84, 28), (120, 40)],
            lengthscales=SHARP,
        )
    ),
    "fd-comparison": (
        _rows(
            ELLIPTIC,
            {
                (18, 18): 3.36e-02,
                (25, 25): 1.78e-02,
                (35, 35): 9.25e-03,
                (49, 49): 4.78e-03,
            },
            method="fd",
            band=2.0,
        )
        + _rows(
            ALLEN_CAHN_15,
            {
                (80, 80): 8.57e-02,
                (90, 90): 6.68e-02,
                (150, 150): 2.33e-02,
                (200, 200): 1.30e-02,
            },
            manual=[(150, 150), (200, 200)],
            method="fd",
            band=2.0,
            tag="-a15",
        )
        + _rows(
            ALLEN_CAHN_20,
            {
                (80, 80): 1.62e-01,
                (90, 90): 1.24e-01,
                (150, 150): 4.22e-02,
                (200, 200): 2.34e-02,
            },
            manual=[(150, 150), (200, 200)],
            method="fd",
            band=2.0,
            tag="-a20",
        )
    ),
    "fill-distance-trend": _rows(
        ELLIPTIC, {(18, 18): 1.26e-02, (25, 25): 6.93e-05, (35, 35): 6.80e-06}
    ),
    "grid-shape": _rows(
        BURGERS,
        {
            (60, 80): 2.27e-03,
            (69, 70): 4.10e-04,
            (96, 50): 7.54e-05,
            (160, 30): 1.72e-04,
            (480, 10): 5.98e-04,
        },
    ),
    "coefficient-ablation": (
        _rows(BURGERS, {(35, 35): 5.40e-03, (49, 49): 7.83e-04, (70, 70): 3.21e-04})
        + [
            ReproductionRow(
                row=f"burgers-coefficients-{n}x{n}",
                benchmark=BURGERS,
                shape=(n, n),
                published=published,
                parameterization="coefficients",
            )
            for n, published in ((35, 2.80e-02), (49, 1.56e-03), (70, 7.14e-04))
        ]
    ),
    "sensitivity": [
        ReproductionRow(
            row=f"elliptic-35x35-ls{ls:g}",
            benchmark=ELLIPTIC,
            shape=(35, 35),
            published=published,
            lengthscales=(ls, ls),
        )
        for ls, published in (
            (0.05, 1.19e-02),
            (0.1, 6.80e-06),
            (0.2, 4.62e-05),
            (0.3, 9.14e-04),
        )
    ]
    + [
        ReproductionRow(
            row=f"allen_cahn-49x49-ls{ls:g}",
            benchmark=ALLEN_CAHN_15,
            shape=(49, 49),
            published=published,
            lengthscales=(ls, ls),
        )
        for ls, published in (
            (0.08, 4.98e-01),
            (0.06, 3.83e-01),
            (0.04, 5.15e-03),
            (0.02, 2.19e-01),
        )
    ],
    "irregular": [
        ReproductionRow(
            row="elliptic-circle-49x49",
            benchmark={**ELLIPTIC, "domain": "circle"},
            shape=(49, 49),
            published=8.40e-04,
        ),
        ReproductionRow(
            row="allen_cahn-triangle-70x70",
            benchmark={**ALLEN_CAHN_15, "domain": "triangle"},
            shape=(70, 70),
            published=8.30e-02,
            manual=True,
        ),
    ],
    "runtime": [
        ReproductionRow(
            row=f"{benchmark['name']}-{mode}-{shape[0]}x{shape[1]}",
            benchmark=benchmark,
            shape=shape,
            published=published,
            method="runtime",
            band=ceiling,
            operator_mode=mode,
            lengthscales=scales,
            expect_refusal=refused,
        )
        for benchmark, scales, shape, mode, published, ceiling, refused in (
            (BURGERS_SHARP, SHARP, (84, 28), "structured", 4.6e-4, NO_CEILING, False),
            (BURGERS_SHARP, SHARP, (84, 28), "dense", 1.4e-02, NO_CEILING, False),
            (BURGERS_SHARP, SHARP, (120, 40), "structured", 9.8e-4, NO_CEILING, False),
            (BURGERS_SHARP, SHARP, (120, 40), "dense", 5.4e-02, NO_CEILING, False),
            (
                BURGERS_SHARP,
                SHARP,
                (360, 120),
                "structured",
                math.nan,
                LARGE_GRID_CEILING,
                False,
            ),
            (ALLEN_CAHN_15, (), (49, 49), "structured", 3.6e-4, NO_CEILING, False),
            (ALLEN_CAHN_15, (), (49, 49), "dense", 1.1e-2, NO_CEILING, False),
            (ALLEN_CAHN_15, (), (150, 150), "structured", 5.9e-3, NO_CEILING, False),
            (ALLEN_CAHN_15, (), (150, 150), "dense", math.nan, NO_CEILING, True),
        )
    ],
}


def available_tables() -> List[str]:
    return list(TABLES)


def select_rows(
    table_id: str, rows: Optional[Sequence[str]] = None
) -> List[ReproductionRow]:
    """
    Rows of a table: the named ones, or every row not marked manual.

    Raises:
        ConfigurationError: unknown table or row name
    """
    if table_id not in TABLES:
        raise ConfigurationError(
            f"unknown table '{table_id}'. Available tables: {', '.join(TABLES)}"
        )
    table = TABLES[table_id]
    if not rows:
        return [r for r in table if not r.manual]
    by_name = {r.row: r for r in table}
    unknown = [name for name in rows if name not in by_name]
    if unknown:
        raise ConfigurationError(
            f"unknown rows for {table_id}: {', '.join(unknown)}. "
            f"Available rows: {', '.join(by_name)}"
        )
    return [by_name[name] for name in rows]


def row_manifest(
    row: ReproductionRow, base: RunManifest, max_iters: Optional[int] = None
) -> RunManifest:
    """The base manifest with the row's benchmark, grid and kernel applied."""
    overrides: Dict[str, Dict[str, Any]] = {
        "benchmark": BenchmarkSettings(**row.benchmark).model_dump(
            include={"name", "nu", "a", "eps", "domain", *row.benchmark}
        ),
        "grid": {"shape": list(row.shape)},
        "kernel": {"lengthscales": list(row.lengthscales)},
        "optimizer": {"parameterization": row.parameterization},
        "output": {"operator_mode": row.operator_mode},
    }
    if row.method == "runtime":
        overrides["optimizer"]["max_iters"] = RUNTIME_ITERS
        overrides["optimizer"]["patience"] = RUNTIME_ITERS + 1
    if max_iters is not None:
        cap = min(max_iters, overrides["optimizer"].get("max_iters", max_iters))
        overrides["optimizer"]["max_iters"] = cap
    return merge_sections(base, overrides)


def _run_fd(row: ReproductionRow, manifest: RunManifest) -> float:
    spec = BenchmarkFactory.create(manifest.benchmark, manifest.output.cache_dir)
    grid = spec.build_grid(row.shape)
    solution = fd_solve(spec, grid)
    return solution.relative_error(spec.truth.on_grid(grid, manifest.output.cache_dir))


def _run_row(row: ReproductionRow, manifest: RunManifest) -> float:
    if row.method == "fd":
        return _run_fd(row, manifest)
    if row.method == "runtime":
        return solve_manifest(manifest, timing_only=True).seconds_per_iteration
    result = solve_manifest(manifest)
    return result.rel_l2_min_logged


def _passed(row: ReproductionRow, obtained: float) -> bool:
    if row.method == "runtime":
        if not math.isfinite(obtained):
            return False
        return math.isnan(row.band) or obtained < row.band
    if not math.isfinite(obtained):
        return False
    if row.method == "fd":
        return row.published / row.band <= obtained <= row.published * row.band
    return obtained <= row.published * row.band


def scaling_exponent(
    small: Tuple[Sequence[int], float], large: Tuple[Sequence[int], float]
) -> float:
    """
    Exponent p in seconds ~ M**p between two (shape, seconds) measurements.

    Returns NaN when either timing is missing or not positive.
    """
    (shape_small, t_small), (shape_large, t_large) = small, large
    m_small, m_large = math.prod(shape_small), math.prod(shape_large)
    if m_small == m_large:
        raise ConfigurationError("scaling needs two different grid sizes")
    timings = (t_small, t_large)
    if not all(math.isfinite(t) and t > 0 for t in timings):
        return math.nan
    return math.log(t_large / t_small) / math.log(m_large / m_small)


def _scaling_record(table: pd.DataFrame) -> Optional[Dict[str, Any]]:
    obtained = dict(zip(table["row"], table["obtained"]))
    if not all(name in obtained for name in SCALING_ROWS):
        return None
    shapes = {r.row: r.shape for r in TABLES["runtime"]}
    small, large = ((shapes[n], obtained[n]) for n in SCALING_ROWS)
    exponent = scaling_exponent(small, large)
    passed = math.isfinite(exponent) and exponent < 2.0
    logger.info(
        f"{__module_name__} - runtime {SCALING_ROW}: seconds per iteration grow "
        f"as M^{exponent:.2f} ({'pass' if passed else 'FAIL'})"
    )
    return {
        "table": "runtime",
        "row": SCALING_ROW,
        "method": "scaling",
        "published": 2.0,
        "obtained": exponent,
        "ratio": exponent / 2.0,
        "band": 2.0,
        "passed": passed,
    }


def _strictly_decreasing(values: Sequence[float]) -> List[bool]:
    checks = [math.isfinite(values[0])] if values else []
    for previous, current in zip(values, values[1:]):
        checks.append(math.isfinite(current) and current < previous)
    return checks


def reproduce_table(
    table_id: str,
    base: RunManifest,
    rows: Optional[Sequence[str]] = None,
    max_iters: Optional[int] = None,
    runner: Callable[[ReproductionRow, RunManifest], float] = _run_row,
) -> pd.DataFrame:
    """
    Re-run the selected rows of a published table.

    Returns:
        DataFrame with columns table, row, method, published, obtained, ratio,
        band and passed
    """
    records = []
    for row in select_rows(table_id, rows):
        manifest = row_manifest(row, base, max_iters)
        try:
            obtained = runner(row, manifest)
            passed = _passed(row, obtained) and not row.expect_refusal
        except ConfigurationError as e:
            if not row.expect_refusal:
                raise
            logger.info(f"{__module_name__} - {row.row} refused as expected: {e}")
            obtained, passed = math.nan, True
        except KronSolveError as e:
            logger.warning(f"{__module_name__} - {row.row} failed: {e}")
            obtained, passed = math.nan, False
        ratio = obtained / row.published if row.published else math.nan
        logger.info(
            f"{__module_name__} - {table_id} {row.row}: published {row.published:.2e}, "
            f"obtained {obtained:.2e} ({'pass' if passed else 'FAIL'})"
        )
        records.append(
            {
                "table": table_id,
                "row": row.row,
                "method": row.method,
                "published": row.published,
                "obtained": obtained,
                "ratio": ratio,
                "band": row.band,
                "passed": passed,
            }
        )

    table = pd.DataFrame(records, columns=REPRODUCTION_COLUMNS)
    if table_id == "fill-distance-trend" and len(table):
        table["passed"] = _strictly_decreasing(table["obtained"].tolist())
    if table_id == "runtime":
        scaling = _scaling_record(table)
        if scaling is not None:
            table = pd.concat([table, pd.DataFrame([scaling])], ignore_index=True)
    return table


__all__ = [
    "REPRODUCTION_COLUMNS",
    "ReproductionRow",
    "TABLES",
    "available_tables",
    "select_rows",
    "row_manifest",
    "reproduce_table",
    "scaling_exponent",
]
