"""
Unit tests for the published-table reproduction harness
"""

import math
import os
import sys
from unittest.mock import MagicMock

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.reproduction import (
    REPRODUCTION_COLUMNS,
    TABLES,
    ReproductionRow,
    _passed,
    available_tables,
    reproduce_table,
    row_manifest,
    scaling_exponent,
    select_rows,
)
from backend.config import RunManifest
from backend.exceptions import ConfigurationError, NumericalError

ELLIPTIC = {"name": "elliptic"}


class TestTables:
    """Test suite for the table catalogue and row selection"""

    def test_every_cli_table_exists(self):
        assert available_tables() == [
            "easy-small",
            "hard-small",
            "fd-comparison",
            "fill-distance-trend",
            "grid-shape",
            "coefficient-ablation",
            "sensitivity",
            "irregular",
            "runtime",
        ]

    def test_row_names_are_unique(self):
        for table_id, rows in TABLES.items():
            names = [r.row for r in rows]
            assert len(names) == len(set(names)), table_id

    def test_manual_rows_are_skipped_by_default(self):
        names = [r.row for r in select_rows("easy-small")]
        assert "elliptic-18x18" in names
        assert "burgers-70x70" not in names

    def test_named_rows_include_manual_ones(self):
        rows = select_rows("easy-small", ["burgers-70x70"])
        assert rows[0].manual
        assert rows[0].published == pytest.approx(3.21e-04)

    def test_unknown_table(self):
        with pytest.raises(ConfigurationError, match="unknown table"):
            select_rows("table-9")

    def test_unknown_row(self):
        with pytest.raises(ConfigurationError, match="Available rows"):
            select_rows("easy-small", ["elliptic-17x17"])


class TestAcceptance:
    """Test suite for the acceptance bands"""

    def test_solver_rows_accept_anything_below_band(self):
        row = ReproductionRow("r", ELLIPTIC, (18, 18), published=1e-2)
        assert _passed(row, 1e-6)
        assert _passed(row, 9e-2)
        assert not _passed(row, 2e-1)
        assert not _passed(row, math.nan)

    def test_fd_rows_need_the_same_magnitude(self):
        row = ReproductionRow("r", ELLIPTIC, (18, 18), 3e-2, method="fd", band=2.0)
        assert _passed(row, 2e-2)
        assert not _passed(row, 1e-2)
        assert not _passed(row, 7e-2)

    def test_runtime_rows_only_need_a_measurement(self):
        row = ReproductionRow("r", ELLIPTIC, (18, 18), 1e-3, method="runtime")
        assert row.metric == "seconds_per_iteration"
        assert _passed(row, 5.0)
        assert not _passed(row, math.inf)

    def test_large_grid_runtime_has_a_ceiling(self):
        row = select_rows("runtime", ["burgers-structured-360x120"])[0]
        assert row.shape == (360, 120)
        assert row.band == pytest.approx(0.05)
        assert _passed(row, 0.01)
        assert not _passed(row, 0.06)


class TestScalingExponent:
    """Test suite for scaling_exponent"""

    def test_linear_cost_gives_exponent_one(self):
        exponent = scaling_exponent(((120, 40), 1e-3), ((360, 120), 9e-3))
        assert exponent == pytest.approx(1.0)

    def test_quadratic_cost_gives_exponent_two(self):
        exponent = scaling_exponent(((120, 40), 1e-3), ((360, 120), 8.1e-2))
        assert exponent == pytest.approx(2.0)

    def test_missing_timing_gives_nan(self):
        assert math.isnan(scaling_exponent(((9, 9), 0.0), ((17, 17), 1e-3)))
        assert math.isnan(scaling_exponent(((9, 9), 1e-3), ((17, 17), math.nan)))

    def test_equal_sizes_are_rejected(self):
        with pytest.raises(ConfigurationError):
            scaling_exponent(((9, 9), 1e-3), ((9, 9), 2e-3))


class TestRowManifest:
    """Test suite for row_manifest"""

    def test_row_settings_are_applied(self):
        row = select_rows("hard-small", ["burgers-120x40"])[0]
        manifest = row_manifest(row, RunManifest())
        assert manifest.benchmark.name == "burgers"
        assert manifest.benchmark.nu == 0.001
        assert manifest.grid.shape == [120, 40]
        assert manifest.kernel.lengthscales == [0.02, 0.1]

    def test_runtime_rows_use_fixed_iterations(self):
        row = select_rows("runtime", ["allen_cahn-dense-49x49"])[0]
        manifest = row_manifest(row, RunManifest())
        assert manifest.optimizer.max_iters == 200
        assert manifest.output.operator_mode == "dense"
        assert row_manifest(row, RunManifest(), max_iters=50).optimizer.max_iters == 50

    def test_iteration_cap(self):
        row = select_rows("easy-small", ["elliptic-25x25"])[0]
        assert row_manifest(row, RunManifest(), max_iters=20).optimizer.max_iters == 20


class TestReproduceTable:
    """Test suite for reproduce_table with a stubbed runner"""

    def test_rows_and_ratios(self):
        runner = MagicMock(return_value=1e-3)
        table = reproduce_table(
            "easy-small",
            RunManifest(),
            rows=["elliptic-18x18", "elliptic-25x25"],
            runner=runner,
        )
        assert list(table.columns) == REPRODUCTION_COLUMNS
        assert list(table["passed"]) == [True, False]
        assert table["ratio"].iloc[0] == pytest.approx(1e-3 / 1.26e-02)
        assert runner.call_count == 2

    def test_fill_distance_trend_needs_decreasing_errors(self):
        errors = iter([1e-2, 1e-4, 2e-4])
        table = reproduce_table(
            "fill-distance-trend",
            RunManifest(),
            runner=lambda row, manifest: next(errors),
        )
        assert list(table["passed"]) == [True, True, False]

    @pytest.mark.parametrize(
        "large_seconds, expected",
        [(9e-3, [True, True, True]), (1e-1, [True, False, False])],
    )
    def test_runtime_table_reports_scaling(self, large_seconds, expected):
        timings = {
            "burgers-structured-120x40": 1e-3,
            "burgers-structured-360x120": large_seconds,
        }
        table = reproduce_table(
            "runtime",
            RunManifest(),
            rows=list(timings),
            runner=lambda row, manifest: timings[row.row],
        )
        assert list(table["row"]) == [*timings, "burgers-structured-scaling"]
        assert list(table["passed"]) == expected
        assert table["method"].iloc[-1] == "scaling"

    def test_scaling_needs_both_grids(self):
        table = reproduce_table(
            "runtime",
            RunManifest(),
            rows=["burgers-structured-120x40"],
            runner=MagicMock(return_value=1e-3),
        )
        assert list(table["row"]) == ["burgers-structured-120x40"]

    def test_expected_refusal_passes(self):
        def refuse(row, manifest):
            raise ConfigurationError("dense operators refuse 22500 points")

        table = reproduce_table(
            "runtime", RunManifest(), rows=["allen_cahn-dense-150x150"], runner=refuse
        )
        assert table["passed"].iloc[0]
        assert math.isnan(table["obtained"].iloc[0])

    def test_unexpected_configuration_error_propagates(self):
        def refuse(row, manifest):
            raise ConfigurationError("bad domain")

        with pytest.raises(ConfigurationError):
            reproduce_table(
                "easy-small", RunManifest(), rows=["elliptic-18x18"], runner=refuse
            )

    def test_solver_failure_marks_row_failed(self):
        def diverge(row, manifest):
            raise NumericalError("non-finite loss")

        table = reproduce_table(
            "easy-small", RunManifest(), rows=["elliptic-18x18"], runner=diverge
        )
        assert not table["passed"].iloc[0]
