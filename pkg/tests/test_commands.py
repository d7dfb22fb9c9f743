"""
Unit tests for the solve, sweep and truth commands and their reports
"""

import os
import sys
from types import SimpleNamespace
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.commands import (
    expand_sweep,
    prepare_run,
    solve_command,
    solve_manifest,
    sweep_command,
    truth_command,
)
from app.config import load_manifest
from app.reports import format_summary
from backend.config import build_manifest
from backend.exceptions import ConfigurationError, DivergenceError
from backend.storage import read_array


@pytest.fixture
def poisson_manifest(tmp_path):
    """Small Poisson run writing under tmp_path"""
    return build_manifest(
        {
            "benchmark": {"name": "poisson"},
            "grid": {"shape": [9, 9]},
            "optimizer": {"max_iters": 10, "log_every": 5},
            "output": {
                "out_dir": str(tmp_path / "out"),
                "cache_dir": str(tmp_path / "cache"),
            },
        }
    )


def _fake_result(alpha):
    return SimpleNamespace(
        grid_shape=(9, 9),
        rel_l2_min_logged=1e-3 / alpha,
        rel_l2_best_loss=2e-3 / alpha,
        best_loss=float(alpha),
        iterations=10,
        wall_time=0.5,
        stop_reason="max_iters",
    )


class TestExpandSweep:
    """Test suite for expand_sweep"""

    def test_cartesian_product(self):
        combos = expand_sweep({"alpha": [1.0, 2.0], "grid": [(9, 9), (17, 17)]}, 10)
        assert len(combos) == 4
        assert {"alpha": 2.0, "grid": (17, 17)} in combos

    def test_duplicates_are_dropped(self, caplog):
        with caplog.at_level("WARNING"):
            combos = expand_sweep({"nugget": [1e-8, 1e-8, 1e-10]}, 10)
        assert [c["nugget"] for c in combos] == [1e-8, 1e-10]
        assert "duplicate" in caplog.text

    def test_cap_is_enforced(self):
        with pytest.raises(ConfigurationError, match="cap"):
            expand_sweep({"alpha": [1.0, 2.0], "beta": [1.0, 2.0]}, 3)

    def test_unknown_axis(self):
        with pytest.raises(ConfigurationError, match="unknown sweep axis"):
            expand_sweep({"lr": [0.1]}, 10)

    def test_empty_axis(self):
        with pytest.raises(ConfigurationError):
            expand_sweep({"alpha": []}, 10)


class TestSweepCommand:
    """Test suite for sweep_command"""

    def test_rows_are_sorted_and_written(self, poisson_manifest, tmp_path):
        def fake_solve(manifest):
            return _fake_result(manifest.loss.alpha)

        with patch("app.commands.solve_manifest", side_effect=fake_solve):
            table = sweep_command(poisson_manifest, {"alpha": [100.0, 10.0]})
        assert list(table["alpha"]) == [10.0, 100.0]
        assert list(table["grid"]) == ["9x9", "9x9"]
        assert list(table["status"]) == ["max_iters", "max_iters"]
        written = pd.read_csv(tmp_path / "out" / "sweep.csv")
        assert len(written) == 2

    def test_diverged_point_is_reported(self, poisson_manifest, tmp_path):
        def fake_solve(manifest):
            if manifest.loss.alpha > 50:
                raise DivergenceError("loss exploded")
            return _fake_result(manifest.loss.alpha)

        with patch("app.commands.solve_manifest", side_effect=fake_solve):
            table = sweep_command(
                poisson_manifest,
                {"alpha": [10.0, 100.0]},
                out_path=tmp_path / "sweep.csv",
            )
        assert list(table["status"]) == ["max_iters", "diverged"]
        assert np.isnan(table["best_loss"].iloc[1])

    def test_lengthscale_pairs_reach_the_kernel(self, poisson_manifest, tmp_path):
        seen = []

        def fake_solve(manifest):
            seen.append(tuple(manifest.kernel.lengthscales))
            return _fake_result(1.0)

        with patch("app.commands.solve_manifest", side_effect=fake_solve):
            table = sweep_command(
                poisson_manifest,
                {"lengthscale": [(0.1, 0.2), 0.3]},
                out_path=tmp_path / "sweep.csv",
            )
        assert sorted(seen) == [(0.1, 0.2), (0.3,)]
        assert set(table["lengthscale"]) == {"0.1:0.2", 0.3}


class TestSolveCommand:
    """Test suite for prepare_run, solve_command and truth_command"""

    def test_prepare_run_fills_benchmark_defaults(self, poisson_manifest):
        prepared = prepare_run(poisson_manifest)
        assert prepared.grid.shape == (9, 9)
        assert prepared.kernel.lengthscales == (0.2, 0.2)
        assert prepared.loss_config.alpha == prepared.spec.defaults.alpha

    def test_unsupported_domain(self, poisson_manifest):
        manifest = poisson_manifest.model_copy(deep=True)
        manifest.benchmark.domain = "circle"
        with pytest.raises(ConfigurationError):
            prepare_run(manifest)

    def test_report_files(self, poisson_manifest, tmp_path):
        result = solve_command(poisson_manifest)
        out = tmp_path / "out"
        summary = (out / "summary.txt").read_text(encoding="utf-8")
        assert "benchmark: poisson" in summary
        assert "iterations: 10" in summary
        assert list(pd.read_csv(out / "trace.csv")["iter"]) == [0, 5, 10]
        stored = read_array(out / "eta.bin")
        np.testing.assert_array_equal(stored.values, result.eta)
        assert stored.params["iterations"] == 10.0
        assert load_manifest(out / "manifest.ini") == poisson_manifest

    def test_timing_only_skips_error_tracking(self, poisson_manifest):
        with patch(
            "backend.benchmarks.base.BenchmarkSpec.evaluation_set",
            side_effect=AssertionError,
        ):
            result = solve_manifest(poisson_manifest, timing_only=True)
        assert result.iterations == 10
        assert result.rel_l2_best_loss is None
        assert result.fill_distance is None
        assert result.trace["rel_l2_error"].isna().all()

    def test_truth_table(self, poisson_manifest, tmp_path):
        path = truth_command(poisson_manifest)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["x0", "x1", "u"]
        assert len(frame) == 33 * 33
        expected = np.sin(np.pi * frame["x0"]) * np.sin(np.pi * frame["x1"])
        np.testing.assert_allclose(frame["u"], expected, atol=1e-12)
        assert (tmp_path / "out" / "truth.bin").exists()


class TestFormatSummary:
    """Test suite for format_summary"""

    def test_floats_and_missing_values(self):
        text = format_summary({"best_loss": 0.5, "fill_distance": None, "grid": "9x9"})
        assert text == "best_loss: 5.000000e-01\nfill_distance: n/a\ngrid: 9x9\n"
