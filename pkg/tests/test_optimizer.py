"""
Unit tests for the ADAM loop, patience stopping and run results
"""

import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.commands import solve_manifest
from backend.benchmarks.poisson import poisson_problem
from backend.config import LossConfig, RunConfig, build_manifest
from backend.exceptions import DivergenceError, NumericalError, ShapeError
from backend.optimizer import (
    TRACE_COLUMNS,
    AdamHyper,
    AdamState,
    PatienceTracker,
    adam_step,
    run,
)


class TestAdamStep:
    """Test suite for adam_step"""

    def test_first_step_moves_by_learning_rate(self):
        state = AdamState.initial((2,), AdamHyper(lr=0.1))
        state, updated = adam_step(state, np.array([4.0, -0.5]), np.zeros(2))
        # bias correction makes the first step lr * sign(g)
        np.testing.assert_allclose(updated, [-0.1, 0.1], rtol=1e-6)
        assert state.step_count == 1

    def test_inputs_are_not_modified(self):
        eta = np.ones(3)
        state = AdamState.initial((3,))
        adam_step(state, np.ones(3), eta)
        np.testing.assert_array_equal(eta, np.ones(3))
        np.testing.assert_array_equal(state.first_moment, np.zeros(3))

    def test_minimizes_quadratic(self):
        target = np.array([1.0, -2.0, 0.5])
        eta = np.zeros(3)
        state = AdamState.initial((3,), AdamHyper(lr=0.05))
        for _ in range(5000):
            state, eta = adam_step(state, 2 * (eta - target), eta)
        np.testing.assert_allclose(eta, target, atol=1e-2)

    def test_rejects_non_finite_gradient(self):
        state = AdamState.initial((2,))
        with pytest.raises(NumericalError):
            adam_step(state, np.array([np.nan, 0.0]), np.zeros(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ShapeError):
            adam_step(AdamState.initial((2,)), np.zeros(3), np.zeros(3))

    @pytest.mark.parametrize(
        "kwargs", [{"lr": 0.0}, {"beta1": 1.0}, {"beta2": -0.1}, {"eps_stability": 0}]
    )
    def test_rejects_bad_hyperparameters(self, kwargs):
        with pytest.raises(ValueError):
            AdamHyper(**kwargs)


class TestPatienceTracker:
    """Test suite for PatienceTracker"""

    def test_stops_after_patience_stale_steps(self):
        tracker = PatienceTracker(3, 1e-3, initial_loss=1.0)
        assert not tracker.update(0.5)
        assert not tracker.update(0.4999999)
        assert not tracker.update(0.6)
        assert tracker.update(0.5)

    def test_improvement_resets_counter(self):
        tracker = PatienceTracker(2, 0.0, initial_loss=1.0)
        assert not tracker.update(1.0)
        assert not tracker.update(0.9)
        assert tracker.stale_steps == 0
        assert tracker.reference == 0.9

    def test_rejects_non_positive_patience(self):
        with pytest.raises(ValueError):
            PatienceTracker(0, 1e-9, initial_loss=1.0)


class TestRun:
    """Test suite for optimizer.run"""

    @pytest.fixture
    def spec(self):
        """Linear benchmark with a closed-form truth"""
        return poisson_problem()

    @pytest.fixture
    def setup(self, spec):
        """Coarse grid, kernel and classification"""
        grid = spec.build_grid((9, 9))
        return grid, spec.kernel((0.25, 0.25), 1e-3), spec.classify(grid)

    def test_loss_improves_and_trace_is_logged(self, spec, setup):
        grid, kernel, classification = setup
        result = run(
            spec.problem,
            grid,
            kernel,
            classification,
            LossConfig(alpha=1e3, beta=1e3),
            RunConfig(max_iters=300, patience=1000, log_every=50, lr=1e-2),
        )
        assert result.stop_reason == "max_iters"
        assert result.iterations == 300
        assert list(result.trace.columns) == TRACE_COLUMNS
        assert list(result.trace["iter"]) == [0, 50, 100, 150, 200, 250, 300]
        assert result.best_loss < result.trace["total_loss"].iloc[0]
        assert result.best_iteration > 0
        assert result.rel_l2_min_logged <= result.rel_l2_best_loss
        assert np.isfinite(result.rel_l2_best_loss)
        assert result.fill_distance == pytest.approx(0.5 * np.hypot(0.125, 0.125))
        assert result.eta.shape == grid.shape

    def test_patience_stops_the_run(self, spec, setup):
        grid, kernel, classification = setup
        result = run(
            spec.problem,
            grid,
            kernel,
            classification,
            LossConfig(alpha=1.0, beta=1.0),
            RunConfig(max_iters=10_000, patience=5, min_improvement=0.5, log_every=7),
        )
        assert result.stop_reason == "patience"
        assert result.iterations == 5
        assert result.trace["iter"].iloc[-1] == 5

    def test_coefficient_parameterization_runs(self, spec, setup):
        grid, kernel, classification = setup
        result = run(
            spec.problem,
            grid,
            kernel,
            classification,
            LossConfig(alpha=1e3, beta=1e3),
            RunConfig(max_iters=20, log_every=10, parameterization="coefficients"),
        )
        assert result.parameterization == "coefficients"
        assert np.all(np.isfinite(result.eta))

    def test_random_initialization_is_seeded(self, spec, setup):
        grid, kernel, classification = setup
        config = RunConfig(max_iters=3, log_every=1, init="random", seed=7)
        args = (spec.problem, grid, kernel, classification, LossConfig())
        first = run(*args, config, compute_fill_distance=False)
        second = run(*args, config, compute_fill_distance=False)
        np.testing.assert_array_equal(first.eta, second.eta)
        assert first.fill_distance is None

    def test_divergence_carries_trace(self, spec, setup):
        grid, kernel, classification = setup
        with pytest.raises(DivergenceError) as info:
            run(
                spec.problem,
                grid,
                kernel,
                classification,
                LossConfig(alpha=1e6, beta=1e6),
                RunConfig(max_iters=50, lr=10.0, divergence_threshold=1e-6),
            )
        assert isinstance(info.value.trace, pd.DataFrame)
        assert info.value.trace["iter"].iloc[0] == 0

    def test_summary_and_trace_csv(self, spec, setup, tmp_path):
        grid, kernel, classification = setup
        result = run(
            spec.problem,
            grid,
            kernel,
            classification,
            LossConfig(alpha=10.0, beta=10.0),
            RunConfig(max_iters=10, log_every=5),
        )
        summary = result.to_summary()
        assert summary["grid"] == "9x9"
        assert summary["iterations"] == 10
        assert summary["seconds_per_iteration"] == pytest.approx(
            result.wall_time / 10
        )
        path = result.write_trace_csv(tmp_path / "nested" / "trace.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == TRACE_COLUMNS
        assert len(frame) == 3


def _default_manifest(tmp_path, benchmark, shape, **optimizer):
    return build_manifest(
        {
            "benchmark": benchmark,
            "grid": {"shape": list(shape)},
            "optimizer": {"max_iters": 20, "log_every": 10, **optimizer},
            "output": {"cache_dir": str(tmp_path / "cache")},
        }
    )


class TestDefaultSettings:
    """Test suite for runs with benchmark default weights and lengthscales"""

    @pytest.mark.parametrize(
        "benchmark_config, shape",
        [
            ({"name": "elliptic"}, (18, 18)),
            ({"name": "elliptic"}, (35, 35)),
            ({"name": "allen_cahn", "a": 15.0}, (49, 49)),
        ],
    )
    def test_large_weighted_losses_do_not_diverge(
        self, tmp_path, benchmark_config, shape
    ):
        result = solve_manifest(_default_manifest(tmp_path, benchmark_config, shape))
        assert result.iterations == 20
        assert result.stop_reason == "max_iters"
        assert result.best_loss <= result.trace["total_loss"].iloc[0]

    def test_identical_manifests_replay_exactly(self, tmp_path):
        manifest = _default_manifest(
            tmp_path, {"name": "elliptic"}, (18, 18), init="random", seed=3
        )
        first = solve_manifest(manifest)
        second = solve_manifest(manifest)
        columns = [c for c in TRACE_COLUMNS if c != "elapsed_seconds"]
        assert np.array_equal(
            first.trace[columns].to_numpy(), second.trace[columns].to_numpy()
        )
        assert np.array_equal(first.eta, second.eta)
        assert first.best_iteration == second.best_iteration
