"""
Unit tests for the finite-difference baseline
"""

import os
import sys
from unittest.mock import patch

import numpy as np
import pytest
from scipy.sparse.linalg import spsolve

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backend.benchmarks import burgers_problem, elliptic_problem, poisson_problem
from backend.benchmarks.fd_solver import (
    FdOperators,
    fd_solve,
    first_derivative_1d,
    newton_solve,
    second_derivative_1d,
)
from backend.exceptions import (
    ConfigurationError,
    NewtonConvergenceError,
    ParameterError,
    UnsupportedOrderError,
)
from backend.grid import build_grid
from backend.interpolant import MultiIndex


class TestStencils:
    """Test suite for the 1D difference stencils"""

    def test_first_difference_is_exact_on_quadratics(self):
        x = np.linspace(0.0, 1.0, 7)
        np.testing.assert_allclose(
            first_derivative_1d(7, x[1] - x[0]) @ x**2, 2 * x, atol=1e-12
        )

    def test_second_difference_is_exact_on_cubics(self):
        x = np.linspace(-1.0, 1.0, 9)
        np.testing.assert_allclose(
            second_derivative_1d(9, x[1] - x[0]) @ x**3, 6 * x, atol=1e-10
        )

    def test_short_axes_are_rejected(self):
        with pytest.raises(ParameterError):
            first_derivative_1d(2, 0.5)
        with pytest.raises(ParameterError):
            second_derivative_1d(3, 0.5)


class TestFdOperators:
    """Test suite for FdOperators"""

    def test_non_uniform_grid_is_rejected(self):
        grid = build_grid([0.0, 0.1, 0.5, 1.0], (4, 0.0, 1.0))
        with pytest.raises(ConfigurationError):
            FdOperators(grid)

    def test_order_three_is_unsupported(self):
        operators = FdOperators(build_grid((5, 0.0, 1.0), (5, 0.0, 1.0)))
        with pytest.raises(UnsupportedOrderError):
            operators.axis_matrix(0, 3)

    def test_channel_applies_along_axis(self):
        grid = build_grid((5, 0.0, 1.0), (6, 0.0, 1.0))
        x, y = grid.points().T
        operators = FdOperators(grid)
        np.testing.assert_allclose(
            operators.channel(MultiIndex((1, 0))) @ (x**2 + y), 2 * x, atol=1e-12
        )
        np.testing.assert_allclose(
            operators.channel(MultiIndex((0, 1))) @ (x**2 + y), 1.0, atol=1e-12
        )

    def test_channels_are_cached(self):
        operators = FdOperators(build_grid((5, 0.0, 1.0), (5, 0.0, 1.0)))
        alpha = MultiIndex((2, 0))
        assert operators.channel(alpha) is operators.channel(alpha)


class TestNewtonSolve:
    """Test suite for fd_solve and newton_solve"""

    def test_poisson_converges_at_second_order(self):
        spec = poisson_problem()
        errors = []
        for n in (17, 33):
            grid = spec.build_grid((n, n))
            solution = fd_solve(spec, grid)
            errors.append(solution.relative_error(spec.truth.on_grid(grid)))
        order = np.log2(errors[0] / errors[1])
        assert 1.7 < order < 2.3

    def test_linear_problem_needs_one_step(self):
        spec = poisson_problem()
        solution = fd_solve(spec, spec.build_grid((9, 9)))
        assert solution.iterations == 1
        assert solution.residual_history[-1] <= 1e-8
        assert solution.values.shape == (9, 9)

    def test_nonlinear_elliptic_is_accurate(self):
        spec = elliptic_problem()
        grid = spec.build_grid((33, 33))
        solution = fd_solve(spec, grid)
        assert solution.iterations > 1
        assert solution.relative_error(spec.truth.on_grid(grid)) < 0.05
        assert solution.wall_time > 0.0

    def test_iteration_limit_raises_with_history(self):
        spec = elliptic_problem()
        with pytest.raises(NewtonConvergenceError) as info:
            fd_solve(spec, spec.build_grid((17, 17)), max_newton=1)
        assert len(info.value.residual_history) == 2

    def test_step_that_never_reduces_residual_is_not_taken(self):
        spec = poisson_problem()

        def uphill(matrix, rhs):
            return -spsolve(matrix, rhs)

        with patch("backend.benchmarks.fd_solver.spsolve", side_effect=uphill):
            with pytest.raises(NewtonConvergenceError, match="stalled") as info:
                fd_solve(spec, spec.build_grid((9, 9)))
        assert len(info.value.residual_history) == 1

    def test_time_dependent_problem_is_rejected(self):
        with pytest.raises(ConfigurationError):
            fd_solve(burgers_problem())

    def test_off_grid_boundary_is_rejected(self):
        spec = elliptic_problem()
        grid = spec.build_grid((17, 17))
        with pytest.raises(ConfigurationError):
            newton_solve(spec.problem, spec.classify(grid, "circle"))
