__module_name__ = "benchmarks.fd_solver"

"""
Second-order finite-difference baseline for the steady benchmarks.

Every derivative channel becomes a sparse matrix on the uniform grid
(Kronecker products of 1D stencils, axis 0 slowest), and the nonlinear
system is solved with damped Newton iterations and direct sparse solves.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray
from scipy.sparse.linalg import spsolve

from ..exceptions import (
    ConfigurationError,
    NewtonConvergenceError,
    NumericalError,
    ParameterError,
    UnsupportedOrderError,
)
from ..grid import DomainClassification, Grid
from ..interpolant import MultiIndex
from ..objective import PdeProblem, ResidualCombiner
from .base import BenchmarkSpec
from .metrics import relative_l2_values

logger = logging.getLogger(__name__)

MAX_HALVINGS = 10


def first_derivative_1d(n: int, h: float) -> sp.csr_matrix:
    """Centered first difference with one-sided second-order end rows."""
    if n < 3:
        raise ParameterError(f"first-difference stencil needs n >= 3, got {n}")
    d = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        d[i, i - 1] = -1.0
        d[i, i + 1] = 1.0
    d[0, 0:3] = [-3.0, 4.0, -1.0]
    d[n - 1, n - 3 :] = [1.0, -4.0, 3.0]
    return (d / (2.0 * h)).tocsr()


def second_derivative_1d(n: int, h: float) -> sp.csr_matrix:
    """Centered second difference with one-sided second-order end rows."""
    if n < 4:
        raise ParameterError(f"second-difference stencil needs n >= 4, got {n}")
    d = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        d[i, i - 1 : i + 2] = [1.0, -2.0, 1.0]
    d[0, 0:4] = [2.0, -5.0, 4.0, -1.0]
    d[n - 1, n - 4 :] = [-1.0, 4.0, -5.0, 2.0]
    return (d / h**2).tocsr()


class FdOperators:
    """Sparse channel matrices on one uniform grid, built on first use."""

    def __init__(self, grid: Grid):
        if not grid.is_uniform():
            raise ConfigurationError(
                f"finite differences need a uniform grid: {grid!r}"
            )
        self.grid = grid
        self._axis: Dict[Tuple[int, int], sp.csr_matrix] = {}
        self._channels: Dict[MultiIndex, sp.csr_matrix] = {}

    def axis_matrix(self, axis: int, order: int) -> sp.csr_matrix:
        key = (axis, order)
        if key not in self._axis:
            n = self.grid.shape[axis]
            h = self.grid.spacing[axis]
            if order == 0:
                self._axis[key] = sp.identity(n, format="csr")
            elif order == 1:
                self._axis[key] = first_derivative_1d(n, h)
            elif order == 2:
                self._axis[key] = second_derivative_1d(n, h)
            else:
                raise UnsupportedOrderError(
                    f"finite differences support orders up to 2, got {order}"
                )
        return self._axis[key]

    def channel(self, alpha: MultiIndex) -> sp.csr_matrix:
        if alpha not in self._channels:
            matrix = self.axis_matrix(0, alpha[0])
            for axis in range(1, self.grid.ndim):
                matrix = sp.kron(matrix, self.axis_matrix(axis, alpha[axis]))
            self._channels[alpha] = sp.csr_matrix(matrix)
        return self._channels[alpha]


@dataclass
class FdSolution:
    grid: Grid
    values: NDArray[np.float64]
    iterations: int
    residual_history: List[float] = field(default_factory=list)
    wall_time: float = 0.0

    def relative_error(self, truth: ArrayLike) -> float:
        return relative_l2_values(self.values, truth)


class _RowBlock:
    def __init__(
        self,
        combiner: ResidualCombiner,
        rows: NDArray[np.intp],
        points: NDArray[np.float64],
        operators: FdOperators,
    ):
        self.combiner = combiner
        self.rows = rows
        self.points = points
        self.matrices = [operators.channel(c)[rows] for c in combiner.channels]
        self.forcing = combiner.forcing(points)

    def evaluate(self, u: NDArray[np.float64]):
        z = [m @ u for m in self.matrices]
        return self.combiner.evaluate(z, self.points, self.forcing)


def _row_embedding(rows: NDArray[np.intp], size: int) -> sp.csr_matrix:
    """(size, len(rows)) matrix scattering block rows into the full system."""
    ones = np.ones(rows.size)
    return sp.csr_matrix(
        (ones, (rows, np.arange(rows.size))), shape=(size, rows.size)
    )


def _system(blocks: Sequence[_RowBlock], inactive: NDArray[np.intp], size: int):
    embeddings = [_row_embedding(block.rows, size) for block in blocks]
    inactive_diagonal = np.zeros(size)
    inactive_diagonal[inactive] = 1.0

    def residual(u: NDArray[np.float64]) -> NDArray[np.float64]:
        out = np.zeros(size)
        for block in blocks:
            out[block.rows] = block.evaluate(u)[0]
        out[inactive] = u[inactive]
        return out

    def jacobian(u: NDArray[np.float64]) -> sp.csr_matrix:
        jac = sp.diags(inactive_diagonal, format="csr")
        for block, embed in zip(blocks, embeddings):
            _, partials = block.evaluate(u)
            for p, matrix in zip(partials, block.matrices):
                jac = jac + embed @ (sp.diags(p) @ matrix)
        return sp.csr_matrix(jac)

    return residual, jacobian


def newton_solve(
    problem: PdeProblem,
    classification: DomainClassification,
    initial: Optional[ArrayLike] = None,
    newton_tol: float = 1e-8,
    max_newton: int = 50,
) -> FdSolution:
    """
    Damped Newton on the finite-difference system of ``problem``.

    Interior rows hold P(u) - f, boundary rows the boundary residual and
    inactive grid sites the trivial equation u = 0. Each step is halved up
    to ten times until the residual max-norm decreases.

    Raises:
        ConfigurationError: the classification carries off-grid boundary points
        NewtonConvergenceError: no convergence within ``max_newton`` steps
    """
    if classification.boundary_sample.shape[0]:
        raise ConfigurationError(
            "finite differences need boundary conditions on grid sites"
        )
    grid = classification.grid
    operators = FdOperators(grid)
    points = grid.points()
    interior = np.flatnonzero(classification.interior_mask.ravel())
    boundary = np.flatnonzero(classification.boundary_mask.ravel())
    inactive = np.flatnonzero(
        ~(classification.interior_mask | classification.boundary_mask).ravel()
    )
    blocks = [
        _RowBlock(problem.interior, interior, points[interior], operators),
        _RowBlock(problem.boundary, boundary, points[boundary], operators),
    ]
    residual, jacobian = _system(blocks, inactive, grid.size)

    u = (
        np.zeros(grid.size)
        if initial is None
        else np.asarray(initial, dtype=np.float64).reshape(-1).copy()
    )
    start = time.perf_counter()
    r = residual(u)
    norm = float(np.max(np.abs(r)))
    history = [norm]
    for step in range(1, max_newton + 1):
        if norm <= newton_tol:
            break
        delta = spsolve(jacobian(u), -r)
        if not np.all(np.isfinite(delta)):
            raise NumericalError(f"singular Newton system at step {step}")
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = u + scale * delta
            trial_r = residual(trial)
            trial_norm = float(np.max(np.abs(trial_r)))
            if trial_norm < norm:
                break
            scale *= 0.5
        else:
            raise NewtonConvergenceError(
                f"{problem.name}: Newton stalled at step {step}, no damped step "
                f"below |F| = {norm:.3e}",
                residual_history=history,
            )
        u, r, norm = trial, trial_r, trial_norm
        history.append(norm)
        logger.debug(
            f"{__module_name__} - Newton step {step}: |F| = {norm:.3e} "
            f"(damping {scale:g})"
        )
    if norm > newton_tol:
        raise NewtonConvergenceError(
            f"{problem.name}: Newton did not reach {newton_tol:g} in "
            f"{max_newton} steps (|F| = {norm:.3e})",
            residual_history=history,
        )
    wall_time = time.perf_counter() - start
    logger.info(
        f"{__module_name__} - {problem.name} on {grid!r}: converged in "
        f"{len(history) - 1} Newton steps ({wall_time:.2f}s)"
    )
    return FdSolution(
        grid=grid,
        values=u.reshape(grid.shape),
        iterations=len(history) - 1,
        residual_history=history,
        wall_time=wall_time,
    )


def fd_solve(
    spec: BenchmarkSpec,
    grid: Optional[Grid] = None,
    newton_tol: float = 1e-8,
    max_newton: int = 50,
    initial: Optional[ArrayLike] = None,
) -> FdSolution:
    """
    Solve a steady benchmark on a uniform box grid with finite differences.

    Raises:
        ConfigurationError: time-dependent benchmark or non-uniform grid
    """
    if not spec.steady:
        raise ConfigurationError(
            f"the finite-difference baseline only handles steady problems, "
            f"not {spec.name}"
        )
    grid = grid if grid is not None else spec.build_grid()
    if not grid.is_uniform():
        raise ConfigurationError(f"finite differences need a uniform grid: {grid!r}")
    return newton_solve(
        spec.problem,
        spec.classify(grid),
        initial=initial,
        newton_tol=newton_tol,
        max_newton=max_newton,
    )


__all__ = [
    "first_derivative_1d",
    "second_derivative_1d",
    "FdOperators",
    "FdSolution",
    "newton_solve",
    "fd_solve",
]
