__module_name__ = "dense"

"""
Naive dense-Gram operators.

Assembles the full M × M Gram matrix point by point and factors it directly.
Used as the reference the Kronecker path is checked against and for runtime
comparisons; grids above DENSE_POINT_LIMIT points are refused.
"""

import logging
from typing import Dict, Mapping, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .exceptions import ConfigurationError, NumericalError, ShapeError
from .grid import Grid
from .interpolant import (
    AlphaLike,
    GridOperators,
    MultiIndex,
    PointEvaluator,
    as_multi_index,
)
from .kernel1d import ProductKernel
from .tensor_kron import DenseTensor

logger = logging.getLogger(__name__)

DENSE_POINT_LIMIT = 10_000


def dense_gram(
    kernel: ProductKernel, points: ArrayLike, nuggets: Sequence[float]
) -> NDArray[np.float64]:
    """
    Gram matrix over explicit points, nuggets folded in per axis.

    Entry (a, b) is prod_j (k_j(p_aj, p_bj) + nugget_j [p_aj == p_bj]), which
    equals (K_1 + n_1 I) ⊗ ... ⊗ (K_d + n_d I) on a grid without using the
    factorization.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    gram = np.ones((pts.shape[0], pts.shape[0]))
    for j in range(pts.shape[1]):
        coords = pts[:, j]
        factor = kernel.axis_kernel(j).matrix(coords, coords)
        factor += nuggets[j] * np.equal.outer(coords, coords)
        gram *= factor
    return gram


class DensePointEvaluator(PointEvaluator):
    """Off-grid evaluation with an explicit (n, M) matrix."""

    def __init__(self, matrix: NDArray[np.float64], shape: Sequence[int]):
        self.matrix = matrix
        self.shape = tuple(shape)

    @property
    def num_points(self) -> int:
        return int(self.matrix.shape[0])

    def apply(self, values: DenseTensor) -> NDArray[np.float64]:
        return self.matrix @ np.asarray(values, dtype=np.float64).reshape(-1)

    def adjoint(self, weights: ArrayLike) -> DenseTensor:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (self.num_points,):
            raise ShapeError(
                f"expected {self.num_points} point weights, got shape {weights.shape}"
            )
        return (self.matrix.T @ weights).reshape(self.shape)


class DenseGramOperators(GridOperators):
    """GridOperators backed by an explicitly assembled Gram matrix."""

    def __init__(
        self,
        grid: Grid,
        kernel: ProductKernel,
        max_points: int = DENSE_POINT_LIMIT,
    ):
        super().__init__(grid, kernel)
        if grid.size > max_points:
            gib = 8.0 * grid.size**2 / 2**30
            raise ConfigurationError(
                f"naive dense mode refuses a grid of {grid.size} points "
                f"(limit {max_points}); its Gram matrix alone needs {gib:.1f} GiB"
            )
        self._points = grid.points()
        self._nuggets = kernel.axis_nuggets(grid.ndim)
        self.gram = dense_gram(kernel, self._points, self._nuggets)
        try:
            self._factor = scipy.linalg.cho_factor(
                self.gram, lower=True, check_finite=False
            )
        except np.linalg.LinAlgError as e:
            raise NumericalError(
                f"dense Gram of {grid.size} points is not positive definite; "
                f"try a larger nugget"
            ) from e
        self._operators: Dict[MultiIndex, NDArray[np.float64]] = {}
        logger.info(
            f"{__module_name__} - Assembled dense Gram for {grid!r} "
            f"({grid.size} points)"
        )

    def _rows(self, points: NDArray[np.float64], alpha: MultiIndex) -> NDArray:
        phi = self.kernel.evaluate(points, self._points, alpha.orders)
        return np.ascontiguousarray(
            scipy.linalg.cho_solve(self._factor, phi.T, check_finite=False).T
        )

    def operator(self, alpha: AlphaLike) -> NDArray[np.float64]:
        """[d^alpha kappa(M, M)] K_MM^{-1}."""
        alpha = as_multi_index(alpha, self.grid.ndim)
        if alpha not in self._operators:
            self._operators[alpha] = self._rows(self._points, alpha)
        return self._operators[alpha]

    def apply(
        self, values: DenseTensor, alphas: Sequence[MultiIndex]
    ) -> Dict[MultiIndex, DenseTensor]:
        flat = self.check_values(values).reshape(-1)
        out: Dict[MultiIndex, DenseTensor] = {}
        for alpha in alphas:
            alpha = as_multi_index(alpha, self.grid.ndim)
            out[alpha] = (self.operator(alpha) @ flat).reshape(self.grid.shape)
        return out

    def apply_adjoint(
        self, cotangents: Mapping[MultiIndex, DenseTensor]
    ) -> DenseTensor:
        total = np.zeros(self.grid.size)
        for alpha, cot in cotangents.items():
            total += self.operator(alpha).T @ self.check_values(cot).reshape(-1)
        return total.reshape(self.grid.shape)

    def solve(self, values: DenseTensor) -> DenseTensor:
        flat = self.check_values(values).reshape(-1)
        solved = scipy.linalg.cho_solve(self._factor, flat, check_finite=False)
        return solved.reshape(self.grid.shape)

    def matvec(self, values: DenseTensor) -> DenseTensor:
        flat = self.check_values(values).reshape(-1)
        return (self.gram @ flat).reshape(self.grid.shape)

    def point_evaluator(self, points: ArrayLike, alpha: AlphaLike) -> PointEvaluator:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.grid.ndim:
            raise ShapeError(
                f"points have {pts.shape[1]} coordinates, grid has {self.grid.ndim}"
            )
        self._warn_extrapolation(pts)
        alpha = as_multi_index(alpha, self.grid.ndim)
        return DensePointEvaluator(self._rows(pts, alpha), self.grid.shape)


__all__ = [
    "DENSE_POINT_LIMIT",
    "dense_gram",
    "DensePointEvaluator",
    "DenseGramOperators",
]
