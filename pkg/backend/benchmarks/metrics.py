__module_name__ = "benchmarks.metrics"

"""Relative L2 errors and the evaluation sets they are measured on."""

from typing import Any, Callable, Dict, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import InputError, ShapeError
from ..grid import DEFAULT_SAMPLE_REFINEMENT, DomainClassification, Grid
from ..interpolant import DiffMatrixCache, GridOperators, MultiIndex
from ..tensor_kron import DenseTensor

PointFunction = Callable[[NDArray[np.float64]], ArrayLike]


def relative_l2_values(candidate: ArrayLike, truth: ArrayLike) -> float:
    """
    sqrt(mean((candidate - truth)^2)) / sqrt(mean(truth^2)).

    Raises:
        InputError: empty inputs or a truth with zero norm
        ShapeError: the two arrays differ in size
    """
    cand = np.asarray(candidate, dtype=np.float64).reshape(-1)
    true = np.asarray(truth, dtype=np.float64).reshape(-1)
    if true.size == 0:
        raise InputError("relative L2 error needs at least one evaluation point")
    if cand.shape != true.shape:
        raise ShapeError(
            f"candidate has {cand.size} values, truth has {true.size}"
        )
    denominator = np.sqrt(np.mean(true * true))
    if denominator == 0.0:
        raise InputError("relative L2 error is undefined for a zero truth")
    return float(np.sqrt(np.mean((cand - true) ** 2)) / denominator)


def relative_l2(
    candidate: PointFunction, truth: PointFunction, eval_points: ArrayLike
) -> float:
    """Relative L2 error of ``candidate`` against ``truth`` at ``eval_points``."""
    points = np.atleast_2d(np.asarray(eval_points, dtype=np.float64))
    if points.size == 0:
        raise InputError("relative L2 error needs at least one evaluation point")
    return relative_l2_values(candidate(points), truth(points))


class EvaluationSet:
    """
    Fixed points and truth values for relative L2 errors.

    When built on a tensor grid, Kronecker operators evaluate through per-axis
    row matrices instead of point-wise rows.
    """

    def __init__(
        self,
        points: NDArray[np.float64],
        truth: NDArray[np.float64],
        grid: Optional[Grid] = None,
        mask: Optional[NDArray[np.bool_]] = None,
    ):
        self.points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        self.truth = np.asarray(truth, dtype=np.float64).reshape(-1)
        if self.truth.shape[0] != self.points.shape[0]:
            raise ShapeError(
                f"{self.truth.shape[0]} truth values for {self.points.shape[0]} points"
            )
        self.grid = grid
        self.mask = None if mask is None else np.asarray(mask, dtype=bool).reshape(-1)
        self._evaluators: Dict[int, Any] = {}

    @classmethod
    def refined(
        cls,
        classification: DomainClassification,
        truth: PointFunction,
        factor: int = DEFAULT_SAMPLE_REFINEMENT,
    ) -> "EvaluationSet":
        """The collocation grid refined ``factor`` times, restricted to the domain."""
        target = classification.grid.refine(factor)
        points = target.points()
        mask = None
        if classification.membership is not None:
            mask = np.asarray(classification.membership(points), dtype=bool)
            points = points[mask]
        return cls(points, truth(points), grid=target, mask=mask)

    @classmethod
    def on_grid(
        cls,
        grid: Grid,
        truth_values: ArrayLike,
        mask: Optional[NDArray[np.bool_]] = None,
    ) -> "EvaluationSet":
        """Truth tabulated on every point of a tensor grid, optionally masked."""
        points = grid.points()
        truth = np.asarray(truth_values, dtype=np.float64).reshape(-1)
        if mask is not None:
            mask = np.asarray(mask, dtype=bool).reshape(-1)
            points, truth = points[mask], truth[mask]
        return cls(points, truth, grid=grid, mask=mask)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def predict(self, operators: GridOperators, eta: DenseTensor) -> NDArray:
        if self.grid is not None and isinstance(operators, DiffMatrixCache):
            values = operators.evaluate_on(eta, self.grid).reshape(-1)
            return values[self.mask] if self.mask is not None else values
        key = id(operators)
        if key not in self._evaluators:
            zeros = MultiIndex.zeros(operators.grid.ndim)
            self._evaluators[key] = operators.point_evaluator(self.points, zeros)
        return self._evaluators[key].apply(eta)

    def error(self, operators: GridOperators, eta: DenseTensor) -> float:
        return relative_l2_values(self.predict(operators, eta), self.truth)


__all__ = ["relative_l2", "relative_l2_values", "EvaluationSet"]
