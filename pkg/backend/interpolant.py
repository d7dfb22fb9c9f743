__module_name__ = "interpolant"

"""
The kernel interpolant u(x; eta) = kappa(x, M) K_MM^{-1} eta and its derivatives.

On the grid, a derivative channel is a chain of mode products with per-axis
differentiation matrices D_j^(r) = [d^r k_j(s^j, s^j)] K_j^{-1}. Off the
grid, the same chain is applied with row vectors d^r k_j(x_j, s^j) K_j^{-1}.
Neither path ever forms an M × M matrix.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    ConfigurationError,
    InputError,
    ParameterError,
    ShapeError,
    UnsupportedOrderError,
)
from .grid import Grid
from .kernel1d import MAX_DERIVATIVE_ORDER, AxisGram, ProductKernel
from .tensor_kron import DenseTensor, kron_matvec, kron_solve, mode_multiply

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultiIndex:
    """Per-axis derivative orders (alpha_1, ..., alpha_d), each at most 2."""

    orders: Tuple[int, ...]

    def __post_init__(self) -> None:
        orders = tuple(int(o) for o in self.orders)
        for o in orders:
            if o < 0:
                raise ParameterError(f"derivative orders must be nonnegative: {orders}")
            if o > MAX_DERIVATIVE_ORDER:
                raise UnsupportedOrderError(
                    f"axis order {o} in {orders} exceeds {MAX_DERIVATIVE_ORDER}"
                )
        object.__setattr__(self, "orders", orders)

    @classmethod
    def zeros(cls, ndim: int) -> "MultiIndex":
        return cls((0,) * ndim)

    @classmethod
    def along(cls, ndim: int, axis: int, order: int) -> "MultiIndex":
        """Derivative of ``order`` along a single ``axis``."""
        orders = [0] * ndim
        orders[axis] = order
        return cls(tuple(orders))

    @property
    def ndim(self) -> int:
        return len(self.orders)

    @property
    def total(self) -> int:
        return sum(self.orders)

    def __iter__(self) -> Iterator[int]:
        return iter(self.orders)

    def __getitem__(self, axis: int) -> int:
        return self.orders[axis]

    def __len__(self) -> int:
        return len(self.orders)

    def __str__(self) -> str:
        return "(" + ",".join(str(o) for o in self.orders) + ")"


AlphaLike = Union[MultiIndex, Sequence[int], int]


def as_multi_index(alpha: AlphaLike, ndim: Optional[int] = None) -> MultiIndex:
    """Coerce a tuple/list (or an int, for 1-D grids) into a MultiIndex."""
    if isinstance(alpha, MultiIndex):
        result = alpha
    elif isinstance(alpha, (int, np.integer)):
        result = MultiIndex((int(alpha),))
    else:
        result = MultiIndex(tuple(alpha))
    if ndim is not None and result.ndim != ndim:
        raise ShapeError(
            f"multi-index {result} has {result.ndim} entries, grid has {ndim} axes"
        )
    return result


@dataclass(frozen=True, eq=False)
class NodalField:
    """Nodal values eta on a grid, held in tensor form A."""

    grid: Grid
    values: DenseTensor

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1 and values.size == self.grid.size and self.grid.ndim > 1:
            values = values.reshape(self.grid.shape)
        if values.shape != self.grid.shape:
            raise ShapeError(
                f"nodal values of shape {values.shape} do not match grid shape "
                f"{self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InputError("nodal values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "NodalField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "NodalField":
        """Sample ``fn`` (mapping an (M, d) array to M values) at the nodes."""
        return cls(grid, np.asarray(fn(grid.points())).reshape(grid.shape))

    @property
    def vector(self) -> NDArray[np.float64]:
        return self.values.reshape(-1)


class PointEvaluator(ABC):
    """Linear map from nodal values to one channel at a fixed set of points."""

    @property
    @abstractmethod
    def num_points(self) -> int:
        """Number of evaluation points"""
        pass

    @abstractmethod
    def apply(self, values: DenseTensor) -> NDArray[np.float64]:
        """
        Evaluate the channel at every point.

        Args:
            values: Nodal tensor shaped like the grid

        Returns:
            Array of shape (n,)
        """
        pass

    @abstractmethod
    def adjoint(self, weights: ArrayLike) -> DenseTensor:
        """
        Transpose of ``apply``.

        Args:
            weights: Array of shape (n,)

        Returns:
            Tensor shaped like the grid
        """
        pass


class GridOperators(ABC):
    """
    Linear operators of the interpolant on one grid.

    Implementations differ only in how the Gram matrix is represented; the
    objective is written against this interface.
    """

    def __init__(self, grid: Grid, kernel: ProductKernel):
        if kernel.ndim != grid.ndim:
            raise ConfigurationError(
                f"kernel has {kernel.ndim} lengthscales, grid has {grid.ndim} axes"
            )
        self.grid = grid
        self.kernel = kernel

    def check_values(self, values: ArrayLike) -> DenseTensor:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != self.grid.shape:
            if arr.size == self.grid.size:
                return arr.reshape(self.grid.shape)
            raise ShapeError(
                f"tensor of shape {arr.shape} does not match grid shape "
                f"{self.grid.shape}"
            )
        return arr

    @abstractmethod
    def apply(
        self, values: DenseTensor, alphas: Sequence[MultiIndex]
    ) -> Dict[MultiIndex, DenseTensor]:
        """
        Evaluate several derivative channels at every grid point.

        Args:
            values: Nodal tensor
            alphas: Channel multi-indices

        Returns:
            Mapping from each multi-index to its tensor of values
        """
        pass

    @abstractmethod
    def apply_adjoint(
        self, cotangents: Mapping[MultiIndex, DenseTensor]
    ) -> DenseTensor:
        """
        Sum of the adjoint channel maps applied to per-channel cotangents.

        Args:
            cotangents: Mapping from multi-index to a grid-shaped cotangent

        Returns:
            Tensor shaped like the grid
        """
        pass

    @abstractmethod
    def solve(self, values: DenseTensor) -> DenseTensor:
        """Apply K_MM^{-1} (nuggets included)."""
        pass

    @abstractmethod
    def matvec(self, values: DenseTensor) -> DenseTensor:
        """Apply K_MM (nuggets included)."""
        pass

    @abstractmethod
    def point_evaluator(self, points: ArrayLike, alpha: MultiIndex) -> PointEvaluator:
        """
        Build the evaluator of one channel at off-grid points.

        Args:
            points: Array of shape (n, d)
            alpha: Channel multi-index

        Returns:
            PointEvaluator for those points
        """
        pass

    def _warn_extrapolation(self, points: NDArray[np.float64]) -> None:
        outside = ~self.grid.contains(points)
        if outside.any():
            logger.warning(
                f"{__module_name__} - {int(outside.sum())} of {points.shape[0]} "
                f"query points lie outside the grid bounding box; "
                f"extrapolated values are untrusted"
            )


class KroneckerPointEvaluator(PointEvaluator):
    """Off-grid evaluation through per-axis row matrices R_j of shape (n, m_j)."""

    def __init__(self, rows: Sequence[NDArray[np.float64]]):
        self.rows = [np.ascontiguousarray(r) for r in rows]
        ndim = len(self.rows)
        self._tensor_axes = list(range(ndim))
        self._point_axis = ndim
        self._row_operands: List[object] = []
        for j, r in enumerate(self.rows):
            self._row_operands.extend([r, [self._point_axis, j]])

    @property
    def num_points(self) -> int:
        return int(self.rows[0].shape[0])

    def apply(self, values: DenseTensor) -> NDArray[np.float64]:
        return np.einsum(
            values,
            self._tensor_axes,
            *self._row_operands,
            [self._point_axis],
            optimize=True,
        )

    def adjoint(self, weights: ArrayLike) -> DenseTensor:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (self.num_points,):
            raise ShapeError(
                f"expected {self.num_points} point weights, got shape {weights.shape}"
            )
        return np.einsum(
            weights,
            [self._point_axis],
            *self._row_operands,
            self._tensor_axes,
            optimize=True,
        )


class DiffMatrixCache(GridOperators):
    """
    Kronecker-structured operators with cached differentiation matrices.

    Matrices D_j^(r) are built on first use, once per (axis, order), and are
    read-only afterwards. Channels that share trailing axis orders share the
    corresponding partial mode products.
    """

    def __init__(
        self,
        grid: Grid,
        kernel: ProductKernel,
        axis_grams: Optional[Sequence[AxisGram]] = None,
    ):
        super().__init__(grid, kernel)
        if axis_grams is None:
            axis_grams = kernel.axis_grams(grid)
        if [g.size for g in axis_grams] != list(grid.shape):
            raise ConfigurationError(
                f"axis Gram sizes {[g.size for g in axis_grams]} do not match grid "
                f"shape {grid.shape}"
            )
        self.axis_grams: Tuple[AxisGram, ...] = tuple(axis_grams)
        self._diff: Dict[Tuple[int, int], NDArray[np.float64]] = {}
        self._diff_t: Dict[Tuple[int, int], NDArray[np.float64]] = {}
        self._gram_matrices: Optional[List[NDArray[np.float64]]] = None
        self._lock = threading.Lock()

    def matrix(self, axis: int, order: int) -> NDArray[np.float64]:
        """D_axis^(order) = [d^order k(s, s)] K^{-1}."""
        key = (axis, order)
        if key not in self._diff:
            with self._lock:
                if key not in self._diff:
                    self._build(axis, order)
        return self._diff[key]

    def matrix_transpose(self, axis: int, order: int) -> NDArray[np.float64]:
        self.matrix(axis, order)
        return self._diff_t[(axis, order)]

    def _build(self, axis: int, order: int) -> None:
        if not 0 <= order <= MAX_DERIVATIVE_ORDER:
            raise UnsupportedOrderError(f"order {order} is not supported")
        gram = self.axis_grams[axis]
        coords = self.grid.axes[axis]
        phi = self.kernel.axis_kernel(axis).matrix(coords, coords, order)
        # D = Phi K^{-1}, obtained by solving K X^T = Phi^T
        transposed = np.ascontiguousarray(gram.solve(phi.T))
        diff = np.ascontiguousarray(transposed.T)
        transposed.setflags(write=False)
        diff.setflags(write=False)
        self._diff_t[(axis, order)] = transposed
        self._diff[(axis, order)] = diff

    def row_matrix(
        self, axis: int, coords: ArrayLike, order: int
    ) -> NDArray[np.float64]:
        """Rows d^order k(x, s^axis) K^{-1} for each coordinate x, shape (n, m)."""
        coords = np.asarray(coords, dtype=np.float64).ravel()
        phi = self.kernel.axis_kernel(axis).matrix(coords, self.grid.axes[axis], order)
        return np.ascontiguousarray(self.axis_grams[axis].solve(phi.T).T)

    def apply(
        self, values: DenseTensor, alphas: Sequence[MultiIndex]
    ) -> Dict[MultiIndex, DenseTensor]:
        values = self.check_values(values)
        ndim = self.grid.ndim
        partial: Dict[Tuple[int, ...], DenseTensor] = {(): values}

        def suffix_product(suffix: Tuple[int, ...]) -> DenseTensor:
            if suffix not in partial:
                axis = ndim - len(suffix)
                inner = suffix_product(suffix[1:])
                partial[suffix] = mode_multiply(
                    inner, self.matrix(axis, suffix[0]), axis
                )
            return partial[suffix]

        out: Dict[MultiIndex, DenseTensor] = {}
        for alpha in alphas:
            alpha = as_multi_index(alpha, ndim)
            out[alpha] = suffix_product(alpha.orders)
        return out

    def apply_adjoint(
        self, cotangents: Mapping[MultiIndex, DenseTensor]
    ) -> DenseTensor:
        ndim = self.grid.ndim
        level: Dict[Tuple[int, ...], DenseTensor] = {}
        for alpha, cot in cotangents.items():
            key = as_multi_index(alpha, ndim).orders
            cot = self.check_values(cot)
            level[key] = level[key] + cot if key in level else cot
        if not level:
            return np.zeros(self.grid.shape)

        for axis in range(ndim):
            reduced: Dict[Tuple[int, ...], DenseTensor] = {}
            for orders, tensor in level.items():
                product = mode_multiply(
                    tensor, self.matrix_transpose(axis, orders[0]), axis
                )
                rest = orders[1:]
                reduced[rest] = reduced[rest] + product if rest in reduced else product
            level = reduced
        return level[()]

    def solve(self, values: DenseTensor) -> DenseTensor:
        return kron_solve(self.axis_grams, self.check_values(values))

    def matvec(self, values: DenseTensor) -> DenseTensor:
        if self._gram_matrices is None:
            self._gram_matrices = [g.matrix for g in self.axis_grams]
        return kron_matvec(self._gram_matrices, self.check_values(values))

    def point_evaluator(self, points: ArrayLike, alpha: AlphaLike) -> PointEvaluator:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.grid.ndim:
            raise ShapeError(
                f"points have {pts.shape[1]} coordinates, grid has {self.grid.ndim}"
            )
        alpha = as_multi_index(alpha, self.grid.ndim)
        self._warn_extrapolation(pts)
        rows = [
            self.row_matrix(j, pts[:, j], alpha[j]) for j in range(self.grid.ndim)
        ]
        return KroneckerPointEvaluator(rows)

    def evaluate_on(
        self,
        values: DenseTensor,
        target: Grid,
        alpha: Optional[AlphaLike] = None,
    ) -> DenseTensor:
        """Channel values on every point of another tensor grid."""
        values = self.check_values(values)
        if target.ndim != self.grid.ndim:
            raise ShapeError(
                f"target grid is {target.ndim}-D, field is {self.grid.ndim}-D"
            )
        alpha = as_multi_index(
            alpha if alpha is not None else (0,) * self.grid.ndim, self.grid.ndim
        )
        out = values
        for j in range(self.grid.ndim):
            out = mode_multiply(out, self.row_matrix(j, target.axes[j], alpha[j]), j)
        return out


def _check_cache(field: NodalField, cache: DiffMatrixCache) -> None:
    if not cache.grid.same_as(field.grid):
        raise ConfigurationError(
            f"cache/grid mismatch: cache built for {cache.grid!r}, field lives on "
            f"{field.grid!r}"
        )


def eval_point(
    field: NodalField,
    kernel: ProductKernel,
    x: ArrayLike,
    alpha: AlphaLike,
    cache: Optional[DiffMatrixCache] = None,
) -> float:
    """
    Evaluate (d^alpha u)(x; eta) at a single coordinate.

    Args:
        field: Nodal values
        kernel: Product kernel of the interpolant
        x: Coordinate of length d
        alpha: Derivative multi-index
        cache: Optional operator cache for the field's grid

    Returns:
        The derivative value
    """
    if cache is None:
        cache = DiffMatrixCache(field.grid, kernel)
    elif cache.kernel != kernel:
        raise ConfigurationError("cache was built for a different kernel")
    _check_cache(field, cache)
    point = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(cache.point_evaluator(point, alpha).apply(field.values)[0])


def eval_points(
    field: NodalField,
    cache: DiffMatrixCache,
    points: ArrayLike,
    alpha: AlphaLike,
) -> NDArray[np.float64]:
    """Batch version of ``eval_point`` over an (n, d) array of coordinates."""
    _check_cache(field, cache)
    return cache.point_evaluator(points, alpha).apply(field.values)


def eval_grid(
    field: NodalField, cache: DiffMatrixCache, alpha: AlphaLike
) -> DenseTensor:
    """(d^alpha u) at every grid point: A ×_1 D_1^(alpha_1) ... ×_d D_d^(alpha_d)."""
    _check_cache(field, cache)
    alpha = as_multi_index(alpha, field.grid.ndim)
    return cache.apply(field.values, [alpha])[alpha]


def eval_grid_adjoint(
    cache: DiffMatrixCache, cotangent: ArrayLike, alpha: AlphaLike
) -> DenseTensor:
    """cotangent ×_1 (D_1^(alpha_1))^T ... ×_d (D_d^(alpha_d))^T."""
    cotangent = np.asarray(cotangent, dtype=np.float64)
    if cotangent.shape != cache.grid.shape:
        raise ShapeError(
            f"cotangent of shape {cotangent.shape} does not match grid shape "
            f"{cache.grid.shape}"
        )
    alpha = as_multi_index(alpha, cache.grid.ndim)
    return cache.apply_adjoint({alpha: cotangent})


def eval_on_grid(
    field: NodalField,
    cache: DiffMatrixCache,
    target: Grid,
    alpha: Optional[AlphaLike] = None,
) -> DenseTensor:
    """Evaluate the interpolant on every point of ``target``."""
    _check_cache(field, cache)
    return cache.evaluate_on(field.values, target, alpha)


def build_operators(
    grid: Grid, kernel: ProductKernel, mode: str = "structured"
) -> GridOperators:
    """
    Create the operator backend for a grid.

    Args:
        grid: Collocation grid
        kernel: Product kernel
        mode: ``"structured"`` (Kronecker) or ``"dense"`` (naive dense Gram)

    Returns:
        GridOperators instance
    """
    if mode == "structured":
        return DiffMatrixCache(grid, kernel)
    if mode == "dense":
        from .dense import DenseGramOperators

        return DenseGramOperators(grid, kernel)
    raise ConfigurationError(
        f"unknown operator mode '{mode}'. Available modes: structured, dense"
    )


__all__ = [
    "MultiIndex",
    "as_multi_index",
    "NodalField",
    "PointEvaluator",
    "GridOperators",
    "KroneckerPointEvaluator",
    "DiffMatrixCache",
    "eval_point",
    "eval_points",
    "eval_grid",
    "eval_grid_adjoint",
    "eval_on_grid",
    "build_operators",
]
