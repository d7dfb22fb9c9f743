__module_name__ = "kernel1d"

"""
One-dimensional squared-exponential kernels and per-axis Gram factors.

The product kernel used by the solver is a product of one SE kernel per axis,
so everything downstream only ever factors and differentiates m_j × m_j
matrices.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    InputError,
    NumericalError,
    ParameterError,
    UnsupportedOrderError,
)

if TYPE_CHECKING:
    from .grid import Grid

logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 2
DEFAULT_NUGGET = 1e-8


def _check_lengthscale(lengthscale: float) -> float:
    lengthscale = float(lengthscale)
    if not np.isfinite(lengthscale) or lengthscale <= 0:
        raise ParameterError(f"lengthscale must be positive, got {lengthscale}")
    return lengthscale


def _check_order(order: int) -> int:
    if order < 0:
        raise ParameterError(f"derivative order must be nonnegative, got {order}")
    if order > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"derivative order {order} exceeds the supported maximum "
            f"{MAX_DERIVATIVE_ORDER}"
        )
    return int(order)


def se_deriv(
    x: ArrayLike, x_prime: ArrayLike, lengthscale: float, order: int = 0
) -> Union[float, NDArray[np.float64]]:
    """
    Derivative of exp(-(x - x')^2 / (2 l^2)) with respect to x.

    Args:
        x: Evaluation coordinate(s); broadcasts against ``x_prime``
        x_prime: Second kernel argument(s)
        lengthscale: Positive lengthscale l
        order: Derivative order in {0, 1, 2}

    Returns:
        Scalar for scalar inputs, otherwise the broadcast array
    """
    lengthscale = _check_lengthscale(lengthscale)
    order = _check_order(order)

    diff = np.subtract(x, x_prime, dtype=np.float64)
    inv_l2 = 1.0 / (lengthscale * lengthscale)
    k = np.exp(-0.5 * diff * diff * inv_l2)

    if order == 0:
        out = k
    elif order == 1:
        out = -diff * inv_l2 * k
    else:
        out = (diff * diff * inv_l2 * inv_l2 - inv_l2) * k

    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SeKernel:
    """Squared-exponential kernel on one axis."""

    lengthscale: float

    def __post_init__(self) -> None:
        lengthscale = _check_lengthscale(self.lengthscale)
        object.__setattr__(self, "lengthscale", lengthscale)

    def __call__(
        self, x: ArrayLike, x_prime: ArrayLike, order: int = 0
    ) -> Union[float, NDArray[np.float64]]:
        return se_deriv(x, x_prime, self.lengthscale, order)

    def matrix(
        self, rows: ArrayLike, cols: ArrayLike, order: int = 0
    ) -> NDArray[np.float64]:
        """Matrix [d^order k(rows_i, cols_j)]."""
        rows = np.asarray(rows, dtype=np.float64).reshape(-1, 1)
        cols = np.asarray(cols, dtype=np.float64).reshape(1, -1)
        return np.asarray(se_deriv(rows, cols, self.lengthscale, order))


@dataclass(frozen=True, eq=False)
class AxisGram:
    """
    Cholesky-factored Gram matrix of one grid axis.

    ``cholesky_factor`` is lower triangular with
    ``L @ L.T == K_j + nugget * I``.
    """

    locations: NDArray[np.float64]
    lengthscale: float
    nugget: float
    cholesky_factor: NDArray[np.float64] = field(repr=False)
    axis: Optional[int] = None

    @property
    def size(self) -> int:
        return int(self.locations.shape[0])

    @property
    def kernel(self) -> SeKernel:
        return SeKernel(self.lengthscale)

    @property
    def matrix(self) -> NDArray[np.float64]:
        """The factored matrix K_j + nugget * I."""
        gram = self.kernel.matrix(self.locations, self.locations)
        gram[np.diag_indices_from(gram)] += self.nugget
        return gram

    def solve(self, rhs: NDArray[np.float64]) -> NDArray[np.float64]:
        """Apply (K_j + nugget I)^{-1} to the leading axis of ``rhs``."""
        return scipy.linalg.cho_solve(
            (self.cholesky_factor, True), rhs, check_finite=False
        )


def gram_cholesky(
    locations: ArrayLike,
    lengthscale: float,
    nugget: float = DEFAULT_NUGGET,
    axis: Optional[int] = None,
) -> AxisGram:
    """
    Build and factor the nugget-regularized Gram matrix of one axis.

    Args:
        locations: Strictly increasing axis coordinates
        lengthscale: Positive SE lengthscale
        nugget: Nonnegative diagonal regularizer
        axis: Axis number, used only in error messages

    Returns:
        AxisGram holding a read-only lower Cholesky factor

    Raises:
        InputError: locations are empty, non-finite, duplicated or unsorted
        NumericalError: the matrix is not positive definite after the nugget
    """
    lengthscale = _check_lengthscale(lengthscale)
    nugget = float(nugget)
    if not np.isfinite(nugget) or nugget < 0:
        raise ParameterError(f"nugget must be nonnegative, got {nugget}")

    locs = np.array(locations, dtype=np.float64).ravel()
    label = f"axis {axis}" if axis is not None else "axis"
    if locs.size == 0:
        raise InputError(f"{label}: no locations given")
    if not np.all(np.isfinite(locs)):
        raise InputError(f"{label}: locations must be finite")
    if locs.size > 1 and np.any(np.diff(locs) <= 0):
        raise InputError(
            f"{label}: locations must be strictly increasing without duplicates"
        )

    gram = SeKernel(lengthscale).matrix(locs, locs)
    gram[np.diag_indices_from(gram)] += nugget

    try:
        factor = scipy.linalg.cholesky(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(
            f"Cholesky factorization failed on {label} "
            f"(m={locs.size}, lengthscale={lengthscale:g}, nugget={nugget:g}); "
            f"try a larger nugget"
        ) from e

    if not np.all(np.isfinite(factor)) or np.any(np.diag(factor) <= 0):
        raise NumericalError(
            f"Cholesky factor of {label} is degenerate "
            f"(lengthscale={lengthscale:g}, nugget={nugget:g}); try a larger nugget"
        )

    locs.setflags(write=False)
    factor.setflags(write=False)
    logger.debug(
        f"{__module_name__} - Factored {label}: m={locs.size}, "
        f"lengthscale={lengthscale:g}, nugget={nugget:g}"
    )
    return AxisGram(
        locations=locs,
        lengthscale=lengthscale,
        nugget=nugget,
        cholesky_factor=factor,
        axis=axis,
    )


@dataclass(frozen=True)
class ProductKernel:
    """
    Product of per-axis SE kernels, kappa(x, x') = prod_j k_j(x_j, x'_j).

    ``nugget`` is either one value shared by every axis or one value per axis.
    """

    lengthscales: Tuple[float, ...]
    nugget: Union[float, Tuple[float, ...]] = DEFAULT_NUGGET

    def __post_init__(self) -> None:
        scales = tuple(
            _check_lengthscale(ls) for ls in np.atleast_1d(self.lengthscales)
        )
        if not scales:
            raise ParameterError("at least one lengthscale is required")
        object.__setattr__(self, "lengthscales", scales)
        nugget = self.nugget
        if np.ndim(nugget) == 0:
            object.__setattr__(self, "nugget", float(nugget))  # type: ignore[arg-type]
        else:
            nuggets = tuple(float(n) for n in nugget)  # type: ignore[union-attr]
            object.__setattr__(self, "nugget", nuggets)

    @property
    def ndim(self) -> int:
        return len(self.lengthscales)

    def axis_kernel(self, axis: int) -> SeKernel:
        return SeKernel(self.lengthscales[axis])

    def axis_nuggets(self, ndim: Optional[int] = None) -> Tuple[float, ...]:
        ndim = self.ndim if ndim is None else ndim
        if isinstance(self.nugget, tuple):
            if len(self.nugget) != ndim:
                raise ParameterError(
                    f"got {len(self.nugget)} nuggets for a {ndim}-dimensional grid"
                )
            return self.nugget
        return (self.nugget,) * ndim

    def axis_grams(self, grid: "Grid") -> Tuple[AxisGram, ...]:
        """Factor one Gram matrix per grid axis."""
        if grid.ndim != self.ndim:
            raise ParameterError(
                f"kernel has {self.ndim} lengthscales but the grid has "
                f"{grid.ndim} axes"
            )
        nuggets = self.axis_nuggets(grid.ndim)
        return tuple(
            gram_cholesky(coords, self.lengthscales[j], nuggets[j], axis=j)
            for j, coords in enumerate(grid.axes)
        )

    def evaluate(
        self,
        x: ArrayLike,
        y: ArrayLike,
        alpha: Optional[Sequence[int]] = None,
    ) -> NDArray[np.float64]:
        """
        Dense kernel matrix with derivative orders on the first argument.

        Args:
            x: Points of shape (n, d)
            y: Points of shape (p, d)
            alpha: Per-axis derivative orders (default all zero)

        Returns:
            Array of shape (n, p)
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        y = np.atleast_2d(np.asarray(y, dtype=np.float64))
        alpha = tuple(alpha) if alpha is not None else (0,) * self.ndim
        out = np.ones((x.shape[0], y.shape[0]))
        for j in range(self.ndim):
            out *= self.axis_kernel(j).matrix(x[:, j], y[:, j], alpha[j])
        return out


__all__ = [
    "MAX_DERIVATIVE_ORDER",
    "DEFAULT_NUGGET",
    "se_deriv",
    "SeKernel",
    "AxisGram",
    "gram_cholesky",
    "ProductKernel",
]
