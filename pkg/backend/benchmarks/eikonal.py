__module_name__ = "benchmarks.eikonal"

"""
Regularized Eikonal benchmark on the unit square:

    u_x^2 + u_y^2 - eps (u_xx + u_yy) = 1,  u = 0 on the boundary

There is no closed form; the reference is a 513 x 513 finite-difference
solution, reached through a cascade of coarser solves and cached on disk.
"""

import logging
import threading
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import RectBivariateSpline, RegularGridInterpolator

from ..exceptions import ParameterError
from ..grid import Grid, build_grid, classify_box
from ..objective import ChannelValues, DirichletCombiner, PdeProblem, ResidualCombiner
from ..storage import cached_array
from .base import BenchmarkDefaults, BenchmarkSpec, CacheDir, TruthProvider
from .fd_solver import newton_solve

logger = logging.getLogger(__name__)

REFERENCE_RESOLUTION = 513
CASCADE = (65, 129, 257, 513)

PUBLISHED_ERRORS = {
    "18x18": 6.23e-04,
    "25x25": 2.68e-04,
    "35x35": 1.91e-04,
    "49x49": 2.51e-05,
}

_reference_lock = threading.Lock()


class EikonalCombiner(ResidualCombiner):
    """P(u_x, u_y, u_xx, u_yy) = u_x^2 + u_y^2 - eps (u_xx + u_yy)."""

    def __init__(self, eps: float):
        super().__init__([(1, 0), (0, 1), (2, 0), (0, 2)])
        self.eps = eps

    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        u_x, u_y, u_xx, u_yy = z
        return u_x**2 + u_y**2 - self.eps * (u_xx + u_yy)

    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        u_x, u_y, _, _ = z
        return [
            2.0 * u_x,
            2.0 * u_y,
            np.full_like(u_x, -self.eps),
            np.full_like(u_x, -self.eps),
        ]

    def forcing(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.ones(np.atleast_2d(points).shape[0])


def _eikonal_pde(eps: float, truth: Optional[TruthProvider] = None) -> PdeProblem:
    return PdeProblem(
        name="eikonal",
        interior=EikonalCombiner(eps),
        boundary=DirichletCombiner(2),
        ground_truth=truth,
    )


def _unit_square(n: int) -> Grid:
    return build_grid((n, 0.0, 1.0), (n, 0.0, 1.0))


def _cascade_levels(resolution: int) -> Tuple[int, ...]:
    levels = tuple(n for n in CASCADE if n < resolution)
    return levels + (resolution,)


class EikonalReference(TruthProvider):
    """
    Fine finite-difference solution, interpolated with bicubic splines.

    Each cascade level starts Newton from the previous level's solution,
    which keeps the 513 x 513 solve to a handful of steps.
    """

    def __init__(
        self,
        eps: float,
        resolution: int = REFERENCE_RESOLUTION,
        cache_dir: CacheDir = None,
    ):
        if not eps > 0:
            raise ParameterError(f"eps must be positive, got {eps}")
        if resolution < 5:
            raise ParameterError(f"reference resolution must be >= 5, got {resolution}")
        self.eps = eps
        self.resolution = resolution
        self.cache_dir = cache_dir
        self._spline: Optional[RectBivariateSpline] = None

    @property
    def grid(self) -> Grid:
        return _unit_square(self.resolution)

    def cache_path(self) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        name = f"eikonal_eps{self.eps:g}_{self.resolution}.bin"
        return Path(self.cache_dir) / name

    def solve_cascade(self) -> NDArray[np.float64]:
        """Solve the finite-difference system level by level."""
        problem = _eikonal_pde(self.eps)
        values: Optional[NDArray[np.float64]] = None
        previous: Optional[Grid] = None
        for n in _cascade_levels(self.resolution):
            grid = _unit_square(n)
            initial = None
            if values is not None and previous is not None:
                seed = RegularGridInterpolator(previous.axes, values, method="linear")
                initial = seed(grid.points())
            classification = classify_box(grid)
            solution = newton_solve(problem, classification, initial=initial)
            logger.info(
                f"{__module_name__} - Eikonal eps={self.eps:g} level {n}x{n}: "
                f"{solution.iterations} Newton steps"
            )
            values, previous = solution.values, grid
        return values

    def values(self) -> NDArray[np.float64]:
        """Reference values on the fine grid, from the cache when possible."""
        path = self.cache_path()
        with _reference_lock:
            if path is None:
                return self.solve_cascade()
            params = {"eps": self.eps, "resolution": float(self.resolution)}
            return cached_array(path, params, self.solve_cascade)

    def _lookup(self) -> RectBivariateSpline:
        if self._spline is None:
            axis = self.grid.axes[0]
            self._spline = RectBivariateSpline(axis, axis, self.values(), kx=3, ky=3)
        return self._spline

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.clip(np.atleast_2d(points), 0.0, 1.0)
        return np.asarray(self._lookup().ev(pts[:, 0], pts[:, 1]), dtype=np.float64)


@lru_cache(maxsize=4)
def eikonal_reference(
    eps: float,
    resolution: int = REFERENCE_RESOLUTION,
    cache_dir: Optional[str] = None,
) -> EikonalReference:
    return EikonalReference(eps, resolution, cache_dir)


def eikonal_problem(
    eps: float = 0.1,
    resolution: int = REFERENCE_RESOLUTION,
    cache_dir: CacheDir = None,
) -> BenchmarkSpec:
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    reference = eikonal_reference(
        float(eps), resolution, None if cache_dir is None else str(cache_dir)
    )
    return BenchmarkSpec(
        name="eikonal",
        params={"eps": float(eps)},
        bounds=((0.0, 1.0), (0.0, 1.0)),
        axis_names=("x", "y"),
        problem=_eikonal_pde(float(eps), reference),
        defaults=BenchmarkDefaults(lengthscales=(0.15, 0.15)),
        default_shape=(25, 25),
        truth_kind="fd-reference",
        anchors=dict(PUBLISHED_ERRORS) if eps == 0.1 else {},
    )


__all__ = [
    "REFERENCE_RESOLUTION",
    "EikonalCombiner",
    "EikonalReference",
    "eikonal_reference",
    "eikonal_problem",
]
