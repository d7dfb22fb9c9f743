__module_name__ = "benchmarks.burgers"

"""
Viscous Burgers benchmark on [-1, 1] x [0, 1]:

    u_t + u u_x - nu u_xx = 0,  u(x, 0) = -sin(pi x),  u(-1, t) = u(1, t) = 0

The ground truth comes from the Cole-Hopf transformation. After the change
of variables eta = sqrt(4 nu t) w,

    u(x, t) = -int sin(pi (x - c w)) exp(E(w)) dw / int exp(E(w)) dw
    E(w)    = -w^2 - a cos(pi (x - c w)),   a = 1 / (2 pi nu),  c = sqrt(4 nu t)

For small nu the integrand is sharply peaked, possibly at several places, so
the integrals are taken with Gauss-Hermite rules centred on every region
where E is within 40 of its maximum, and summed in log space.
"""

import hashlib
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import List, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from ..exceptions import ParameterError
from ..grid import Grid
from ..objective import ChannelValues, DirichletCombiner, PdeProblem, ResidualCombiner
from ..storage import cached_array
from .base import BenchmarkDefaults, BenchmarkSpec, CacheDir, TruthProvider

logger = logging.getLogger(__name__)

LOG_WINDOW = 40.0
MIN_QUAD_NODES = 32
DEFAULT_QUAD_NODES = 100

PUBLISHED_ERRORS = {
    0.02: {"25x25": 1.44e-02, "35x35": 5.40e-03, "49x49": 7.83e-04, "70x70": 3.21e-04},
    0.001: {
        "42x14": 1.34e-01,
        "60x20": 1.11e-01,
        "84x28": 8.04e-02,
        "120x40": 1.89e-02,
    },
}


@lru_cache(maxsize=8)
def _hermite_rule(n: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = np.polynomial.hermite.hermgauss(n)
    return nodes, np.log(weights)


def _exponent(w: NDArray[np.float64], x: float, a: float, c: float) -> NDArray:
    return -(w**2) - a * np.cos(np.pi * (x - c * w))


def _clusters(mask: NDArray[np.bool_]) -> List[Tuple[int, int]]:
    """Maximal runs of True as (first, last) index pairs."""
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def _cole_hopf_value(x: float, t: float, nu: float, quad_nodes: int) -> float:
    if t == 0.0:
        return -math.sin(math.pi * x)
    a = 1.0 / (2.0 * math.pi * nu)
    c = math.sqrt(4.0 * nu * t)

    # half the narrowest peak width: E'' >= -(2 + a pi^2 c^2)
    step = 0.5 / math.sqrt(2.0 + a * math.pi**2 * c**2)
    half_width = math.sqrt(2.0 * a + LOG_WINDOW) + 1.0
    scan = np.arange(-half_width, half_width + step, step)
    exponents = _exponent(scan, x, a, c)
    keep = exponents >= exponents.max() - LOG_WINDOW

    y, log_omega = _hermite_rule(quad_nodes)
    y_max = y[-1]
    log_weights = []
    integrand = []
    for first, last in _clusters(keep):
        lo = scan[first] - step
        hi = scan[last] + step
        centre = 0.5 * (lo + hi)
        scale = 0.5 * (hi - lo) / y_max
        w = centre + scale * y
        log_weights.append(math.log(scale) + log_omega + y**2 + _exponent(w, x, a, c))
        integrand.append(-np.sin(np.pi * (x - c * w)))

    log_w = np.concatenate(log_weights)
    numerator, sign = logsumexp(log_w, b=np.concatenate(integrand), return_sign=True)
    if sign == 0:
        return 0.0
    return float(sign * math.exp(numerator - logsumexp(log_w)))


def burgers_truth(
    points: ArrayLike, nu: float, quad_nodes: int = DEFAULT_QUAD_NODES
) -> NDArray[np.float64]:
    """
    Cole-Hopf solution at (x, t) rows of ``points``.

    Raises:
        ParameterError: nu <= 0, t < 0 or fewer than 32 quadrature nodes
    """
    if not nu > 0:
        raise ParameterError(f"viscosity must be positive, got {nu}")
    if quad_nodes < MIN_QUAD_NODES:
        raise ParameterError(
            f"need at least {MIN_QUAD_NODES} quadrature nodes, got {quad_nodes}"
        )
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if np.any(pts[:, 1] < 0):
        raise ParameterError("Burgers truth is only defined for t >= 0")
    return np.array(
        [_cole_hopf_value(float(x), float(t), nu, quad_nodes) for x, t in pts]
    )


class BurgersTruth(TruthProvider):
    """Cole-Hopf truth; grid tables are cached on disk when a directory is set."""

    def __init__(self, nu: float, quad_nodes: int = DEFAULT_QUAD_NODES):
        self.nu = nu
        self.quad_nodes = quad_nodes

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return burgers_truth(points, self.nu, self.quad_nodes)

    def cache_path(self, grid: Grid, cache_dir: CacheDir) -> Path:
        digest = hashlib.sha256()
        for axis in grid.axes:
            digest.update(np.ascontiguousarray(axis, dtype="<f8").tobytes())
        shape = "x".join(str(n) for n in grid.shape)
        name = f"burgers_nu{self.nu:g}_{shape}_{digest.hexdigest()[:12]}.bin"
        return Path(cache_dir) / name

    def on_grid(self, grid: Grid, cache_dir: CacheDir = None) -> NDArray[np.float64]:
        if cache_dir is None:
            return super().on_grid(grid)
        path = self.cache_path(grid, cache_dir)
        params = {"nu": self.nu, "quad_nodes": float(self.quad_nodes)}
        return cached_array(
            path, params, lambda: TruthProvider.on_grid(self, grid)
        )


def _initial_condition(points: NDArray[np.float64]) -> NDArray[np.float64]:
    pts = np.atleast_2d(points)
    x, t = pts[:, 0], pts[:, 1]
    return np.where(np.isclose(t, 0.0), -np.sin(np.pi * x), 0.0)


class BurgersCombiner(ResidualCombiner):
    """P(u, u_t, u_x, u_xx) = u_t + u u_x - nu u_xx on (x, t)."""

    def __init__(self, nu: float):
        super().__init__([(0, 0), (0, 1), (1, 0), (2, 0)])
        self.nu = nu

    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        u, u_t, u_x, u_xx = z
        return u_t + u * u_x - self.nu * u_xx

    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        u, u_t, u_x, _ = z
        return [
            np.array(u_x, dtype=np.float64),
            np.ones_like(u_t),
            np.array(u, dtype=np.float64),
            np.full_like(u, -self.nu),
        ]


def burgers_problem(
    nu: float = 0.02, quad_nodes: int = DEFAULT_QUAD_NODES
) -> BenchmarkSpec:
    if not nu > 0:
        raise ParameterError(f"viscosity must be positive, got {nu}")
    truth = BurgersTruth(float(nu), quad_nodes)
    problem = PdeProblem(
        name="burgers",
        interior=BurgersCombiner(float(nu)),
        boundary=DirichletCombiner(2, _initial_condition),
        ground_truth=truth,
    )
    return BenchmarkSpec(
        name="burgers",
        params={"nu": float(nu)},
        bounds=((-1.0, 1.0), (0.0, 1.0)),
        axis_names=("x", "t"),
        problem=problem,
        defaults=BenchmarkDefaults(lengthscales=(0.05, 0.2)),
        default_shape=(49, 49),
        truth_kind="quadrature",
        steady=False,
        boundary_faces=[(0, "lower"), (0, "upper"), (1, "lower")],
        shape_ratio=3.0,
        anchors=dict(PUBLISHED_ERRORS.get(float(nu), {})),
    )


__all__ = [
    "burgers_truth",
    "BurgersTruth",
    "BurgersCombiner",
    "burgers_problem",
]
