__module_name__ = "benchmarks.elliptic"

"""
Nonlinear elliptic benchmark: -Laplace(u) + u^3 = f on the unit square.

The crafted solution is sin(pi x) sin(pi y) + 4 sin(4 pi x) sin(4 pi y); f
follows from it in closed form and the Dirichlet data is u itself.
"""

from typing import List

import numpy as np
from numpy.typing import NDArray

from ..objective import ChannelValues, DirichletCombiner, PdeProblem, ResidualCombiner
from .base import BenchmarkDefaults, BenchmarkSpec, ClosedFormTruth

PI = np.pi


def elliptic_solution(points: NDArray[np.float64]) -> NDArray[np.float64]:
    x, y = np.atleast_2d(points).T
    return np.sin(PI * x) * np.sin(PI * y) + 4.0 * np.sin(4 * PI * x) * np.sin(
        4 * PI * y
    )


def elliptic_laplacian(points: NDArray[np.float64]) -> NDArray[np.float64]:
    x, y = np.atleast_2d(points).T
    return -2.0 * PI**2 * np.sin(PI * x) * np.sin(PI * y) - 128.0 * PI**2 * np.sin(
        4 * PI * x
    ) * np.sin(4 * PI * y)


def elliptic_source(points: NDArray[np.float64]) -> NDArray[np.float64]:
    return -elliptic_laplacian(points) + elliptic_solution(points) ** 3


class EllipticCombiner(ResidualCombiner):
    """P(u, u_xx, u_yy) = -u_xx - u_yy + u^3."""

    def __init__(self):
        super().__init__([(0, 0), (2, 0), (0, 2)])

    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        u, u_xx, u_yy = z
        return -u_xx - u_yy + u**3

    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        u, u_xx, _ = z
        minus_one = -np.ones_like(u_xx)
        return [3.0 * u**2, minus_one, minus_one.copy()]

    def forcing(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return elliptic_source(points)


def elliptic_problem() -> BenchmarkSpec:
    problem = PdeProblem(
        name="elliptic",
        interior=EllipticCombiner(),
        boundary=DirichletCombiner(2, elliptic_solution),
        ground_truth=ClosedFormTruth(elliptic_solution),
    )
    return BenchmarkSpec(
        name="elliptic",
        params={},
        bounds=((0.0, 1.0), (0.0, 1.0)),
        axis_names=("x", "y"),
        problem=problem,
        defaults=BenchmarkDefaults(lengthscales=(0.1, 0.1)),
        default_shape=(35, 35),
        domains=("box", "circle"),
        anchors={
            "18x18": 1.26e-02,
            "25x25": 6.93e-05,
            "35x35": 6.80e-06,
            "49x49": 1.83e-06,
        },
        source=elliptic_source,
    )


__all__ = [
    "elliptic_solution",
    "elliptic_laplacian",
    "elliptic_source",
    "EllipticCombiner",
    "elliptic_problem",
]
