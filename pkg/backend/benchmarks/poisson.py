__module_name__ = "benchmarks.poisson"

"""Linear Poisson problem with a manufactured solution, used to check FD order."""

from typing import List

import numpy as np
from numpy.typing import NDArray

from ..objective import ChannelValues, DirichletCombiner, PdeProblem, ResidualCombiner
from .base import BenchmarkDefaults, BenchmarkSpec, ClosedFormTruth


def poisson_solution(points: NDArray[np.float64]) -> NDArray[np.float64]:
    x, y = np.atleast_2d(points).T
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def poisson_source(points: NDArray[np.float64]) -> NDArray[np.float64]:
    return 2.0 * np.pi**2 * poisson_solution(points)


class PoissonCombiner(ResidualCombiner):
    """P(u_xx, u_yy) = -u_xx - u_yy."""

    def __init__(self):
        super().__init__([(2, 0), (0, 2)])

    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        return -z[0] - z[1]

    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        return [-np.ones_like(z[0]), -np.ones_like(z[1])]

    def forcing(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return poisson_source(points)


def poisson_problem() -> BenchmarkSpec:
    problem = PdeProblem(
        name="poisson",
        interior=PoissonCombiner(),
        boundary=DirichletCombiner(2, poisson_solution),
        ground_truth=ClosedFormTruth(poisson_solution),
    )
    return BenchmarkSpec(
        name="poisson",
        params={},
        bounds=((0.0, 1.0), (0.0, 1.0)),
        axis_names=("x", "y"),
        problem=problem,
        defaults=BenchmarkDefaults(lengthscales=(0.2, 0.2)),
        default_shape=(17, 17),
        source=poisson_source,
    )


__all__ = ["poisson_solution", "poisson_source", "PoissonCombiner", "poisson_problem"]
