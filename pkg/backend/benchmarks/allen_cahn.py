__module_name__ = "benchmarks.allen_cahn"

"""
Allen-Cahn benchmark: u_xx + u_yy + gamma (u^m - u) = f on the unit square.

The crafted solution sin(2 pi a x) cos(2 pi a y) + sin(2 pi x) cos(2 pi y)
oscillates faster as ``a`` grows (15 and 20 are the published settings).
"""

from typing import List

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ParameterError
from ..objective import ChannelValues, DirichletCombiner, PdeProblem, ResidualCombiner
from .base import BenchmarkDefaults, BenchmarkSpec, ClosedFormTruth

TWO_PI = 2.0 * np.pi

PUBLISHED_ERRORS = {
    15.0: {"25x25": 6.80e-01, "35x35": 2.1e-01, "49x49": 5.15e-03, "70x70": 9.20e-05},
    20.0: {"25x25": 7.07e-01, "35x35": 6.91e-01, "49x49": 1.81e-01, "70x70": 9.83e-04},
}


class AllenCahnSolution:
    def __init__(self, a: float):
        self.a = a

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        x, y = np.atleast_2d(points).T
        a = self.a
        return np.sin(TWO_PI * a * x) * np.cos(TWO_PI * a * y) + np.sin(
            TWO_PI * x
        ) * np.cos(TWO_PI * y)

    def laplacian(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        x, y = np.atleast_2d(points).T
        a = self.a
        return -2.0 * TWO_PI**2 * a**2 * np.sin(TWO_PI * a * x) * np.cos(
            TWO_PI * a * y
        ) - 2.0 * TWO_PI**2 * np.sin(TWO_PI * x) * np.cos(TWO_PI * y)


class AllenCahnCombiner(ResidualCombiner):
    """P(u, u_xx, u_yy) = u_xx + u_yy + gamma (u^m - u)."""

    def __init__(self, solution: AllenCahnSolution, gamma: float = 1.0, power: int = 3):
        super().__init__([(0, 0), (2, 0), (0, 2)])
        self.solution = solution
        self.gamma = gamma
        self.power = power

    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        u, u_xx, u_yy = z
        return u_xx + u_yy + self.gamma * (u**self.power - u)

    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        u, u_xx, _ = z
        du = self.gamma * (self.power * u ** (self.power - 1) - 1.0)
        return [du, np.ones_like(u_xx), np.ones_like(u_xx)]

    def forcing(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        u = self.solution(points)
        return self.solution.laplacian(points) + self.gamma * (u**self.power - u)


def allen_cahn_problem(
    a: float = 15.0, gamma: float = 1.0, power: int = 3
) -> BenchmarkSpec:
    if not a > 0:
        raise ParameterError(f"Allen-Cahn parameter a must be positive, got {a}")
    if power < 1:
        raise ParameterError(f"Allen-Cahn power must be at least 1, got {power}")
    solution = AllenCahnSolution(float(a))
    combiner = AllenCahnCombiner(solution, gamma, int(power))
    problem = PdeProblem(
        name="allen_cahn",
        interior=combiner,
        boundary=DirichletCombiner(2, solution),
        ground_truth=ClosedFormTruth(solution),
    )
    anchors = dict(PUBLISHED_ERRORS.get(float(a), {}))
    return BenchmarkSpec(
        name="allen_cahn",
        params={"a": float(a)},
        bounds=((0.0, 1.0), (0.0, 1.0)),
        axis_names=("x", "y"),
        problem=problem,
        defaults=BenchmarkDefaults(lengthscales=(0.04, 0.04)),
        default_shape=(49, 49),
        domains=("box", "triangle"),
        anchors=anchors,
        source=combiner.forcing,
    )


__all__ = [
    "AllenCahnSolution",
    "AllenCahnCombiner",
    "allen_cahn_problem",
]
