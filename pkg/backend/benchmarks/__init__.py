"""
Benchmark problems, ground-truth providers, error metrics and the
finite-difference baseline.
"""

from .allen_cahn import AllenCahnCombiner, allen_cahn_problem
from .base import (
    BenchmarkDefaults,
    BenchmarkSpec,
    ClosedFormTruth,
    TruthProvider,
)
from .burgers import BurgersCombiner, BurgersTruth, burgers_problem, burgers_truth
from .eikonal import EikonalCombiner, EikonalReference, eikonal_problem
from .elliptic import EllipticCombiner, elliptic_problem
from .factory import BenchmarkFactory
from .fd_solver import FdSolution, fd_solve, newton_solve
from .metrics import EvaluationSet, relative_l2, relative_l2_values
from .poisson import PoissonCombiner, poisson_problem

__all__ = [
    # Specs and truth
    "BenchmarkDefaults",
    "BenchmarkSpec",
    "TruthProvider",
    "ClosedFormTruth",
    "BenchmarkFactory",
    # Problems
    "burgers_problem",
    "burgers_truth",
    "BurgersTruth",
    "BurgersCombiner",
    "elliptic_problem",
    "EllipticCombiner",
    "eikonal_problem",
    "EikonalCombiner",
    "EikonalReference",
    "allen_cahn_problem",
    "AllenCahnCombiner",
    "poisson_problem",
    "PoissonCombiner",
    # Metrics
    "EvaluationSet",
    "relative_l2",
    "relative_l2_values",
    # Finite differences
    "FdSolution",
    "fd_solve",
    "newton_solve",
]
