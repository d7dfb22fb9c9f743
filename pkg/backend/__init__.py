__module_name__ = "backend"
__version__ = "1.0.0"
__author__ = "Shreyas Bangera"
__description__ = "kronsolve - Kronecker-structured kernel solver for nonlinear PDEs"

from .benchmarks import BenchmarkFactory, BenchmarkSpec
from .grid import Grid, build_grid, classify_box, classify_region
from .interpolant import DiffMatrixCache, NodalField, build_operators
from .kernel1d import ProductKernel, SeKernel
from .objective import PdeProblem, SoftObjective, loss, loss_gradient

# Export main entry points for easy importing
from .optimizer import SolveResult, run

__all__ = [
    "BenchmarkFactory",
    "BenchmarkSpec",
    "Grid",
    "build_grid",
    "classify_box",
    "classify_region",
    "DiffMatrixCache",
    "NodalField",
    "build_operators",
    "ProductKernel",
    "SeKernel",
    "PdeProblem",
    "SoftObjective",
    "loss",
    "loss_gradient",
    "SolveResult",
    "run",
]
