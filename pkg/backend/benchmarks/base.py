__module_name__ = "benchmarks.base"

"""
Shared types for benchmark problems.

A BenchmarkSpec bundles a PdeProblem with its domain, default grids and
hyperparameters, a ground-truth provider and the published error anchors
the reproduction harness compares against.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ..exceptions import ConfigurationError
from ..grid import (
    DEFAULT_SAMPLE_REFINEMENT,
    DomainClassification,
    Face,
    Grid,
    build_grid,
    classify_box,
    classify_region,
)
from ..kernel1d import DEFAULT_NUGGET, ProductKernel
from ..objective import PdeProblem
from .domains import get_domain
from .metrics import EvaluationSet

CacheDir = Optional[Union[str, Path]]


class TruthProvider(ABC):
    """Ground truth u*(x) for a benchmark; callable on an (n, d) array."""

    @abstractmethod
    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pass

    def on_grid(self, grid: Grid, cache_dir: CacheDir = None) -> NDArray[np.float64]:
        """Truth at every point of a tensor grid, shaped like the grid."""
        return np.asarray(self(grid.points()), dtype=np.float64).reshape(grid.shape)


class ClosedFormTruth(TruthProvider):
    def __init__(self, fn: Callable[[NDArray[np.float64]], NDArray[np.float64]]):
        self.fn = fn

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(self.fn(np.atleast_2d(points)), dtype=np.float64)


@dataclass(frozen=True)
class BenchmarkDefaults:
    """Hyperparameters used when a run does not set them."""

    lengthscales: Tuple[float, ...]
    nugget: float = DEFAULT_NUGGET
    alpha: float = 1e6
    beta: float = 1e6


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    params: Dict[str, float]
    bounds: Tuple[Tuple[float, float], ...]
    axis_names: Tuple[str, ...]
    problem: PdeProblem
    defaults: BenchmarkDefaults
    default_shape: Tuple[int, ...]
    truth_kind: str = "closed-form"
    steady: bool = True
    boundary_faces: Optional[Sequence[Face]] = None
    domains: Tuple[str, ...] = ("box",)
    shape_ratio: float = 1.0
    anchors: Dict[str, float] = field(default_factory=dict)
    source: Optional[Callable[[NDArray[np.float64]], NDArray[np.float64]]] = None

    @property
    def ndim(self) -> int:
        return len(self.bounds)

    @property
    def truth(self) -> Optional[TruthProvider]:
        return self.problem.ground_truth

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        extras = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({extras})"

    def build_grid(self, shape: Optional[Sequence[int]] = None) -> Grid:
        """Uniform grid over the benchmark box (default shape when omitted)."""
        shape = tuple(shape) if shape else self.default_shape
        if len(shape) != self.ndim:
            raise ConfigurationError(
                f"{self.name} is {self.ndim}-D, got grid shape {shape}"
            )
        return build_grid(
            *[(int(n), lo, hi) for n, (lo, hi) in zip(shape, self.bounds)]
        )

    def shape_for(self, points: int) -> Tuple[int, ...]:
        """Grid shape with about ``points`` points and the preferred aspect ratio."""
        if self.ndim != 2:
            side = max(2, round(points ** (1.0 / self.ndim)))
            return (side,) * self.ndim
        cols = max(2, round(math.sqrt(points / self.shape_ratio)))
        return (max(2, round(points / cols)), cols)

    def kernel(
        self,
        lengthscales: Optional[Sequence[float]] = None,
        nugget: Optional[float] = None,
    ) -> ProductKernel:
        scales: List[float] = list(lengthscales or self.defaults.lengthscales)
        if len(scales) == 1 and self.ndim > 1:
            scales = scales * self.ndim
        if len(scales) != self.ndim:
            raise ConfigurationError(
                f"{self.name} needs {self.ndim} lengthscales, got {len(scales)}"
            )
        return ProductKernel(
            tuple(scales), self.defaults.nugget if nugget is None else nugget
        )

    def classify(
        self,
        grid: Grid,
        domain: str = "box",
        boundary_samples: int = 192,
    ) -> DomainClassification:
        """Interior/boundary split for the box or one of the irregular domains."""
        if domain not in self.domains:
            raise ConfigurationError(
                f"{self.name} does not support the '{domain}' domain. "
                f"Available domains: {', '.join(self.domains)}"
            )
        if domain == "box":
            return classify_box(grid, self.boundary_faces)
        region = get_domain(domain)
        return classify_region(
            grid, region.membership, region.boundary_sample(boundary_samples)
        )

    def evaluation_set(
        self,
        classification: DomainClassification,
        cache_dir: CacheDir = None,
        factor: int = DEFAULT_SAMPLE_REFINEMENT,
    ) -> Optional[EvaluationSet]:
        """Truth on the collocation grid refined ``factor`` times per axis."""
        if self.truth is None:
            return None
        target = classification.grid.refine(factor)
        mask = None
        if classification.membership is not None:
            mask = np.asarray(classification.membership(target.points()), dtype=bool)
        values = self.truth.on_grid(target, cache_dir)
        return EvaluationSet.on_grid(target, values, mask)


__all__ = [
    "CacheDir",
    "TruthProvider",
    "ClosedFormTruth",
    "BenchmarkDefaults",
    "BenchmarkSpec",
]
