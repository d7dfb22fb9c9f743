__module_name__ = "objective"

"""
PDE problems and the soft-regularized objective.

A problem is two residual combiners: one for interior sites and one for
boundary sites. Each combiner names the derivative channels it reads and
returns both P(z) - f(x) and the partials dP/dz_q, so the gradient of

    ||u||^2 + alpha (mean r_int^2 - eps/2) + beta (mean r_bnd^2 - eps/2)

is assembled exactly from adjoint channel maps.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import LossConfig
from .exceptions import ConfigurationError, NumericalError, ShapeError
from .grid import DomainClassification
from .interpolant import (
    AlphaLike,
    DiffMatrixCache,
    GridOperators,
    MultiIndex,
    NodalField,
    PointEvaluator,
    as_multi_index,
)
from .kernel1d import AxisGram
from .tensor_kron import DenseTensor, kron_solve

logger = logging.getLogger(__name__)

SiteFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]
ChannelValues = Sequence[NDArray[np.float64]]

RKHS_TOLERANCE = 1e-12


class ResidualCombiner(ABC):
    """
    Nonlinear map from channel values to a pointwise residual.

    The residual at a site x is ``operator(z) - forcing(x)`` where z holds one
    value per channel. ``partials`` returns dP/dz_q for each channel in the
    same order as ``channels``.
    """

    def __init__(self, channels: Sequence[AlphaLike], ndim: Optional[int] = None):
        parsed = tuple(as_multi_index(c, ndim) for c in channels)
        if not parsed:
            raise ConfigurationError("a residual combiner needs at least one channel")
        if len({c.ndim for c in parsed}) != 1:
            raise ConfigurationError("all channels must have the same dimension")
        self.channels: Tuple[MultiIndex, ...] = parsed

    @property
    def ndim(self) -> int:
        return self.channels[0].ndim

    @abstractmethod
    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        """
        Evaluate P at every site.

        Args:
            z: One array of shape (n,) per channel

        Returns:
            Array of shape (n,)
        """
        pass

    @abstractmethod
    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        """dP/dz_q at every site, one array of shape (n,) per channel."""
        pass

    def forcing(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """Right-hand side f(x) (or boundary data g(x)); zero by default."""
        return np.zeros(np.atleast_2d(points).shape[0])

    def residual(
        self,
        z: ChannelValues,
        points: NDArray[np.float64],
        forcing: Optional[NDArray[np.float64]] = None,
    ) -> NDArray[np.float64]:
        if forcing is None:
            forcing = self.forcing(points)
        return self.operator(z) - forcing

    def evaluate(
        self,
        z: ChannelValues,
        points: NDArray[np.float64],
        forcing: Optional[NDArray[np.float64]] = None,
    ) -> Tuple[NDArray[np.float64], List[NDArray[np.float64]]]:
        """Residual and partials in one call."""
        return self.residual(z, points, forcing), self.partials(z)


class DirichletCombiner(ResidualCombiner):
    """Boundary residual u(x) - g(x)."""

    def __init__(self, ndim: int, target: Optional[SiteFunction] = None):
        super().__init__([MultiIndex.zeros(ndim)])
        self.target = target

    def operator(self, z: ChannelValues) -> NDArray[np.float64]:
        return np.asarray(z[0], dtype=np.float64)

    def partials(self, z: ChannelValues) -> List[NDArray[np.float64]]:
        return [np.ones_like(z[0], dtype=np.float64)]

    def forcing(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        points = np.atleast_2d(points)
        if self.target is None:
            return np.zeros(points.shape[0])
        return np.asarray(self.target(points), dtype=np.float64).reshape(-1)


@dataclass(frozen=True)
class PdeProblem:
    """Interior and boundary combiners plus an optional ground truth."""

    name: str
    interior: ResidualCombiner
    boundary: ResidualCombiner
    ground_truth: Optional[SiteFunction] = None

    def __post_init__(self) -> None:
        if self.interior.ndim != self.boundary.ndim:
            raise ConfigurationError(
                f"interior combiner is {self.interior.ndim}-D, boundary combiner is "
                f"{self.boundary.ndim}-D"
            )

    @property
    def ndim(self) -> int:
        return self.interior.ndim

    @property
    def interior_channels(self) -> Tuple[MultiIndex, ...]:
        return self.interior.channels

    @property
    def boundary_channels(self) -> Tuple[MultiIndex, ...]:
        return self.boundary.channels


class Parameterization:
    """
    Maps optimizer variables to nodal values.

    ``nodal`` optimizes eta directly. ``coefficients`` optimizes theta with
    eta = K theta, so the chain rule gives grad_theta = K grad_eta.
    """

    KINDS = ("nodal", "coefficients")

    def __init__(self, operators: GridOperators, kind: str = "nodal"):
        if kind not in self.KINDS:
            raise ConfigurationError(
                f"unknown parameterization '{kind}'. Available: {', '.join(self.KINDS)}"
            )
        self.operators = operators
        self.kind = kind

    def to_values(self, params: DenseTensor) -> DenseTensor:
        if self.kind == "nodal":
            return self.operators.check_values(params)
        return self.operators.matvec(params)

    def from_values(self, eta: DenseTensor) -> DenseTensor:
        if self.kind == "nodal":
            return np.array(self.operators.check_values(eta), dtype=np.float64)
        return self.operators.solve(eta)

    def weights(self, params: DenseTensor, eta: DenseTensor) -> DenseTensor:
        """K^{-1} eta; the coefficients themselves in coefficient mode."""
        if self.kind == "nodal":
            return self.operators.solve(eta)
        return self.operators.check_values(params)

    def pull_back(self, grad_eta: DenseTensor) -> DenseTensor:
        if self.kind == "nodal":
            return grad_eta
        return self.operators.matvec(grad_eta)


@dataclass(frozen=True)
class LossParts:
    """Total loss and its logged components."""

    total: float
    rkhs: float
    interior_mse: float
    boundary_mse: float


@dataclass(frozen=True)
class LossEvaluation:
    parts: LossParts
    gradient: Optional[DenseTensor]
    values: DenseTensor

    @property
    def total(self) -> float:
        return self.parts.total


def _clamp_rkhs(value: float) -> float:
    if value < -RKHS_TOLERANCE:
        raise NumericalError(
            f"RKHS norm evaluated to {value:.3e}; the Gram factors are not "
            f"positive definite, try a larger nugget"
        )
    return max(value, 0.0)


class _SiteBlock:
    """Residual sites of one combiner: grid indices or off-grid evaluators."""

    def __init__(
        self,
        label: str,
        combiner: ResidualCombiner,
        points: NDArray[np.float64],
        flat_index: Optional[NDArray[np.intp]] = None,
        evaluators: Optional[Sequence[PointEvaluator]] = None,
    ):
        self.label = label
        self.combiner = combiner
        self.points = points
        self.flat_index = flat_index
        self.evaluators = evaluators
        self.forcing = combiner.forcing(points) if points.shape[0] else np.empty(0)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def channel_values(
        self, eta: DenseTensor, grid_values: Dict[MultiIndex, DenseTensor]
    ) -> List[NDArray[np.float64]]:
        if self.evaluators is not None:
            return [ev.apply(eta) for ev in self.evaluators]
        channels = self.combiner.channels
        return [grid_values[c].reshape(-1)[self.flat_index] for c in channels]

    def residuals(
        self, eta: DenseTensor, grid_values: Dict[MultiIndex, DenseTensor]
    ) -> Tuple[NDArray[np.float64], List[NDArray[np.float64]]]:
        z = self.channel_values(eta, grid_values)
        r, partials = self.combiner.evaluate(z, self.points, self.forcing)
        bad = ~np.isfinite(r)
        if bad.any():
            site = int(np.flatnonzero(bad)[0])
            raise NumericalError(
                f"non-finite {self.label} residual at site {site} "
                f"(x = {self.points[site].tolist()})"
            )
        return r, partials


class SoftObjective:
    """
    The soft-regularized loss on one classified grid.

    Site coordinates, forcing values and off-grid evaluators are prepared once
    so ``evaluate`` only does channel products and their adjoints.
    """

    def __init__(
        self,
        problem: PdeProblem,
        classification: DomainClassification,
        operators: GridOperators,
        config: LossConfig,
        parameterization: str = "nodal",
    ):
        if not classification.grid.same_as(operators.grid):
            raise ConfigurationError(
                f"classification for {classification.grid!r} does not belong to "
                f"{operators.grid!r}"
            )
        if problem.ndim != operators.grid.ndim:
            raise ConfigurationError(
                f"problem {problem.name} is {problem.ndim}-D, grid is "
                f"{operators.grid.ndim}-D"
            )
        self.problem = problem
        self.classification = classification
        self.operators = operators
        self.config = config
        self.parameterization = Parameterization(operators, parameterization)

        grid = operators.grid
        points = grid.points()
        interior_index = np.flatnonzero(classification.interior_mask.ravel())
        self._blocks: List[_SiteBlock] = [
            _SiteBlock(
                "interior", problem.interior, points[interior_index], interior_index
            )
        ]
        boundary_index = np.flatnonzero(classification.boundary_mask.ravel())
        if boundary_index.size:
            self._blocks.append(
                _SiteBlock(
                    "boundary", problem.boundary, points[boundary_index], boundary_index
                )
            )
        sample = classification.boundary_sample
        if sample.shape[0]:
            evaluators = [
                operators.point_evaluator(sample, c) for c in problem.boundary_channels
            ]
            self._blocks.append(
                _SiteBlock(
                    "boundary", problem.boundary, sample, evaluators=evaluators
                )
            )

        channels: List[MultiIndex] = []
        for block in self._blocks:
            if block.evaluators is None:
                channels.extend(c for c in block.combiner.channels if c not in channels)
        self._grid_channels = tuple(channels)
        self._counts = {
            "interior": classification.num_interior,
            "boundary": classification.num_boundary,
        }
        logger.debug(
            f"{__module_name__} - Objective for {problem.name} on {grid!r}: "
            f"{self._counts['interior']} interior, {self._counts['boundary']} "
            f"boundary sites, channels {[str(c) for c in self._grid_channels]}"
        )

    @property
    def grid(self):
        return self.operators.grid

    def _weight(self, label: str) -> float:
        return self.config.alpha if label == "interior" else self.config.beta

    def evaluate(self, params: ArrayLike, with_gradient: bool = True) -> LossEvaluation:
        """
        Loss (and optionally its gradient) at the given optimizer variables.

        Args:
            params: Nodal values, or kernel coefficients in coefficient mode
            with_gradient: Also assemble the gradient

        Returns:
            LossEvaluation with parts, gradient w.r.t. ``params`` and eta
        """
        params = self.operators.check_values(params)
        eta = self.parameterization.to_values(params)
        weights = self.parameterization.weights(params, eta)
        rkhs = _clamp_rkhs(float(np.vdot(eta, weights)))

        grid_values = self.operators.apply(eta, self._grid_channels)
        sums = {"interior": 0.0, "boundary": 0.0}
        results = []
        for block in self._blocks:
            r, partials = block.residuals(eta, grid_values)
            sums[block.label] += float(np.dot(r, r))
            results.append((block, r, partials))

        mse = {label: sums[label] / self._counts[label] for label in sums}
        half_eps = 0.5 * self.config.epsilon
        total = (
            rkhs
            + self.config.alpha * (mse["interior"] - half_eps)
            + self.config.beta * (mse["boundary"] - half_eps)
        )
        parts = LossParts(
            total=total,
            rkhs=rkhs,
            interior_mse=mse["interior"],
            boundary_mse=mse["boundary"],
        )
        if not with_gradient:
            return LossEvaluation(parts=parts, gradient=None, values=eta)

        size = self.grid.size
        cotangents: Dict[MultiIndex, NDArray[np.float64]] = {}
        off_grid = np.zeros(self.grid.shape)
        for block, r, partials in results:
            scale = 2.0 * self._weight(block.label) / self._counts[block.label]
            if scale == 0.0:
                continue
            for q, channel in enumerate(block.combiner.channels):
                weighted = scale * r * partials[q]
                if block.evaluators is not None:
                    off_grid += block.evaluators[q].adjoint(weighted)
                    continue
                if channel not in cotangents:
                    cotangents[channel] = np.zeros(size)
                cotangents[channel][block.flat_index] += weighted

        residual_grad = off_grid
        if cotangents:
            shaped = {c: v.reshape(self.grid.shape) for c, v in cotangents.items()}
            residual_grad = self.operators.apply_adjoint(shaped) + off_grid

        if self.parameterization.kind == "nodal":
            gradient = 2.0 * weights + residual_grad
        else:
            # d/dtheta theta^T K theta = 2 K theta = 2 eta
            gradient = 2.0 * eta + self.parameterization.pull_back(residual_grad)
        return LossEvaluation(parts=parts, gradient=gradient, values=eta)

    def loss(self, params: ArrayLike) -> LossParts:
        return self.evaluate(params, with_gradient=False).parts

    def gradient(self, params: ArrayLike) -> DenseTensor:
        return self.evaluate(params).gradient


def rkhs_norm_sq(
    field: Union[NodalField, ArrayLike], axis_grams: Sequence[AxisGram]
) -> float:
    """
    ||u||^2 = eta^T K_MM^{-1} eta computed with per-axis solves.

    Raises:
        ShapeError: the field does not match the Gram sizes
        NumericalError: the quadratic form is clearly negative
    """
    values = field.values if isinstance(field, NodalField) else np.asarray(field)
    values = np.asarray(values, dtype=np.float64)
    sizes = tuple(g.size for g in axis_grams)
    if values.size != int(np.prod(sizes)):
        raise ShapeError(
            f"field with {values.size} values does not match Gram sizes {sizes}"
        )
    values = values.reshape(sizes)
    return _clamp_rkhs(float(np.vdot(values, kron_solve(axis_grams, values))))


def _field_objective(
    field: NodalField,
    problem: PdeProblem,
    classification: DomainClassification,
    config: LossConfig,
    cache: GridOperators,
) -> SoftObjective:
    if not classification.grid.same_as(field.grid):
        raise ConfigurationError("classification belongs to a different grid")
    if isinstance(cache, DiffMatrixCache) and not cache.grid.same_as(field.grid):
        raise ConfigurationError("cache/grid mismatch")
    return SoftObjective(problem, classification, cache, config)


def loss(
    field: NodalField,
    problem: PdeProblem,
    classification: DomainClassification,
    config: LossConfig,
    cache: GridOperators,
) -> Tuple[float, LossParts]:
    """
    Evaluate the soft objective at nodal values ``field``.

    Returns:
        ``(total, parts)`` with parts carrying rkhs, interior_mse, boundary_mse
    """
    parts = _field_objective(field, problem, classification, config, cache).loss(
        field.values
    )
    return parts.total, parts


def loss_gradient(
    field: NodalField,
    problem: PdeProblem,
    classification: DomainClassification,
    config: LossConfig,
    cache: GridOperators,
) -> DenseTensor:
    """Exact gradient of ``loss`` with respect to the nodal values."""
    objective = _field_objective(field, problem, classification, config, cache)
    return objective.gradient(field.values)


__all__ = [
    "ResidualCombiner",
    "DirichletCombiner",
    "PdeProblem",
    "Parameterization",
    "LossParts",
    "LossEvaluation",
    "SoftObjective",
    "rkhs_norm_sq",
    "loss",
    "loss_gradient",
]
