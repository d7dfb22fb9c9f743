__module_name__ = "optimizer"

"""
ADAM minimization of the soft objective with patience-based early stopping.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from .benchmarks.metrics import EvaluationSet
from .config import LossConfig, RunConfig
from .exceptions import DivergenceError, NumericalError, ParameterError, ShapeError
from .grid import DomainClassification, Grid, collocation_fill_distance
from .interpolant import GridOperators, build_operators
from .kernel1d import ProductKernel
from .objective import LossParts, PdeProblem, SoftObjective
from .tensor_kron import DenseTensor

logger = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "iter",
    "total_loss",
    "rkhs",
    "interior_mse",
    "boundary_mse",
    "rel_l2_error",
    "elapsed_seconds",
]


@dataclass(frozen=True)
class AdamHyper:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stability: float = 1e-8

    def __post_init__(self) -> None:
        if not self.lr > 0:
            raise ParameterError(f"learning rate must be positive, got {self.lr}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise ParameterError(f"{name} must lie in [0, 1), got {value}")
        if not self.eps_stability > 0:
            raise ParameterError("eps_stability must be positive")

    @classmethod
    def from_config(cls, config: RunConfig) -> "AdamHyper":
        return cls(
            lr=config.lr,
            beta1=config.beta1,
            beta2=config.beta2,
            eps_stability=config.eps_stability,
        )


@dataclass(frozen=True, eq=False)
class AdamState:
    """Moment estimates and step count of one ADAM run."""

    first_moment: DenseTensor
    second_moment: DenseTensor
    step_count: int = 0
    hyper: AdamHyper = field(default_factory=AdamHyper)

    @classmethod
    def initial(cls, shape, hyper: Optional[AdamHyper] = None) -> "AdamState":
        return cls(
            first_moment=np.zeros(shape),
            second_moment=np.zeros(shape),
            step_count=0,
            hyper=hyper if hyper is not None else AdamHyper(),
        )


def adam_step(
    state: AdamState, gradient: ArrayLike, eta: ArrayLike
) -> Tuple[AdamState, DenseTensor]:
    """
    One bias-corrected ADAM update.

    Returns:
        The advanced state and the updated variables (inputs are not modified)
    """
    gradient = np.asarray(gradient, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if gradient.shape != eta.shape or gradient.shape != state.first_moment.shape:
        raise ShapeError(
            f"gradient {gradient.shape}, variables {eta.shape} and moments "
            f"{state.first_moment.shape} must agree"
        )
    if not np.all(np.isfinite(gradient)):
        raise NumericalError(
            f"non-finite gradient at ADAM step {state.step_count + 1}"
        )

    h = state.hyper
    t = state.step_count + 1
    m = h.beta1 * state.first_moment + (1.0 - h.beta1) * gradient
    v = h.beta2 * state.second_moment + (1.0 - h.beta2) * gradient * gradient
    m_hat = m / (1.0 - h.beta1**t)
    v_hat = v / (1.0 - h.beta2**t)
    updated = eta - h.lr * m_hat / (np.sqrt(v_hat) + h.eps_stability)
    return replace(state, first_moment=m, second_moment=v, step_count=t), updated


class PatienceTracker:
    """
    Stops when ``patience`` consecutive steps bring no relative improvement.

    The reference loss moves only when a step lowers it by at least
    ``min_improvement`` times its magnitude.
    """

    def __init__(self, patience: int, min_improvement: float, initial_loss: float):
        if patience <= 0:
            raise ParameterError(f"patience must be positive, got {patience}")
        self.patience = patience
        self.min_improvement = min_improvement
        self.reference = initial_loss
        self.stale_steps = 0

    def update(self, value: float) -> bool:
        """Record one step; True when the run should stop."""
        decrease = self.reference - value
        if decrease > 0 and decrease >= self.min_improvement * abs(self.reference):
            self.reference = value
            self.stale_steps = 0
        else:
            self.stale_steps += 1
        return self.stale_steps >= self.patience


@dataclass
class SolveResult:
    """Outcome of one optimizer run."""

    problem: str
    grid_shape: tuple
    eta: DenseTensor
    best_loss: float
    best_parts: LossParts
    final_loss: float
    best_iteration: int
    iterations: int
    stop_reason: str
    wall_time: float
    trace: pd.DataFrame
    parameterization: str = "nodal"
    min_improvement: float = 1e-9
    rel_l2_best_loss: Optional[float] = None
    rel_l2_min_logged: Optional[float] = None
    fill_distance: Optional[float] = None

    @property
    def seconds_per_iteration(self) -> float:
        return self.wall_time / max(self.iterations, 1)

    @property
    def has_truth(self) -> bool:
        return self.rel_l2_best_loss is not None

    def write_trace_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.trace.to_csv(
            path, index=False, columns=TRACE_COLUMNS, float_format="%.17g"
        )
        return path

    def to_summary(self) -> Dict[str, Any]:
        return {
            "problem": self.problem,
            "grid": "x".join(str(n) for n in self.grid_shape),
            "parameterization": self.parameterization,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "min_improvement": self.min_improvement,
            "final_loss": self.final_loss,
            "best_loss": self.best_loss,
            "best_iteration": self.best_iteration,
            "best_rkhs": self.best_parts.rkhs,
            "best_interior_mse": self.best_parts.interior_mse,
            "best_boundary_mse": self.best_parts.boundary_mse,
            "rel_l2_best_loss": self.rel_l2_best_loss,
            "rel_l2_min_logged": self.rel_l2_min_logged,
            "fill_distance": self.fill_distance,
            "wall_time": self.wall_time,
            "seconds_per_iteration": self.seconds_per_iteration,
        }


def _trace_row(
    iteration: int, parts: LossParts, error: Optional[float], elapsed: float
) -> Dict[str, float]:
    return {
        "iter": iteration,
        "total_loss": parts.total,
        "rkhs": parts.rkhs,
        "interior_mse": parts.interior_mse,
        "boundary_mse": parts.boundary_mse,
        "rel_l2_error": np.nan if error is None else error,
        "elapsed_seconds": elapsed,
    }


def _initial_values(grid: Grid, config: RunConfig) -> DenseTensor:
    if config.init == "random":
        rng = np.random.default_rng(config.seed)
        return rng.normal(0.0, config.init_scale, size=grid.shape)
    return np.zeros(grid.shape)


def run(
    problem: PdeProblem,
    grid: Grid,
    kernel: ProductKernel,
    classification: DomainClassification,
    loss_config: LossConfig,
    run_config: RunConfig,
    *,
    operators: Optional[GridOperators] = None,
    operator_mode: str = "structured",
    evaluation: Optional[EvaluationSet] = None,
    initial: Optional[ArrayLike] = None,
    compute_fill_distance: bool = True,
    track_error: bool = True,
) -> SolveResult:
    """
    Minimize the soft objective with ADAM.

    Args:
        problem: PDE problem
        grid: Collocation grid
        kernel: Product kernel
        classification: Interior/boundary split of ``grid``
        loss_config: Loss weights
        run_config: Optimizer and stopping settings
        operators: Prebuilt operators for ``grid`` (built from ``operator_mode``
            otherwise)
        evaluation: Error evaluation set; defaults to the 4x refined grid when
            the problem has a ground truth
        initial: Initial nodal values, overriding ``run_config.init``
        track_error: Skip all error evaluation when False (timing runs)

    Returns:
        SolveResult holding the best-loss nodal values

    Raises:
        DivergenceError: the loss became non-finite or grew past
            ``divergence_threshold`` times max(1, initial loss)
    """
    if operators is None:
        operators = build_operators(grid, kernel, operator_mode)
    objective = SoftObjective(
        problem,
        classification,
        operators,
        loss_config,
        parameterization=run_config.parameterization,
    )
    if not track_error:
        evaluation = None
    elif evaluation is None and problem.ground_truth is not None:
        evaluation = EvaluationSet.refined(classification, problem.ground_truth)

    eta0 = _initial_values(grid, run_config) if initial is None else initial
    params = objective.parameterization.from_values(eta0)
    state = AdamState.initial(grid.shape, AdamHyper.from_config(run_config))

    logger.info(
        f"{__module_name__} - Solving {problem.name} on {grid!r}: "
        f"alpha={loss_config.alpha:g}, beta={loss_config.beta:g}, "
        f"lr={run_config.lr:g}, patience={run_config.patience}, "
        f"min_improvement={run_config.min_improvement:g}, "
        f"parameterization={run_config.parameterization}"
    )

    start = time.perf_counter()
    current = objective.evaluate(params)
    rows: List[Dict[str, float]] = []
    errors: List[float] = []

    def log_row(iteration: int) -> None:
        error = evaluation.error(operators, current.values) if evaluation else None
        if error is not None:
            errors.append(error)
        rows.append(
            _trace_row(iteration, current.parts, error, time.perf_counter() - start)
        )
        logger.debug(
            f"{__module_name__} - iter {iteration}: loss={current.total:.6e}"
            + (f", rel_l2={error:.3e}" if error is not None else "")
        )

    log_row(0)
    # scaled by the starting loss
    cutoff = run_config.divergence_threshold * max(1.0, current.total)
    best_total = current.total
    best_parts = current.parts
    best_values = current.values
    best_iteration = 0
    tracker = PatienceTracker(
        run_config.patience, run_config.min_improvement, current.total
    )

    stop_reason = "max_iters"
    iteration = 0
    for iteration in range(1, run_config.max_iters + 1):
        state, params = adam_step(state, current.gradient, params)
        current = objective.evaluate(params)
        total = current.total
        if not np.isfinite(total) or total > cutoff:
            log_row(iteration)
            trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
            raise DivergenceError(
                f"{problem.name} diverged at iteration {iteration} "
                f"(loss {total:.3e}, cutoff {cutoff:.1e})",
                trace=trace,
            )
        if total < best_total:
            best_total = total
            best_parts = current.parts
            best_values = current.values
            best_iteration = iteration
        if iteration % run_config.log_every == 0:
            log_row(iteration)
        if tracker.update(total):
            stop_reason = "patience"
            break

    if not rows or rows[-1]["iter"] != iteration:
        log_row(iteration)
    wall_time = time.perf_counter() - start

    rel_best = None
    rel_min = None
    if evaluation is not None:
        rel_best = evaluation.error(operators, best_values)
        rel_min = min(errors + [rel_best])
    fill = collocation_fill_distance(classification) if compute_fill_distance else None

    result = SolveResult(
        problem=problem.name,
        grid_shape=grid.shape,
        eta=np.array(best_values),
        best_loss=best_total,
        best_parts=best_parts,
        final_loss=current.total,
        best_iteration=best_iteration,
        iterations=iteration,
        stop_reason=stop_reason,
        wall_time=wall_time,
        trace=pd.DataFrame(rows, columns=TRACE_COLUMNS),
        parameterization=run_config.parameterization,
        min_improvement=run_config.min_improvement,
        rel_l2_best_loss=rel_best,
        rel_l2_min_logged=rel_min,
        fill_distance=fill,
    )
    errors_note = ""
    if rel_best is not None:
        errors_note = f", rel_l2 {rel_best:.3e} (min logged {rel_min:.3e})"
    logger.info(
        f"{__module_name__} - {problem.name} stopped ({stop_reason}) after "
        f"{iteration} iterations in {wall_time:.2f}s: best loss {best_total:.6e}"
        f"{errors_note}"
    )
    return result


__all__ = [
    "TRACE_COLUMNS",
    "AdamHyper",
    "AdamState",
    "adam_step",
    "PatienceTracker",
    "SolveResult",
    "run",
]
