__module_name__ = "grid"

"""
Product collocation grids, interior/boundary classification and fill distance.

A grid is the Cartesian product of d strictly increasing axis vectors. Flat
indices follow the row-major convention of ``backend.tensor_kron``.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import (
    Callable,
    Iterable,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from .exceptions import ConfigurationError, InputError, ParameterError, ShapeError

logger = logging.getLogger(__name__)

Membership = Callable[[NDArray[np.float64]], ArrayLike]
Face = Tuple[int, str]

DEFAULT_SAMPLE_REFINEMENT = 4


class UniformAxis(NamedTuple):
    """Evenly spaced axis including both endpoints."""

    count: int
    lower: float
    upper: float


AxisSpec = Union[UniformAxis, Tuple[int, float, float], Sequence[float], NDArray]


def _readonly(array: NDArray) -> NDArray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor-product grid s^1 × ... × s^d."""

    axes: Tuple[NDArray[np.float64], ...]

    def __post_init__(self) -> None:
        axes = []
        for j, coords in enumerate(self.axes):
            arr = np.array(coords, dtype=np.float64).ravel()
            if arr.size < 2:
                raise ParameterError(
                    f"axis {j} needs at least 2 points, got {arr.size}"
                )
            if not np.all(np.isfinite(arr)):
                raise InputError(f"axis {j} has non-finite coordinates")
            if np.any(np.diff(arr) <= 0):
                raise InputError(f"axis {j} coordinates must be strictly increasing")
            axes.append(_readonly(arr))
        if not axes:
            raise ParameterError("a grid needs at least one axis")
        object.__setattr__(self, "axes", tuple(axes))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def bounds(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((float(a[0]), float(a[-1])) for a in self.axes)

    @property
    def spacing(self) -> Tuple[float, ...]:
        """Per-axis spacing; only meaningful on uniform axes."""
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        for a in self.axes:
            steps = np.diff(a)
            if not np.allclose(steps, steps[0], rtol=rtol, atol=0.0):
                return False
        return True

    @cached_property
    def _points(self) -> NDArray[np.float64]:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return _readonly(np.stack([m.ravel() for m in mesh], axis=1))

    def points(self) -> NDArray[np.float64]:
        """All grid points as an (M, d) array in flat-index order."""
        return self._points

    def flat_index(self, multi_index: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi_index), self.shape))

    def multi_index(self, flat_index: int) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(int(flat_index), self.shape))

    def contains(self, points: ArrayLike, atol: float = 1e-12) -> NDArray[np.bool_]:
        """Whether points lie inside the bounding box."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lower = np.array([b[0] for b in self.bounds]) - atol
        upper = np.array([b[1] for b in self.bounds]) + atol
        return np.all((pts >= lower) & (pts <= upper), axis=1)

    def refine(self, factor: int) -> "Grid":
        """Insert ``factor - 1`` evenly spaced points into every interval."""
        if factor < 1:
            raise ParameterError(f"refinement factor must be >= 1, got {factor}")
        refined = []
        for a in self.axes:
            pieces = [
                np.linspace(lo, hi, factor + 1)[:-1] for lo, hi in zip(a[:-1], a[1:])
            ]
            refined.append(np.concatenate(pieces + [a[-1:]]))
        return Grid(tuple(refined))

    def same_as(self, other: "Grid") -> bool:
        return self.shape == other.shape and all(
            np.array_equal(a, b) for a, b in zip(self.axes, other.axes)
        )

    def __repr__(self) -> str:
        dims = " × ".join(str(s) for s in self.shape)
        return f"Grid({dims}, bounds={self.bounds})"


def build_grid(*axis_specs: AxisSpec) -> Grid:
    """
    Build a grid from per-axis descriptions.

    Each spec is either a ``UniformAxis`` / ``(count, lower, upper)`` tuple
    with an integer count, or a list/array of explicit coordinates which is
    used verbatim.

    Raises:
        ParameterError: count < 2 or lower >= upper
    """
    if len(axis_specs) == 1 and isinstance(axis_specs[0], list):
        if axis_specs[0] and isinstance(axis_specs[0][0], (tuple, list, np.ndarray)):
            axis_specs = tuple(axis_specs[0])

    axes = []
    for j, spec in enumerate(axis_specs):
        if isinstance(spec, tuple) and len(spec) == 3 and _is_count(spec[0]):
            count, lower, upper = int(spec[0]), float(spec[1]), float(spec[2])
            if count < 2:
                raise ParameterError(f"axis {j}: count must be >= 2, got {count}")
            if not lower < upper:
                raise ParameterError(
                    f"axis {j}: lower bound {lower} must be below upper bound {upper}"
                )
            axes.append(np.linspace(lower, upper, count))
        else:
            axes.append(np.asarray(spec, dtype=np.float64))
    return Grid(tuple(axes))


def _is_count(value: object) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


@dataclass(frozen=True, eq=False)
class DomainClassification:
    """
    Split of the residual sites into interior and boundary.

    ``boundary_mask`` marks grid sites carrying boundary residuals;
    ``boundary_sample`` holds off-grid boundary coordinates evaluated through
    the interpolant. Grid sites in neither mask are inactive.
    """

    grid: Grid
    interior_mask: NDArray[np.bool_]
    boundary_mask: NDArray[np.bool_]
    boundary_sample: NDArray[np.float64] = field(
        default_factory=lambda: np.empty((0, 0))
    )
    membership: Optional[Membership] = None

    def __post_init__(self) -> None:
        shape = self.grid.shape
        interior = np.array(self.interior_mask, dtype=bool)
        boundary = np.array(self.boundary_mask, dtype=bool)
        if interior.shape != shape or boundary.shape != shape:
            raise ShapeError(
                f"masks of shape {interior.shape} / {boundary.shape} do not match "
                f"grid shape {shape}"
            )
        if np.any(interior & boundary):
            raise ConfigurationError("a grid site cannot be both interior and boundary")

        sample = np.asarray(self.boundary_sample, dtype=np.float64)
        if sample.size == 0:
            sample = np.empty((0, self.grid.ndim))
        sample = np.atleast_2d(sample).copy()
        if sample.shape[1] != self.grid.ndim:
            raise ShapeError(
                f"boundary sample has {sample.shape[1]} coordinates, grid has "
                f"{self.grid.ndim} axes"
            )

        if not interior.any():
            raise ConfigurationError("domain has no interior collocation points")
        if not boundary.any() and sample.shape[0] == 0:
            raise ConfigurationError("domain has no boundary points")

        object.__setattr__(self, "interior_mask", _readonly(interior))
        object.__setattr__(self, "boundary_mask", _readonly(boundary))
        object.__setattr__(self, "boundary_sample", _readonly(sample))

    @property
    def num_interior(self) -> int:
        """M_Omega."""
        return int(self.interior_mask.sum())

    @property
    def num_boundary(self) -> int:
        return int(self.boundary_mask.sum()) + int(self.boundary_sample.shape[0])

    @property
    def num_sites(self) -> int:
        return self.num_interior + self.num_boundary

    @property
    def interior_points(self) -> NDArray[np.float64]:
        return self.grid.points()[self.interior_mask.ravel()]

    @property
    def boundary_grid_points(self) -> NDArray[np.float64]:
        return self.grid.points()[self.boundary_mask.ravel()]

    @property
    def boundary_points(self) -> NDArray[np.float64]:
        """Grid-face boundary coordinates followed by the off-grid sample."""
        return np.concatenate([self.boundary_grid_points, self.boundary_sample])

    @property
    def collocation_points(self) -> NDArray[np.float64]:
        return np.concatenate([self.interior_points, self.boundary_points])


def classify_box(
    grid: Grid, faces: Optional[Iterable[Face]] = None
) -> DomainClassification:
    """
    Classify a box grid: sites on boundary faces vs the rest.

    Args:
        grid: The collocation grid
        faces: ``(axis, "lower" | "upper")`` pairs carrying boundary data;
            default is every face. Sites on other faces become interior sites
            (e.g. the final-time face of a space-time problem).

    Returns:
        DomainClassification with no off-grid sample
    """
    if faces is None:
        faces = [(j, side) for j in range(grid.ndim) for side in ("lower", "upper")]

    boundary = np.zeros(grid.shape, dtype=bool)
    for axis, side in faces:
        if not 0 <= axis < grid.ndim:
            raise ParameterError(f"face axis {axis} out of range for {grid!r}")
        if side not in ("lower", "upper"):
            raise ParameterError(f"face side must be 'lower' or 'upper', got {side!r}")
        index = [slice(None)] * grid.ndim
        index[axis] = 0 if side == "lower" else -1
        boundary[tuple(index)] = True

    logger.debug(
        f"{__module_name__} - Box classification of {grid!r}: "
        f"{int(boundary.sum())} boundary sites"
    )
    return DomainClassification(
        grid=grid, interior_mask=~boundary, boundary_mask=boundary
    )


def classify_region(
    grid: Grid, membership: Membership, boundary_sample: ArrayLike
) -> DomainClassification:
    """
    Classify a virtual grid covering an irregular domain.

    Interior sites are the grid points where ``membership`` holds; boundary
    residuals are taken at the explicit off-grid ``boundary_sample`` only.
    Grid sites are never promoted to boundary sites, so a membership that
    includes its own boundary also counts those grid sites as interior. For
    the unit box, an open-square membership with the box-face grid points as
    the sample gives the same residual sites as ``classify_box``.

    Raises:
        ConfigurationError: no grid point lies inside the domain or the
            boundary sample is empty
    """
    inside = np.asarray(membership(grid.points()), dtype=bool)
    if inside.size != grid.size:
        raise ShapeError(
            f"membership returned {inside.size} flags for {grid.size} grid points"
        )
    inside = inside.reshape(grid.shape)
    if not inside.any():
        raise ConfigurationError(f"no grid point of {grid!r} lies inside the domain")

    sample = np.atleast_2d(np.asarray(boundary_sample, dtype=np.float64))
    if sample.size == 0:
        raise ConfigurationError("boundary sample is empty")

    in_box = grid.contains(sample)
    if not in_box.all():
        logger.warning(
            f"{__module_name__} - {int((~in_box).sum())} boundary samples lie "
            f"outside the grid bounding box"
        )
    return DomainClassification(
        grid=grid,
        interior_mask=inside,
        boundary_mask=np.zeros(grid.shape, dtype=bool),
        boundary_sample=sample,
        membership=membership,
    )


def fill_distance(collocation: ArrayLike, domain_sample: ArrayLike) -> float:
    """
    Max over ``domain_sample`` of the distance to the nearest collocation point.

    The sample estimate is a lower bound of the continuum fill distance.

    Raises:
        ParameterError: either input is empty
    """
    colloc = np.asarray(collocation, dtype=np.float64)
    sample = np.asarray(domain_sample, dtype=np.float64)
    if colloc.size == 0 or sample.size == 0:
        raise ParameterError(
            "fill distance needs non-empty collocation and sample sets"
        )
    if colloc.ndim == 1:
        colloc = colloc[:, None]
    if sample.ndim == 1:
        sample = sample[:, None]
    if colloc.shape[1] != sample.shape[1]:
        raise ShapeError(
            f"collocation points are {colloc.shape[1]}-D, sample is {sample.shape[1]}-D"
        )
    distances, _ = cKDTree(colloc).query(sample, k=1)
    return float(np.max(distances))


def refined_sample(
    grid: Grid,
    factor: int = DEFAULT_SAMPLE_REFINEMENT,
    membership: Optional[Membership] = None,
) -> NDArray[np.float64]:
    """Dense domain sample: the grid refined ``factor`` times per axis."""
    points = grid.refine(factor).points()
    if membership is not None:
        points = points[np.asarray(membership(points), dtype=bool)]
    return points


def collocation_fill_distance(
    classification: DomainClassification, factor: int = DEFAULT_SAMPLE_REFINEMENT
) -> float:
    """Fill distance of all residual sites over the classified domain."""
    sample = refined_sample(classification.grid, factor, classification.membership)
    if sample.shape[0] == 0:
        sample = classification.interior_points
    return fill_distance(classification.collocation_points, sample)


def dump_grid_csv(
    grid: Grid, classification: DomainClassification, path: Union[str, Path]
) -> Path:
    """
    Write the debug dump of a classified grid.

    Columns: ``index``, ``x0`` .. ``x{d-1}``, ``role``. Grid sites come first
    in flat-index order with role ``interior``, ``boundary`` or ``inactive``;
    off-grid samples follow with index -1 and role ``boundary_sample``.
    """
    if not classification.grid.same_as(grid):
        raise ConfigurationError("classification belongs to a different grid")

    role = np.full(grid.size, "inactive", dtype=object)
    role[classification.interior_mask.ravel()] = "interior"
    role[classification.boundary_mask.ravel()] = "boundary"

    columns = [f"x{j}" for j in range(grid.ndim)]
    frame = pd.DataFrame(grid.points(), columns=columns)
    frame.insert(0, "index", np.arange(grid.size))
    frame["role"] = role

    if classification.boundary_sample.shape[0]:
        extra = pd.DataFrame(classification.boundary_sample, columns=columns)
        extra.insert(0, "index", -1)
        extra["role"] = "boundary_sample"
        frame = pd.concat([frame, extra], ignore_index=True)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"{__module_name__} - Wrote grid dump ({len(frame)} rows) to {path}")
    return path


__all__ = [
    "UniformAxis",
    "AxisSpec",
    "Grid",
    "DomainClassification",
    "build_grid",
    "classify_box",
    "classify_region",
    "fill_distance",
    "refined_sample",
    "collocation_fill_distance",
    "dump_grid_csv",
]
