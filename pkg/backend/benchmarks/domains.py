__module_name__ = "benchmarks.domains"

"""
Irregular domains inside the unit square, solved on a virtual grid.

Interior residuals use the grid points inside the domain; boundary residuals
use points sampled uniformly along the boundary curve.
"""

from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import ConfigurationError, ParameterError

Point = Tuple[float, float]

CIRCLE_CENTER: Point = (0.5, 0.5)
CIRCLE_RADIUS = 0.5
TRIANGLE_VERTICES: Tuple[Point, ...] = ((0.0, 0.0), (1.0, 0.0), (0.5, 1.0))


def _check_count(n: int) -> int:
    if n < 3:
        raise ParameterError(f"need at least 3 boundary samples, got {n}")
    return int(n)


def circle_membership(
    points: ArrayLike, center: Point = CIRCLE_CENTER, radius: float = CIRCLE_RADIUS
) -> NDArray[np.bool_]:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    offset = pts - np.asarray(center)
    return np.einsum("ij,ij->i", offset, offset) < radius**2


def circle_boundary_sample(
    n: int = 192, center: Point = CIRCLE_CENTER, radius: float = CIRCLE_RADIUS
) -> NDArray[np.float64]:
    """``n`` equally spaced points on the circle, starting at angle 0."""
    angles = 2.0 * np.pi * np.arange(_check_count(n)) / n
    return np.column_stack(
        [center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)]
    )


def polygon_membership(
    points: ArrayLike, vertices: Sequence[Point] = TRIANGLE_VERTICES
) -> NDArray[np.bool_]:
    """Strict interior of a convex polygon given counter-clockwise."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    verts = np.asarray(vertices, dtype=np.float64)
    inside = np.ones(pts.shape[0], dtype=bool)
    for a, b in zip(verts, np.roll(verts, -1, axis=0)):
        edge = b - a
        rel = pts - a
        inside &= edge[0] * rel[:, 1] - edge[1] * rel[:, 0] > 0
    return inside


def polygon_boundary_sample(
    vertices: Sequence[Point] = TRIANGLE_VERTICES, n: int = 192
) -> NDArray[np.float64]:
    """``n`` points equally spaced by arc length, starting at the first vertex."""
    n = _check_count(n)
    verts = np.asarray(vertices, dtype=np.float64)
    closed = np.vstack([verts, verts[:1]])
    lengths = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    s = cumulative[-1] * np.arange(n) / n
    return np.column_stack(
        [np.interp(s, cumulative, closed[:, 0]), np.interp(s, cumulative, closed[:, 1])]
    )


@dataclass(frozen=True)
class Domain:
    name: str
    membership: Callable[[ArrayLike], NDArray[np.bool_]]
    boundary_sample: Callable[[int], NDArray[np.float64]]


_DOMAINS = {
    "circle": Domain("circle", circle_membership, circle_boundary_sample),
    "triangle": Domain(
        "triangle",
        polygon_membership,
        lambda n: polygon_boundary_sample(TRIANGLE_VERTICES, n),
    ),
}


def get_domain(name: str) -> Domain:
    if name not in _DOMAINS:
        raise ConfigurationError(
            f"unknown domain '{name}'. Available domains: box, {', '.join(_DOMAINS)}"
        )
    return _DOMAINS[name]


__all__ = [
    "CIRCLE_CENTER",
    "CIRCLE_RADIUS",
    "TRIANGLE_VERTICES",
    "circle_membership",
    "circle_boundary_sample",
    "polygon_membership",
    "polygon_boundary_sample",
    "Domain",
    "get_domain",
]
