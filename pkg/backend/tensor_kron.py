__module_name__ = "tensor_kron"

"""
Kronecker-structured linear algebra on dense d-way tensors.

Linearization convention: row-major, the LAST axis index varies fastest.
Under this convention ``(F_1 ⊗ ... ⊗ F_d) @ vec(T)`` equals
``vec(T ×_1 F_1 ×_2 ... ×_d F_d)``, i.e. factor F_1 acts on axis 0, the
slowest index. Every module relies on this ordering.
"""

from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ShapeError

if TYPE_CHECKING:
    from .kernel1d import AxisGram

# A dense tensor is a C-contiguous float64 ndarray.
DenseTensor = NDArray[np.float64]


def as_tensor(vector: ArrayLike, shape: Sequence[int]) -> DenseTensor:
    """Tensor view of a flat vector under the row-major convention."""
    data = np.asarray(vector, dtype=np.float64)
    shape = tuple(int(s) for s in shape)
    if data.size != int(np.prod(shape)):
        raise ShapeError(
            f"cannot view a vector of length {data.size} as a tensor of shape {shape}"
        )
    return np.ascontiguousarray(data.reshape(shape))


def vec(tensor: ArrayLike) -> NDArray[np.float64]:
    """Flatten a tensor, last axis fastest."""
    return np.ascontiguousarray(tensor, dtype=np.float64).reshape(-1)


def mode_multiply(tensor: ArrayLike, matrix: ArrayLike, axis: int) -> DenseTensor:
    """
    Mode-k product ``tensor ×_axis matrix``.

    Args:
        tensor: Array of shape (m_1, ..., m_d)
        matrix: Array of shape (r, m_axis)
        axis: Axis to contract

    Returns:
        New tensor whose extent along ``axis`` is r
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    matrix = np.asarray(matrix, dtype=np.float64)
    if not 0 <= axis < tensor.ndim:
        raise ShapeError(
            f"axis {axis} out of range for tensor of shape {tensor.shape}"
        )
    if matrix.ndim != 2 or matrix.shape[1] != tensor.shape[axis]:
        raise ShapeError(
            f"cannot multiply tensor of shape {tensor.shape} along axis {axis} "
            f"by matrix of shape {matrix.shape}"
        )
    out = np.tensordot(matrix, tensor, axes=([1], [axis]))
    return np.ascontiguousarray(np.moveaxis(out, 0, axis))


def mode_solve(tensor: ArrayLike, gram: "AxisGram", axis: int) -> DenseTensor:
    """Apply (K_axis + nugget I)^{-1} along one axis using its Cholesky factor."""
    tensor = np.asarray(tensor, dtype=np.float64)
    if not 0 <= axis < tensor.ndim or tensor.shape[axis] != gram.size:
        raise ShapeError(
            f"cannot solve tensor of shape {tensor.shape} along axis {axis} "
            f"with a Gram of size {gram.size}"
        )
    moved = np.moveaxis(tensor, axis, 0)
    rest = moved.shape[1:]
    solved = gram.solve(moved.reshape(gram.size, -1))
    solved = solved.reshape((gram.size,) + rest)
    return np.ascontiguousarray(np.moveaxis(solved, 0, axis))


def _factor_shape(sizes: Sequence[int], v: NDArray[np.float64]) -> Tuple[int, ...]:
    shape = tuple(int(s) for s in sizes)
    if int(np.prod(shape)) != v.size:
        raise ShapeError(
            f"Kronecker factors of sizes {shape} (product {int(np.prod(shape))}) "
            f"do not match a vector of length {v.size}"
        )
    return shape


def kron_matvec(factors: Sequence[ArrayLike], v: ArrayLike) -> NDArray[np.float64]:
    """
    Compute (F_1 ⊗ ... ⊗ F_d) v without forming the Kronecker product.

    ``v`` may be flat or already shaped as the tensor; the result has the same
    shape as ``v``.
    """
    v = np.asarray(v, dtype=np.float64)
    mats = [np.asarray(f, dtype=np.float64) for f in factors]
    for j, f in enumerate(mats):
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ShapeError(f"factor {j} must be square, got shape {f.shape}")
    shape = _factor_shape([f.shape[0] for f in mats], v)
    out = v.reshape(shape)
    for j, f in enumerate(mats):
        out = mode_multiply(out, f, j)
    return out.reshape(v.shape)


def kron_solve(axis_grams: Sequence["AxisGram"], v: ArrayLike) -> NDArray[np.float64]:
    """
    Compute (K_1 ⊗ ... ⊗ K_d)^{-1} v with per-axis nuggets folded in.

    Each axis is handled by a forward and a backward triangular solve with its
    Cholesky factor; the result has the same shape as ``v``.
    """
    v = np.asarray(v, dtype=np.float64)
    shape = _factor_shape([g.size for g in axis_grams], v)
    out = v.reshape(shape)
    for j, gram in enumerate(axis_grams):
        out = mode_solve(out, gram, j)
    return out.reshape(v.shape)


__all__ = [
    "DenseTensor",
    "as_tensor",
    "vec",
    "mode_multiply",
    "mode_solve",
    "kron_matvec",
    "kron_solve",
]
