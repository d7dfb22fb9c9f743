"""
Unit tests for Kronecker mode products and solves
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backend.exceptions import ShapeError
from backend.kernel1d import gram_cholesky
from backend.tensor_kron import (
    as_tensor,
    kron_matvec,
    kron_solve,
    mode_multiply,
    mode_solve,
    vec,
)


class TestTensorLayout:
    """Test suite for the vec/tensor convention"""

    def test_vec_is_row_major(self):
        tensor = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(vec(tensor), [0, 1, 2, 3, 4, 5])

    def test_as_tensor_inverts_vec(self, rng):
        tensor = rng.normal(size=(3, 4, 2))
        np.testing.assert_array_equal(as_tensor(vec(tensor), (3, 4, 2)), tensor)

    def test_as_tensor_rejects_wrong_size(self):
        with pytest.raises(ShapeError):
            as_tensor(np.zeros(5), (2, 3))


class TestModeProducts:
    """Test suite for mode_multiply and kron_matvec"""

    def test_mode_multiply_contracts_one_axis(self, rng):
        tensor = rng.normal(size=(3, 4, 5))
        matrix = rng.normal(size=(2, 4))
        out = mode_multiply(tensor, matrix, 1)
        assert out.shape == (3, 2, 5)
        np.testing.assert_allclose(out, np.einsum("rj,ijk->irk", matrix, tensor))

    def test_mode_multiply_rejects_mismatched_matrix(self, rng):
        with pytest.raises(ShapeError):
            mode_multiply(rng.normal(size=(3, 4)), rng.normal(size=(2, 3)), 1)

    def test_mode_multiply_rejects_bad_axis(self, rng):
        with pytest.raises(ShapeError):
            mode_multiply(rng.normal(size=(3, 4)), rng.normal(size=(2, 3)), 2)

    def test_kron_matvec_matches_explicit_kronecker(self, rng):
        factors = [rng.normal(size=(n, n)) for n in (3, 4, 2)]
        v = rng.normal(size=24)
        explicit = np.kron(np.kron(factors[0], factors[1]), factors[2]) @ v
        np.testing.assert_allclose(kron_matvec(factors, v), explicit, atol=1e-12)

    def test_kron_matvec_keeps_tensor_shape(self, rng):
        factors = [np.eye(3), np.eye(4)]
        v = rng.normal(size=(3, 4))
        assert kron_matvec(factors, v).shape == (3, 4)

    def test_kron_matvec_rejects_non_square_factor(self, rng):
        with pytest.raises(ShapeError):
            kron_matvec([np.ones((2, 3))], np.ones(3))

    def test_kron_matvec_rejects_size_mismatch(self):
        with pytest.raises(ShapeError):
            kron_matvec([np.eye(2), np.eye(3)], np.ones(5))


class TestKronSolve:
    """Test suite for kron_solve"""

    @pytest.fixture
    def grams(self):
        """Two moderately conditioned axis Grams"""
        return (
            gram_cholesky(np.linspace(0.0, 1.0, 5), 0.3, nugget=1e-3),
            gram_cholesky(np.linspace(-1.0, 1.0, 6), 0.5, nugget=1e-3),
        )

    def test_matches_dense_solve(self, grams, rng):
        v = rng.normal(size=30)
        dense = np.kron(grams[0].matrix, grams[1].matrix)
        np.testing.assert_allclose(
            kron_solve(grams, v), np.linalg.solve(dense, v), rtol=1e-8, atol=1e-8
        )

    def test_inverts_kron_matvec(self, grams, rng):
        v = rng.normal(size=(5, 6))
        matrices = [g.matrix for g in grams]
        np.testing.assert_allclose(
            kron_matvec(matrices, kron_solve(grams, v)), v, atol=1e-9
        )

    def test_mode_solve_rejects_wrong_axis_length(self, grams):
        with pytest.raises(ShapeError):
            mode_solve(np.zeros((6, 5)), grams[0], 0)
