"""Hermitian matrix and weighted norm tests"""
import math

import numpy as np
import pytest

from scvlab.errors import (
    DegreeError,
    DimensionError,
    NotPSDError,
    ParameterError,
    SingularMatrixError,
)
from scvlab.expr import parse
from scvlab.grid import build_grid, FormField, sample
from scvlab.hermitian import (
    eig,
    HermitianMatrix,
    is_psd,
    is_self_adjoint,
    norm_A_sq,
    pairing,
    pointwise_modulus,
    sqrt_psd,
    weighted_lp_norm,
)
from scvlab.types import DomainSpec


def _random_hermitian(rng, n, shift=0.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMatrix.from_array(a @ np.conj(a.T) + shift * np.eye(n))


def test_from_array_symmetrizes():
    """The Hermitian part is kept and the deviation recorded"""
    matrix = HermitianMatrix.from_array([[1, 2], [0, 1]])
    assert np.allclose(matrix.entries, [[1, 1], [1, 1]])
    assert matrix.deviation == 2
    with pytest.raises(DimensionError):
        HermitianMatrix.from_array([1, 2])


def test_eig_diagonal():
    """Diagonal matrices come back sorted"""
    values, vectors = eig(HermitianMatrix.from_array(np.diag([1.0, 3.0, 2.0])))
    assert values.tolist() == [3.0, 2.0, 1.0]
    assert np.allclose(np.abs(vectors), np.eye(3)[:, [1, 2, 0]])


def test_eig_matches_numpy():
    """Jacobi agrees with LAPACK on random matrices"""
    rng = np.random.default_rng(3)
    for n in (2, 3, 5):
        matrix = _random_hermitian(rng, n)
        values, vectors = eig(matrix)
        assert np.allclose(values, np.linalg.eigvalsh(matrix.entries)[::-1])
        assert np.allclose(
            matrix.entries @ vectors, vectors * values[None, :], atol=1e-10,
        )
        assert np.allclose(np.conj(vectors.T) @ vectors, np.eye(n), atol=1e-12)


def test_eig_stack():
    """A stack of matrices is diagonalized at once"""
    rng = np.random.default_rng(5)
    stack = np.stack([_random_hermitian(rng, 3).entries for _ in range(4)])
    values, _ = eig(HermitianMatrix(stack))
    assert values.shape == (4, 3)
    for k in range(4):
        assert np.allclose(values[k], np.linalg.eigvalsh(stack[k])[::-1])


def test_is_psd():
    """Gram matrices are PSD, their negatives are not"""
    rng = np.random.default_rng(1)
    matrix = _random_hermitian(rng, 3)
    assert is_psd(matrix)
    assert not is_psd(HermitianMatrix(-matrix.entries - np.eye(3)))


def test_self_adjoint():
    """<x, Ay> = <Ax, y>"""
    rng = np.random.default_rng(2)
    matrix = _random_hermitian(rng, 4)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert is_self_adjoint(matrix, x, y) < 1e-10


def test_sqrt_psd():
    """The square root squares back"""
    rng = np.random.default_rng(4)
    matrix = _random_hermitian(rng, 3)
    root = sqrt_psd(matrix)
    assert np.allclose(root @ root, matrix.entries, atol=1e-10)
    assert is_psd(root)
    with pytest.raises(NotPSDError):
        sqrt_psd(HermitianMatrix.from_array(np.diag([1.0, -1.0])))


def test_norm_A_sq():  # pylint: disable=invalid-name
    """f* A^-1 f against a direct solve"""
    rng = np.random.default_rng(6)
    matrix = _random_hermitian(rng, 3, shift=1.0)
    f = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    expected = np.vdot(f, np.linalg.solve(matrix.entries, f)).real
    assert norm_A_sq(f, matrix) == pytest.approx(expected, rel=1e-10)
    assert norm_A_sq([2.0], HermitianMatrix.from_array([[4.0]])) == 1.0


def test_norm_A_sq_errors():  # pylint: disable=invalid-name
    """Singular matrices and wrong lengths"""
    with pytest.raises(SingularMatrixError):
        norm_A_sq([1, 0], HermitianMatrix.from_array(np.diag([1.0, 0.0])))
    with pytest.raises(DimensionError):
        norm_A_sq([1, 0, 0], HermitianMatrix.from_array(np.eye(2)))


def test_weighted_norms():
    """|dzbar|_{L^2, |z|^2}^2 = pi (1 - 1/e) on the unit disc"""
    grid = build_grid(DomainSpec.disc(0, 1), 81)
    form = FormField.from_components(grid, [sample(lambda z: 1 + 0 * z, grid)])
    assert np.all(pointwise_modulus(form, 2)[grid.mask] == 1)
    norm = weighted_lp_norm(form, parse('z_abs2_1'), 2)
    assert norm ** 2 == pytest.approx(math.pi * (1 - math.exp(-1)), rel=0.01)
    assert pairing(form, form, parse('z_abs2_1')).real == pytest.approx(
        norm ** 2)
    with pytest.raises(ParameterError):
        weighted_lp_norm(form, None, 0.5)


def test_pairing_degrees():
    """Forms of different degrees do not pair"""
    grid = build_grid(DomainSpec.disc(0, 1), 9)
    field = sample(lambda z: z, grid)
    with pytest.raises(DegreeError):
        pairing(FormField.scalar(field),
                FormField.from_components(grid, [field]), None)
