"""Hermitian matrices and weighted norms

Eigendecompositions come from a batched cyclic Jacobi iteration, so the
same code serves one Levi form or a stack of them, one per grid node.
"""

import logging
import typing

from dataclasses import dataclass

import numpy as np

from scvlab.errors import (
    ConvergenceError,
    DegreeError,
    DimensionError,
    NotPSDError,
    ParameterError,
    SingularMatrixError,
)
from scvlab.expr import ExprAst, evaluate
from scvlab.grid import FormField, integrate, ScalarField


logger = logging.getLogger(__name__)

MAX_SWEEPS = 100
PSD_TOLERANCE = 1e-10
SINGULAR_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """An n x n Hermitian matrix, or a stack (..., n, n) of them"""
    entries: np.ndarray
    deviation: float = 0.0

    @classmethod
    def from_array(cls, array) -> 'HermitianMatrix':
        """Symmetrize (A + A*) / 2, recording how far A was from Hermitian"""
        array = np.asarray(array, dtype=complex)
        if array.ndim < 2 or array.shape[-1] != array.shape[-2]:
            raise DimensionError(f'not a square matrix: shape {array.shape}')
        adjoint = np.conj(np.swapaxes(array, -1, -2))
        deviation = float(np.abs(array - adjoint).max()) if array.size else 0.0
        return cls((array + adjoint) / 2, deviation)

    @property
    def n(self) -> int:
        """Matrix size"""
        return self.entries.shape[-1]

    def norm(self) -> float:
        """Largest Frobenius norm in the stack"""
        return float(np.linalg.norm(self.entries, axis=(-2, -1)).max())

    def __matmul__(self, other):
        if isinstance(other, HermitianMatrix):
            return self.entries @ other.entries
        return self.entries @ other


def _off_diagonal(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    total = (np.abs(a) ** 2).sum(axis=(-2, -1))
    diagonal = (np.abs(a[..., np.arange(n), np.arange(n)]) ** 2).sum(axis=-1)
    return np.sqrt(np.maximum(total - diagonal, 0.0))


def eig(matrix: HermitianMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    Cyclic Jacobi: each rotation zeroes one off-diagonal pair of every
    matrix in the stack at once.
    """
    a = np.array(matrix.entries, dtype=complex)
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = max(matrix.norm(), 1e-300)

    for sweep in range(MAX_SWEEPS):
        off = _off_diagonal(a)
        if np.all(off <= 1e-14 * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                active = np.abs(apq) > 1e-17 * scale
                if not np.any(active):
                    continue
                phase = np.exp(-1j * np.angle(apq))
                theta = 0.5 * np.arctan2(
                    2 * np.abs(apq), (a[..., q, q] - a[..., p, p]).real,
                )
                c = np.where(active, np.cos(theta), 1.0)
                s = np.where(active, np.sin(theta), 0.0)
                rot = np.zeros(a.shape[:-2] + (2, 2), dtype=complex)
                rot[..., 0, 0] = c
                rot[..., 0, 1] = s
                rot[..., 1, 0] = -s * phase
                rot[..., 1, 1] = c * phase
                idx = [p, q]
                a[..., :, idx] = a[..., :, idx] @ rot
                a[..., idx, :] = np.conj(np.swapaxes(rot, -1, -2)) @ a[..., idx, :]
                v[..., :, idx] = v[..., :, idx] @ rot
    else:
        off = float(_off_diagonal(a).max())
        raise ConvergenceError(
            f'Jacobi iteration did not converge in {MAX_SWEEPS} sweeps, '
            f'off-diagonal norm {off:.3g}'
        )
    logger.debug('Jacobi converged after %d sweeps (n=%d)', sweep, n)

    values = a[..., np.arange(n), np.arange(n)].real
    order = np.argsort(-values, axis=-1, kind='stable')
    values = np.take_along_axis(values, order, axis=-1)
    vectors = np.take_along_axis(v, order[..., None, :], axis=-1)
    return values, vectors


def is_psd(matrix: HermitianMatrix, tol: float = PSD_TOLERANCE) -> bool:
    """All eigenvalues >= -tol (for every matrix of a stack)"""
    values, _ = eig(matrix)
    return bool(np.all(values[..., -1] >= -tol))


def is_self_adjoint(
    matrix: HermitianMatrix, x: np.ndarray, y: np.ndarray,
) -> float:
    """|<x, Ay> - <Ax, y>|, zero up to rounding for Hermitian A"""
    a = matrix.entries
    return float(abs(np.vdot(a @ y, x) - np.vdot(y, a @ x)))


def sqrt_psd(
    matrix: HermitianMatrix, tol: float = PSD_TOLERANCE,
) -> HermitianMatrix:
    """The PSD square root, sharing the eigenvectors of the input"""
    values, vectors = eig(matrix)
    if np.any(values < -tol):
        raise NotPSDError(
            f'matrix has eigenvalue {float(values.min()):.6g} below -{tol:g}'
        )
    roots = np.sqrt(np.clip(values, 0.0, None))
    root = (vectors * roots[..., None, :]) @ np.conj(np.swapaxes(vectors, -1, -2))
    return HermitianMatrix.from_array(root)


def norm_A_sq(  # pylint: disable=invalid-name
    f, matrix: HermitianMatrix,
) -> typing.Any:
    """f* A^-1 f via the eigendecomposition of A.

    f has shape (..., n) matching a stack of matrices (..., n, n).
    """
    f = np.asarray(f, dtype=complex)
    if f.shape[-1] != matrix.n:
        raise DimensionError(
            f'vector of length {f.shape[-1]} for a {matrix.n}x{matrix.n} matrix'
        )
    values, vectors = eig(matrix)
    low = values[..., -1] <= SINGULAR_TOLERANCE
    if np.any(low):
        location = tuple(int(i) for i in np.argwhere(np.atleast_1d(low))[0])
        raise SingularMatrixError(
            f'matrix is singular (min eigenvalue '
            f'{float(np.min(values[..., -1])):.3g})',
            location,
        )
    coords = np.einsum('...jk,...j->...k', np.conj(vectors), f)
    result = (np.abs(coords) ** 2 / values).sum(axis=-1)
    if result.ndim == 0:
        return float(result)
    return result


def _weight_values(grid, phi: ExprAst | ScalarField | None) -> np.ndarray:
    if phi is None:
        return np.zeros(grid.shape)
    if isinstance(phi, ScalarField):
        return phi.values.real
    values = evaluate(phi, grid.real_points())
    return grid.scatter(values)


def pointwise_modulus(f: FormField, r: float) -> np.ndarray:
    """|f|^r = sum' |f_IJ|^r at every node"""
    total = np.zeros(f.grid.shape)
    for coeff in f.coeffs.values():
        total = total + np.abs(coeff.values) ** r
    return total


def weighted_lp_norm(
    f: FormField, phi: ExprAst | ScalarField | None, r: float,
) -> float:
    """(integral of |f|^r e^-phi)^(1/r); the norm, not its r-th power"""
    if r < 1:
        raise ParameterError(f'need r >= 1, got {r}')
    density = pointwise_modulus(f, r) * np.exp(-_weight_values(f.grid, phi))
    total = integrate(ScalarField(f.grid, density)).real
    return float(max(total, 0.0) ** (1 / r))


def pairing(
    f: FormField, g: FormField, phi: ExprAst | ScalarField | None,
) -> complex:
    """<f, g>_phi = integral of sum' f_IJ conj(g_IJ) e^-phi"""
    if f.degree != g.degree:
        raise DegreeError(f'pairing of degrees {f.degree} and {g.degree}')
    if f.grid is not g.grid:
        raise DimensionError('pairing of forms on different grids')
    density = np.zeros(f.grid.shape, dtype=complex)
    for key in set(f.coeffs) & set(g.coeffs):
        density += f.coeffs[key].values * np.conj(g.coeffs[key].values)
    density *= np.exp(-_weight_values(f.grid, phi))
    return integrate(ScalarField(f.grid, density))
