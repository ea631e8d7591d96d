"""Wirtinger calculus by finite differences

d/dz_j = (d/dx_j - i d/dy_j) / 2 and d/dzbar_j = (d/dx_j + i d/dy_j) / 2
on grid fields, Levi forms of weights given pointwise, and dbar on
(p, q)-forms.

Real partials use centered differences, falling back to second-order
one-sided stencils where a neighbour is masked out:
    interior: (f[i+1] - f[i-1]) / 2h
    forward:  (-3f[i] + 4f[i+1] - f[i+2]) / 2h
    backward: (3f[i] - 4f[i-1] + f[i-2]) / 2h
"""

import itertools
import logging
import typing

from dataclasses import dataclass

import numpy as np

from scvlab.errors import DegreeError, StencilError
from scvlab.expr import ExprAst, evaluate, real_point
from scvlab.grid import (
    FormField,
    increasing_multiindices,
    MultiIndex,
    ScalarField,
)
from scvlab.hermitian import eig, HermitianMatrix


logger = logging.getLogger(__name__)

LEVI_STEP = 1e-4

RealFunction = typing.Callable[[np.ndarray], np.ndarray]


def _shift(arr: np.ndarray, dim: int, k: int) -> np.ndarray:
    """out[..., i, ...] = arr[..., i + k, ...], padded with zeros"""
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if k > 0:
        src[dim] = slice(k, None)
        dst[dim] = slice(None, -k)
    else:
        src[dim] = slice(None, k)
        dst[dim] = slice(-k, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def partial(
    values: np.ndarray, region: np.ndarray, dim: int, h: float,
) -> np.ndarray:
    """Real partial derivative along one lattice dim, zero outside region"""
    f1, b1 = _shift(values, dim, 1), _shift(values, dim, -1)
    f2, b2 = _shift(values, dim, 2), _shift(values, dim, -2)
    has_f1, has_b1 = _shift(region, dim, 1), _shift(region, dim, -1)
    has_f2, has_b2 = _shift(region, dim, 2), _shift(region, dim, -2)

    centered = has_f1 & has_b1
    forward = ~centered & has_f1 & has_f2
    backward = ~centered & ~forward & has_b1 & has_b2
    forward1 = ~centered & ~forward & ~backward & has_f1
    backward1 = ~centered & ~forward & ~backward & ~forward1 & has_b1

    isolated = region & ~(centered | forward | backward | forward1 | backward1)
    if isolated.any():
        node = tuple(int(i) for i in np.argwhere(isolated)[0])
        raise StencilError(
            f'node {node} has no neighbour along lattice dim {dim}'
        )

    out = np.zeros_like(values)
    out = np.where(centered, (f1 - b1) / (2 * h), out)
    out = np.where(forward, (-3 * values + 4 * f1 - f2) / (2 * h), out)
    out = np.where(backward, (3 * values - 4 * b1 + b2) / (2 * h), out)
    out = np.where(forward1, (f1 - values) / h, out)
    out = np.where(backward1, (values - b1) / h, out)
    return np.where(region, out, 0)


def _real_partials(field: ScalarField, axis: int):
    grid = field.grid
    dim_x, dim_y = grid.axis_dims(axis)
    h = grid.spacing[axis - 1]
    region = field.region
    return (
        partial(field.values, region, dim_x, h),
        partial(field.values, region, dim_y, h),
    )


def d_dz(field: ScalarField, axis: int) -> ScalarField:
    """d field / dz_axis"""
    dx, dy = _real_partials(field, axis)
    return ScalarField(field.grid, 0.5 * (dx - 1j * dy), field.support)


def d_dzbar(field: ScalarField, axis: int) -> ScalarField:
    """d field / dzbar_axis"""
    dx, dy = _real_partials(field, axis)
    return ScalarField(field.grid, 0.5 * (dx + 1j * dy), field.support)


def laplacian(field: ScalarField) -> ScalarField:
    """sum_j 4 d/dz_j d/dzbar_j, composed from first-order stencils"""
    total = None
    for axis in range(1, field.grid.n + 1):
        term = 4 * d_dz(d_dzbar(field, axis), axis)
        total = term if total is None else total + term
    return total


def cr_residual(
    field: ScalarField, region: np.ndarray | None = None,
) -> float:
    """max over axes and interior nodes of |d field / dzbar_j|"""
    where = field.grid.interior(1) & field.region
    if region is not None:
        where &= region
    return max(
        d_dzbar(field, axis).sup(where)
        for axis in range(1, field.grid.n + 1)
    )


def real_function(weight: ExprAst | RealFunction) -> RealFunction:
    """A weight as a function of real points of shape (2n, ...)"""
    if isinstance(weight, ExprAst):
        return lambda point: evaluate(weight, point)
    return weight


@dataclass(frozen=True, eq=False)
class LeviForm:
    """The complex Hessian d^2 phi / dz_j dzbar_k at a point"""
    point: np.ndarray
    matrix: HermitianMatrix

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues, descending"""
        return eig(self.matrix)[0]

    @property
    def min_eigenvalue(self) -> float:
        """The smallest eigenvalue"""
        return float(self.eigenvalues[-1])


def levi_matrices(
    weight: ExprAst | RealFunction,
    points,
    h_fd: float | None = None,
) -> HermitianMatrix:
    """Levi forms at many points at once.

    points: complex array (K, n). Returns a stack of K Hermitian matrices.
    Real Hessians come from centered second differences with step
    h_fd, by default 1e-4 (1 + |point|) per point.
    """
    fn = real_function(weight)
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    count, n = points.shape
    base = real_point(points.T)
    dims = 2 * n
    if h_fd is None:
        steps = LEVI_STEP * (1 + np.linalg.norm(points, axis=1))
    else:
        steps = np.full(count, float(h_fd))

    offsets = [np.zeros(dims)]
    for a in range(dims):
        for sign in (1, -1):
            offset = np.zeros(dims)
            offset[a] = sign
            offsets.append(offset)
    pairs = list(itertools.combinations(range(dims), 2))
    for a, b in pairs:
        for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            offset = np.zeros(dims)
            offset[a] = sa
            offset[b] = sb
            offsets.append(offset)
    offsets = np.array(offsets)

    stencil = base[:, None, :] + offsets.T[:, :, None] * steps[None, None, :]
    values = np.asarray(fn(stencil), dtype=float).reshape(len(offsets), count)
    center = values[0]
    h2 = steps ** 2

    hessian = np.zeros((count, dims, dims))
    for a in range(dims):
        plus, minus = values[1 + 2 * a], values[2 + 2 * a]
        hessian[:, a, a] = (plus - 2 * center + minus) / h2
    start = 1 + 2 * dims
    for k, (a, b) in enumerate(pairs):
        pp, pm, mp, mm = values[start + 4 * k:start + 4 * k + 4]
        mixed = (pp - pm - mp + mm) / (4 * h2)
        hessian[:, a, b] = mixed
        hessian[:, b, a] = mixed

    hx = hessian[:, 0::2, 0::2]
    hy = hessian[:, 1::2, 1::2]
    hxy = hessian[:, 0::2, 1::2]
    levi = 0.25 * (hx + hy + 1j * (hxy - np.swapaxes(hxy, -1, -2)))
    return HermitianMatrix.from_array(levi)


def levi_form(
    weight: ExprAst | RealFunction, point, h_fd: float | None = None,
) -> LeviForm:
    """The Levi form of a weight at one point"""
    point = np.atleast_1d(np.asarray(point, dtype=complex))
    stack = levi_matrices(weight, point[None, :], h_fd)
    matrix = HermitianMatrix(stack.entries[0], stack.deviation)
    return LeviForm(point, matrix)


def multiindex_sign(
    j_from: typing.Sequence[int], j_to: typing.Sequence[int],
) -> int:
    """Signature of the permutation taking j_from to j_to, 0 if none"""
    j_from, j_to = list(j_from), list(j_to)
    if len(set(j_from)) != len(j_from) or sorted(j_from) != sorted(j_to):
        return 0
    perm = [j_to.index(j) for j in j_from]
    inversions = sum(
        1 for a, b in itertools.combinations(range(len(perm)), 2)
        if perm[a] > perm[b]
    )
    return -1 if inversions % 2 else 1


def dbar_form(f: FormField) -> FormField:
    """dbar of a (p, q)-form, a (p, q + 1)-form.

    The coefficient of dz^I ^ dzbar^M is
    sum over j in M of sign(j M^j -> M) (-1)^p d f_{I, M^j} / dzbar_j,
    where M^j is M with j removed.
    """
    p, q = f.degree
    n = f.grid.n
    if q >= n:
        raise DegreeError(f'dbar of a ({p}, {q})-form in dimension {n}')
    coeffs: dict[tuple[MultiIndex, MultiIndex], ScalarField] = {}
    for multi_i in increasing_multiindices(n, p):
        for multi_m in increasing_multiindices(n, q + 1):
            total = None
            for j in multi_m:
                rest = tuple(k for k in multi_m if k != j)
                coeff = f.coeffs.get((multi_i, rest))
                if coeff is None:
                    continue
                sign = multiindex_sign((j,) + rest, multi_m) * (-1) ** p
                term = sign * d_dzbar(coeff, j)
                total = term if total is None else total + term
            if total is not None:
                coeffs[(multi_i, multi_m)] = total
    return FormField(f.grid, (p, q + 1), coeffs)


def form_sup(f: FormField, region: np.ndarray | None = None) -> float:
    """Largest coefficient modulus over a region"""
    return max((c.sup(region) for c in f.coeffs.values()), default=0.0)
