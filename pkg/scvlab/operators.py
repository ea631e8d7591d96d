"""Finite-dimensional operator models

Matrices between weighted inner-product spaces
<x, y> = sum_k x_k conj(y_k) w_k, standing in for T, S and T* between
weighted L^2 spaces. Duals are identified with the spaces through the
inner product.

Most computations run in normalized coordinates x~ = W^(1/2) x, where
the weighted geometry becomes the Euclidean one and
M~ = W_t^(1/2) M W_s^(-1/2).
"""

import logging
import math
import typing

from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from scvlab.errors import (
    DimensionError,
    ParameterError,
    PreconditionError,
    RangeError,
    SubspaceError,
)
from scvlab.types import Certificate, complex_pair, parse_complex


logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10
SUBSPACE_TOLERANCE = 1e-10
SOLVE_TOLERANCE = 1e-10
SYSTEM_TOLERANCE = 1e-12
ESTIMATE_TOLERANCE = 1e-8
AUDIT_SAMPLES = 1000


@dataclass(frozen=True, eq=False)
class WeightedSpace:
    """C^dim with the inner product sum x_k conj(y_k) w_k"""
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or not weights.size:
            raise DimensionError('weights must be a nonempty vector')
        if not np.all(weights > 0):
            raise ParameterError('weights must be strictly positive')
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def unit(cls, dim: int) -> 'WeightedSpace':
        """C^dim with the Euclidean inner product"""
        return cls(np.ones(dim))

    @property
    def dim(self) -> int:
        """Dimension"""
        return self.weights.size

    @property
    def root(self) -> np.ndarray:
        """W^(1/2) as a vector"""
        return np.sqrt(self.weights)

    def inner(self, x, y) -> complex | np.ndarray:
        """<x, y> over the last axis"""
        return np.sum(
            np.asarray(x) * np.conj(np.asarray(y)) * self.weights, axis=-1,
        )

    def norm(self, x) -> float | np.ndarray:
        """sqrt(<x, x>) over the last axis"""
        return np.sqrt(np.real(self.inner(x, x)))


@dataclass(frozen=True, eq=False)
class LinearOpModel:
    """A matrix (target.dim x source.dim) between weighted spaces"""
    source: WeightedSpace
    target: WeightedSpace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (self.target.dim, self.source.dim):
            raise DimensionError(
                f'matrix shape {matrix.shape} does not map C^{self.source.dim}'
                f' to C^{self.target.dim}'
            )
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def from_matrix(
        cls, matrix, source_weights=None, target_weights=None,
    ) -> 'LinearOpModel':
        """An operator with unit weights unless given"""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        rows, cols = matrix.shape
        return cls(
            WeightedSpace(np.ones(cols) if source_weights is None
                          else source_weights),
            WeightedSpace(np.ones(rows) if target_weights is None
                          else target_weights),
            matrix,
        )

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x) @ self.matrix.T

    def normalized(self) -> np.ndarray:
        """W_t^(1/2) M W_s^(-1/2)"""
        return (
            self.target.root[:, None] * self.matrix / self.source.root[None, :]
        )

    def asdict(self) -> dict[str, typing.Any]:
        """Serialize with complex entries as [re, im] pairs"""
        return {
            'source_weights': self.source.weights.tolist(),
            'target_weights': self.target.weights.tolist(),
            'matrix': [[complex_pair(v) for v in row] for row in self.matrix],
        }

    @classmethod
    def fromdict(cls, data) -> 'LinearOpModel':
        """Create a LinearOpModel from its serialized form"""
        source = WeightedSpace(data['source_weights'])
        target = WeightedSpace(data['target_weights'])
        matrix = np.array(
            [[parse_complex(v) for v in row] for row in data['matrix']],
            dtype=complex,
        )
        return cls(source, target, matrix.reshape(target.dim, source.dim))


def adjoint(op: LinearOpModel) -> LinearOpModel:
    """T* with <T x, y>_target = <x, T* y>_source"""
    matrix = (
        op.matrix.conj().T * op.target.weights[None, :]
        / op.source.weights[:, None]
    )
    return LinearOpModel(op.target, op.source, matrix)


def _projector(basis: np.ndarray, dim: int) -> np.ndarray:
    if basis.size == 0:
        return np.zeros((dim, dim), dtype=complex)
    q = linalg.orth(basis, rcond=RANK_TOLERANCE)
    return q @ q.conj().T


def _subspace_gap(a: np.ndarray, b: np.ndarray, dim: int) -> float:
    """Spectral norm of the difference of the orthogonal projectors"""
    return float(np.linalg.norm(_projector(a, dim) - _projector(b, dim), 2))


def graph_perp_check(op: LinearOpModel) -> Certificate:
    """The perp of the graph of T is the graph {(T* y, y)} of T*.

    (y1, y2) is perpendicular to the graph when <x, y1> - <T x, y2> = 0
    for every x, i.e. W_s y1 - M^H W_t y2 = 0.
    """
    s, t = op.source.dim, op.target.dim
    pairing = np.hstack([
        np.diag(op.source.weights).astype(complex),
        -op.matrix.conj().T * op.target.weights[None, :],
    ])
    perp = linalg.null_space(pairing, rcond=RANK_TOLERANCE)
    star = adjoint(op).matrix
    graph_star = np.vstack([star, np.eye(t, dtype=complex)])
    gap = _subspace_gap(perp, graph_star, s + t)
    return Certificate.compare(
        'graph_perp',
        lhs=gap,
        rhs=0.0,
        tolerance=SUBSPACE_TOLERANCE,
        parameters={'shape': [t, s], 'perp_dim': perp.shape[1]},
    )


def range_perp_check(op: LinearOpModel) -> Certificate:
    """null(T*) equals the weighted orthogonal complement of range(T)"""
    t = op.target.dim
    null_star = linalg.null_space(adjoint(op).matrix, rcond=RANK_TOLERANCE)
    range_basis = linalg.orth(op.matrix, rcond=RANK_TOLERANCE)
    if range_basis.size:
        perp = linalg.null_space(
            range_basis.conj().T * op.target.weights[None, :],
            rcond=RANK_TOLERANCE,
        )
    else:
        perp = np.eye(t, dtype=complex)
    gap = _subspace_gap(null_star, perp, t)
    return Certificate.compare(
        'null_adjoint_is_range_perp',
        lhs=gap,
        rhs=0.0,
        tolerance=SUBSPACE_TOLERANCE,
        parameters={'shape': list(op.matrix.shape)},
    )


def _singular(op: LinearOpModel):
    u, sigma, vh = np.linalg.svd(op.normalized())
    cutoff = RANK_TOLERANCE * max(sigma.max(initial=0), 1e-300)
    rank = int(np.sum(sigma > cutoff))
    return u, sigma, vh, rank


def estimate_constant(op: LinearOpModel, subspace=None) -> float:
    """Smallest C with |y restricted to F| <= C |T* y| for all y.

    subspace: columns spanning F in the target, by default range(T).
    F must contain range(T); C is finite only when F equals it.
    """
    _, sigma, _, rank = _singular(op)
    if rank == 0:
        raise RangeError('T is zero; no estimate constant')
    if subspace is not None:
        subspace = np.asarray(subspace, dtype=complex)
        if subspace.ndim == 1:
            subspace = subspace[:, None]
        if subspace.shape[0] != op.target.dim:
            raise DimensionError(
                f'subspace vectors have {subspace.shape[0]} entries, target '
                f'has {op.target.dim}'
            )
        q = linalg.orth(subspace, rcond=RANK_TOLERANCE)
        outside = op.matrix - q @ (q.conj().T @ op.matrix)
        residual = float(np.linalg.norm(outside, 2))
        if residual > SUBSPACE_TOLERANCE * (1 + np.linalg.norm(op.matrix, 2)):
            raise RangeError(
                f'F does not contain range(T): residual {residual:.3g}'
            )
        if q.shape[1] > rank:
            logger.warning(
                'F has dimension %d > rank %d of T; no finite constant',
                q.shape[1], rank,
            )
            return math.inf
    constant = float(1 / sigma[rank - 1])
    logger.debug('estimate constant %.6g from rank %d', constant, rank)
    return constant


def extremal_vector(op: LinearOpModel) -> np.ndarray:
    """A y in range(T) with |y| = C |T* y|"""
    u, _, _, rank = _singular(op)
    if rank == 0:
        raise RangeError('T is zero; no extremal vector')
    return u[:, rank - 1] / op.target.root


def _min_norm_solution(op: LinearOpModel, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (op.target.dim,):
        raise DimensionError(
            f'right-hand side has shape {rhs.shape}, target is '
            f'C^{op.target.dim}'
        )
    pinv = np.linalg.pinv(op.normalized(), rcond=RANK_TOLERANCE)
    x = (pinv @ (op.target.root * rhs)) / op.source.root
    residual = float(op.target.norm(op(x) - rhs))
    if residual > SOLVE_TOLERANCE * max(float(op.target.norm(rhs)), 1e-300):
        raise RangeError(
            f'right-hand side is not in the range: residual {residual:.3g}'
        )
    return x


def _check_bound(x, rhs_norm, x_norm, constant):
    if constant is None:
        return x
    if x_norm > constant * rhs_norm * (1 + SOLVE_TOLERANCE):
        raise PreconditionError(
            f'solution norm exceeds C = {constant:.6g} times the data norm',
            x_norm - constant * rhs_norm,
        )
    return x


def solve_with_bound(
    op: LinearOpModel, z, constant: float | None = None,
) -> np.ndarray:
    """The minimal-norm x with T x = z, checked against |x| <= C |z|"""
    x = _min_norm_solution(op, z)
    return _check_bound(
        x, float(op.target.norm(z)), float(op.source.norm(x)), constant,
    )


def solve_adjoint(
    op: LinearOpModel, v, constant: float | None = None,
) -> np.ndarray:
    """The minimal-norm f with T* f = v, for v perpendicular to null(T)"""
    v = np.asarray(v, dtype=complex)
    null = linalg.null_space(op.matrix, rcond=RANK_TOLERANCE)
    if null.size:
        residual = float(np.abs(op.source.inner(null.T, v)).max())
        if residual > SUBSPACE_TOLERANCE * max(float(op.source.norm(v)), 1.0):
            raise SubspaceError(
                f'v is not perpendicular to null(T): residual {residual:.3g}'
            )
    star = adjoint(op)
    f = _min_norm_solution(star, v)
    return _check_bound(
        f, float(op.source.norm(v)), float(op.target.norm(f)), constant,
    )


def _check_system(t_op: LinearOpModel, s_op: LinearOpModel):
    if s_op.source.dim != t_op.target.dim or not np.allclose(
        s_op.source.weights, t_op.target.weights,
    ):
        raise DimensionError('S must be defined on the target space of T')
    residual = float(np.linalg.norm(s_op.matrix @ t_op.matrix, 2))
    if residual > SYSTEM_TOLERANCE * (
        1 + np.linalg.norm(s_op.matrix, 2) * np.linalg.norm(t_op.matrix, 2)
    ):
        raise PreconditionError('S T is not zero', residual)


def _system_form(t_op: LinearOpModel, s_op: LinearOpModel) -> np.ndarray:
    """T T* + S* S in normalized coordinates on the middle space"""
    t = t_op.normalized()
    s = s_op.normalized()
    return t @ t.conj().T + s.conj().T @ s


def system_constant(t_op: LinearOpModel, s_op: LinearOpModel) -> float:
    """C with |f|^2 <= C^2 (|T* f|^2 + |S f|^2), hence the basic estimate"""
    _check_system(t_op, s_op)
    lowest = float(np.linalg.eigvalsh(_system_form(t_op, s_op))[0])
    if lowest <= RANK_TOLERANCE:
        logger.warning('T T* + S* S is singular; no finite system constant')
        return math.inf
    return float(1 / np.sqrt(lowest))


def _random_complex(rng, shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def basic_estimate_equivalence(
    t_op: LinearOpModel,
    s_op: LinearOpModel,
    constant: float,
    seed: int = 0,
    samples: int = AUDIT_SAMPLES,
) -> Certificate:
    """Audit |f| <= C (|T* f| + |S f|) and its bilinear form.

    The bilinear form is |<u, y>| <= C (|T* y| |u| + |S u| |y|). Random f
    and (y, u) pairs are joined by the eigenvectors of T T* + S* S, which
    contain the extremal f. The certificate also requires
    null(T*) = range(T)^perp.
    """
    _check_system(t_op, s_op)
    space = t_op.target
    star = adjoint(t_op)
    rng = np.random.default_rng(seed)

    _, vectors = np.linalg.eigh(_system_form(t_op, s_op))
    extremal = (vectors / space.root[:, None]).T
    fs = np.vstack([extremal, _random_complex(rng, (samples, space.dim))])
    with np.errstate(divide='ignore', invalid='ignore'):
        first = space.norm(fs) / (
            star.target.norm(star(fs)) + s_op.target.norm(s_op(fs))
        )
        ys = np.vstack([extremal, _random_complex(rng, (samples, space.dim))])
        us = np.vstack([extremal, _random_complex(rng, (samples, space.dim))])
        second = np.abs(space.inner(us, ys)) / (
            star.target.norm(star(ys)) * space.norm(us)
            + s_op.target.norm(s_op(us)) * space.norm(ys)
        )
    first = np.nan_to_num(first, nan=0.0)
    second = np.nan_to_num(second, nan=0.0)
    worst_first = int(np.argmax(first))
    worst_second = int(np.argmax(second))
    perp = range_perp_check(t_op)
    lhs = max(first[worst_first], second[worst_second])
    certificate = Certificate.compare(
        'basic_estimate',
        lhs=lhs,
        rhs=constant,
        tolerance=ESTIMATE_TOLERANCE * constant,
        witness={
            'f': fs[worst_first],
            'y': ys[worst_second],
            'u': us[worst_second],
        },
        parameters={
            'seed': seed,
            'samples': samples,
            'first_ratio': first[worst_first],
            'second_ratio': second[worst_second],
            'null_range_residual': perp.lhs,
        },
    )
    if not perp.passed:
        certificate = replace(certificate, passed=False)
    logger.info(
        'basic estimate with C=%.6g: worst ratio %.6g', constant, lhs,
    )
    return certificate


def random_instance(
    rows: int, cols: int, seed: int = 0, rank: int | None = None,
) -> LinearOpModel:
    """A seeded random operator C^cols -> C^rows with weights in [0.5, 2]"""
    if rows < 1 or cols < 1:
        raise ParameterError(f'need positive dimensions, got {rows}x{cols}')
    rng = np.random.default_rng(seed)
    if rank is None:
        matrix = _random_complex(rng, (rows, cols))
    else:
        if not 0 <= rank <= min(rows, cols):
            raise ParameterError(f'rank {rank} impossible for {rows}x{cols}')
        matrix = (
            _random_complex(rng, (rows, rank)) @ _random_complex(rng, (rank, cols))
        )
    return LinearOpModel(
        WeightedSpace(rng.uniform(0.5, 2.0, cols)),
        WeightedSpace(rng.uniform(0.5, 2.0, rows)),
        matrix,
    )


def complement_operator(op: LinearOpModel) -> LinearOpModel:
    """An S with S T = 0 whose null space is exactly range(T).

    S maps the target of T onto C^k, k = codimension of the range, unit
    weights; it is the coordinate map of the weighted orthogonal
    projection onto range(T)^perp.
    """
    u, _, _, rank = _singular(op)
    complement = u[:, rank:]
    matrix = complement.conj().T * op.target.root[None, :]
    if not matrix.size:
        matrix = np.zeros((1, op.target.dim), dtype=complex)
    return LinearOpModel(
        op.target, WeightedSpace.unit(matrix.shape[0]), matrix,
    )


def random_system(
    rows: int, cols: int, seed: int = 0,
) -> tuple[LinearOpModel, LinearOpModel]:
    """A random (S, T) system: T from random_instance, S its complement"""
    t_op = random_instance(rows, cols, seed)
    return t_op, complement_operator(t_op)
