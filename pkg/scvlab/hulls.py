"""Hulls of sampled compacts

Outer approximations of the polynomial hull and of the psh hull of a
finite sample K: a candidate point is kept iff no function of a finite
family exceeds its sup over K there. Fewer functions keep more points,
so every retained set contains the true hull of the sample.
"""

import itertools
import logging
import typing

from dataclasses import dataclass, field

import numpy as np

from scvlab.errors import (
    DimensionError,
    DomainError,
    ParameterError,
    PreconditionError,
)
from scvlab.expr import ExprAst, parse, real_point
from scvlab.psh import psh_test
from scvlab.types import Certificate, DomainSpec, Sweep
from scvlab.wirtinger import real_function, RealFunction


logger = logging.getLogger(__name__)

SUP_SLACK = 1e-9
PSH_SLACK = 1e-9
DEFAULT_COUNT = 25
CHUNK = 4096


@dataclass(frozen=True, eq=False)
class CompactSample:
    """Sample points (K, n) of a compact set"""
    points: np.ndarray
    label: str = 'K'

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or not points.shape[0]:
            raise ParameterError(f'{self.label}: need a nonempty (K, n) sample')
        object.__setattr__(self, 'points', points)

    @property
    def n(self) -> int:
        """Complex dimension"""
        return self.points.shape[1]

    @classmethod
    def circle(
        cls, center: complex, radius: float, count: int = 256,
        label: str = 'circle',
    ) -> 'CompactSample':
        """count points on |z - center| = radius"""
        angles = 2 * np.pi * np.arange(count) / count
        return cls(complex(center) + radius * np.exp(1j * angles), label)

    @classmethod
    def torus(
        cls, centers: typing.Sequence[complex], radii: typing.Sequence[float],
        count: int = 32, label: str = 'torus',
    ) -> 'CompactSample':
        """count points per axis on the distinguished boundary"""
        angles = 2 * np.pi * np.arange(count) / count
        circles = [
            complex(c) + r * np.exp(1j * angles) for c, r in zip(centers, radii)
        ]
        grid = np.meshgrid(*circles, indexing='ij')
        return cls(np.stack([g.ravel() for g in grid], axis=-1), label)

    def check_inside(self, domain: DomainSpec):
        """Raise DomainError unless every sample point is in the domain"""
        if self.n != domain.dimension:
            raise DomainError(
                f'{self.label} lives in C^{self.n}, the domain in '
                f'C^{domain.dimension}'
            )
        if np.any(_boundary_distance(domain, self.points) <= 0):
            raise DomainError(f'{self.label} leaves the domain')


def _boundary_distance(domain: DomainSpec, points: np.ndarray) -> np.ndarray:
    return np.min(np.stack([
        axis.distance(points[:, j]) for j, axis in enumerate(domain.axes)
    ]), axis=0)


def _candidates(candidates, n: int) -> np.ndarray:
    candidates = np.asarray(candidates, dtype=complex)
    if candidates.ndim == 1:
        candidates = candidates[:, None]
    if candidates.shape[1] != n:
        raise DimensionError(
            f'candidates live in C^{candidates.shape[1]}, the sample in C^{n}'
        )
    return candidates


def monomial_exponents(n: int, degree: int) -> np.ndarray:
    """All alpha with |alpha| <= degree, ordered by total degree"""
    exponents = [
        alpha for alpha in itertools.product(range(degree + 1), repeat=n)
        if sum(alpha) <= degree
    ]
    exponents.sort(key=lambda alpha: (sum(alpha), alpha[::-1]))
    return np.array(exponents, dtype=int)


@dataclass(frozen=True, eq=False)
class PolynomialFamily:
    """A finite family of holomorphic polynomials on C^n.

    Columns of `coefficients` are polynomials in the monomial basis
    `exponents`; `roots` lists one-axis vanishing products
    prod_i (z_axis - p_i), kept in factored form so they vanish exactly.
    """
    n: int
    degree: int
    exponents: np.ndarray
    coefficients: np.ndarray
    labels: list[str]
    roots: list[tuple[int, np.ndarray]] = field(default_factory=list)
    seed: int = 0

    @property
    def size(self) -> int:
        """Number of polynomials"""
        return self.coefficients.shape[1] + len(self.roots)

    def evaluate(self, points) -> np.ndarray:
        """Values at points (P, n), shape (P, size)"""
        points = _candidates(points, self.n)
        basis = np.prod(
            points[:, None, :] ** self.exponents[None, :, :], axis=-1,
        )
        columns = [basis @ self.coefficients]
        for axis, roots in self.roots:
            columns.append(np.prod(
                points[:, axis, None] - roots[None, :], axis=-1,
            )[:, None])
        return np.concatenate(columns, axis=1)


def _random_coefficients(rng, count: int, size: int) -> np.ndarray:
    radius = np.sqrt(rng.uniform(size=(size, count)))
    angle = rng.uniform(0, 2 * np.pi, size=(size, count))
    return radius * np.exp(1j * angle)


def polynomial_family(
    sample: CompactSample,
    degree: int,
    count: int = DEFAULT_COUNT,
    seed: int = 0,
) -> PolynomialFamily:
    """Monomials, random polynomials and vanishing products up to degree.

    Each degree level d = 1..degree adds `count` random polynomials of
    degree <= d with coefficients uniform in the unit disc, seeded by
    (seed, d), so raising the degree only adds functions.
    """
    if degree < 1:
        raise ParameterError(f'degree must be at least 1, got {degree}')
    if count < 0:
        raise ParameterError(f'count must be non-negative, got {count}')
    n = sample.n
    exponents = monomial_exponents(n, degree)
    total = np.sum(exponents, axis=1)
    blocks = [np.eye(len(exponents), dtype=complex)]
    labels = ['z^' + ','.join(str(a) for a in alpha) for alpha in exponents]
    for level in range(1, degree + 1):
        rng = np.random.default_rng([seed, level])
        coeffs = np.zeros((len(exponents), count), dtype=complex)
        active = total <= level
        coeffs[active] = _random_coefficients(rng, count, int(active.sum()))
        blocks.append(coeffs)
        labels.extend(f'random[{level}.{k}]' for k in range(count))

    roots = []
    for axis in range(n):
        distinct = np.unique(np.round(sample.points[:, axis], 12))
        if len(distinct) <= degree:
            roots.append((axis, distinct))
            labels.append(f'vanishing[z{axis + 1}]')
    family = PolynomialFamily(
        n=n,
        degree=degree,
        exponents=exponents,
        coefficients=np.concatenate(blocks, axis=1),
        labels=labels,
        roots=roots,
        seed=seed,
    )
    logger.debug(
        'polynomial family on C^%d, degree %d: %d functions',
        n, degree, family.size,
    )
    return family


def _sup_filter(values_on_k, evaluate, candidates, slack) -> np.ndarray:
    bound = slack(np.max(values_on_k, axis=0))
    retained = np.ones(len(candidates), dtype=bool)
    for start in range(0, len(candidates), CHUNK):
        values = evaluate(candidates[start:start + CHUNK])
        retained[start:start + CHUNK] = np.all(values <= bound, axis=1)
    return retained


def poly_hull_membership(
    sample: CompactSample,
    candidates,
    degree: int,
    count: int = DEFAULT_COUNT,
    seed: int = 0,
) -> np.ndarray:
    """Keep z iff |f(z)| <= sup_K |f| (1 + 1e-9) for every family member"""
    family = polynomial_family(sample, degree, count, seed)
    candidates = _candidates(candidates, sample.n)
    retained = _sup_filter(
        np.abs(family.evaluate(sample.points)),
        lambda z: np.abs(family.evaluate(z)),
        candidates,
        lambda sup: sup * (1 + SUP_SLACK),
    )
    logger.info(
        'polynomial hull of %s: %d of %d candidates retained by %d functions',
        sample.label, int(retained.sum()), len(candidates), family.size,
    )
    return retained


@dataclass(frozen=True, eq=False)
class PshFamilyMember:
    """A psh function with the probe points it is certified at"""
    label: str
    fn: RealFunction
    probes: np.ndarray

    @classmethod
    def from_expr(cls, source: str | ExprAst, probes) -> 'PshFamilyMember':
        """A member given by a weight expression"""
        ast = parse(source) if isinstance(source, str) else source
        return cls(ast.canonical(), real_function(ast), np.asarray(probes))

    def values(self, points: np.ndarray) -> np.ndarray:
        """u at complex points (P, n)"""
        return np.asarray(self.fn(real_point(points.T)), dtype=float)


def modulus_family(
    family: PolynomialFamily, probes,
) -> list[PshFamilyMember]:
    """|f| for every f in a polynomial family"""
    members = []
    for k, label in enumerate(family.labels):
        def modulus(point, k=k):
            point = np.asarray(point, dtype=float)
            z = point[0::2] + 1j * point[1::2]
            flat = np.moveaxis(z.reshape(family.n, -1), 0, -1)
            values = np.abs(family.evaluate(flat)[:, k])
            return values.reshape(z.shape[1:])
        members.append(PshFamilyMember(f'|{label}|', modulus, np.asarray(probes)))
    return members


def psh_hull_membership(
    sample: CompactSample,
    candidates,
    family: typing.Sequence[PshFamilyMember],
) -> np.ndarray:
    """Keep z iff u(z) <= sup_K u + 1e-9 for every member u.

    Every member must pass psh_test at its probes first.
    """
    candidates = _candidates(candidates, sample.n)
    retained = np.ones(len(candidates), dtype=bool)
    for member in family:
        certificate = psh_test(member.fn, member.probes)
        if not certificate.passed:
            raise PreconditionError(
                f'{member.label} is not psh', -certificate.rhs,
            )
        retained &= _sup_filter(
            member.values(sample.points)[:, None],
            lambda z, member=member: member.values(z)[:, None],
            candidates,
            lambda sup: sup + PSH_SLACK,
        )
    logger.info(
        'psh hull of %s: %d of %d candidates retained by %d functions',
        sample.label, int(retained.sum()), len(candidates), len(family),
    )
    return retained


def hull_inclusion_check(
    sample: CompactSample,
    candidates,
    degree: int,
    probes,
    count: int = DEFAULT_COUNT,
    seed: int = 0,
) -> Certificate:
    """The psh hull from |f| sits inside the polynomial hull from f"""
    candidates = _candidates(candidates, sample.n)
    poly = poly_hull_membership(sample, candidates, degree, count, seed)
    family = polynomial_family(sample, degree, count, seed)
    psh = psh_hull_membership(sample, candidates, modulus_family(family, probes))
    outside = psh & ~poly
    witness = None
    if outside.any():
        witness = {'point': candidates[np.argmax(outside)]}
    return Certificate.compare(
        'psh_hull_in_poly_hull',
        lhs=int(outside.sum()),
        rhs=0,
        witness=witness,
        parameters={
            'degree': degree,
            'family_size': family.size,
            'seed': seed,
            'poly_retained': int(poly.sum()),
            'psh_retained': int(psh.sum()),
        },
    )


def _hull_distances(
    sample: CompactSample,
    candidates,
    retained: np.ndarray,
    domain: DomainSpec,
) -> tuple[np.ndarray, float, np.ndarray]:
    sample.check_inside(domain)
    candidates = _candidates(candidates, sample.n)
    retained = np.asarray(retained, dtype=bool)
    if retained.shape != (len(candidates),):
        raise DimensionError(
            f'{retained.shape} flags for {len(candidates)} candidates'
        )
    if not retained.any():
        raise ParameterError('no candidate was retained')
    kept = candidates[retained]
    d_sample = float(_boundary_distance(domain, sample.points).min())
    return kept, d_sample, _boundary_distance(domain, kept)


def hull_distance_check(
    sample: CompactSample,
    candidates,
    retained: np.ndarray,
    domain: DomainSpec,
    h: float,
    parameters: dict | None = None,
) -> Certificate:
    """d(hull) >= d(K) - 2h, distances to the domain's complement"""
    kept, d_sample, d_hull = _hull_distances(
        sample, candidates, retained, domain,
    )
    worst = int(np.argmin(d_hull))
    return Certificate.compare(
        'hull_distance',
        lhs=d_sample,
        rhs=d_hull[worst],
        tolerance=2 * h,
        witness={'point': kept[worst]},
        parameters={
            'label': sample.label,
            'retained': len(kept),
            'h': h,
            **(parameters or {}),
        },
    )


def hull_distance_upper_check(
    sample: CompactSample,
    candidates,
    retained: np.ndarray,
    domain: DomainSpec,
    h: float,
    parameters: dict | None = None,
) -> Certificate:
    """d(hull) <= d(K) + 2h.

    The hull contains K, so a retained set that dropped the nodes next to
    K sits further from the boundary than K does and fails here.
    """
    kept, d_sample, d_hull = _hull_distances(
        sample, candidates, retained, domain,
    )
    nearest = int(np.argmin(d_hull))
    return Certificate.compare(
        'hull_distance_upper',
        lhs=d_hull[nearest],
        rhs=d_sample,
        tolerance=2 * h,
        witness={'point': kept[nearest]},
        parameters={
            'label': sample.label,
            'retained': len(kept),
            'h': h,
            **(parameters or {}),
        },
    )


def retained_sweep(
    name: str, candidates, retained: np.ndarray,
) -> Sweep:
    """Candidate coordinates with their membership flag, for plotting"""
    candidates = np.asarray(candidates, dtype=complex)
    if candidates.ndim == 1:
        candidates = candidates[:, None]
    n = candidates.shape[1]
    header = [f'{part}{j}' for j in range(1, n + 1) for part in ('x', 'y')]
    coords = real_point(candidates.T).T
    rows = [
        [*row.tolist(), int(flag)] for row, flag in zip(coords, retained)
    ]
    return Sweep(name, header + ['retained'], rows)
