"""Subharmonic and plurisubharmonic functions

Sub-mean tests on circles, radial mollifiers (on the lattice and
pointwise), composition with convex increasing functions, Levi-form
tests, and the -log distance exhaustion of convex model domains.

Poles of functions like log|f| evaluate to -inf; such values are clamped
to FLOOR so that comparisons and means stay ordered.
"""

import logging
import typing

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage
from scipy.special import roots_legendre

from scvlab.cauchy import MIN_CONTOUR_NODES
from scvlab.errors import (
    DomainError,
    ExprDomainError,
    ParameterError,
    PreconditionError,
    ProfileError,
    ResolutionError,
    SampleError,
)
from scvlab.expr import as_complex_function, evaluate, ExprAst
from scvlab.grid import Grid, ScalarField
from scvlab.hermitian import eig
from scvlab.profiles import smoothstep3, smoothstep5
from scvlab.types import Certificate, DomainSpec
from scvlab.wirtinger import levi_matrices, RealFunction


logger = logging.getLogger(__name__)

FLOOR = -1e12
SUBMEAN_TOLERANCE = 1e-9
PSH_TOLERANCE = 1e-6
STRICT_THRESHOLD = 1e-6
CONVEXITY_TOLERANCE = 1e-9
COMMUTE_TOLERANCE = 1e-9
CIRCLE_NODES = 256
RING_COUNT = 32
RING_NODES = 512
COMPOSE_SAMPLES = 257
COMPOSE_SPAN = 50.0
MIN_KERNEL_STEPS = 2.0
CHUNK = 64

PointwiseFunction = typing.Callable[[np.ndarray], np.ndarray]

PROFILES = {
    'quintic': lambda t: 1 - smoothstep5(t),
    'cubic': lambda t: 1 - smoothstep3(t),
}


def pointwise(u: ExprAst | PointwiseFunction) -> PointwiseFunction:
    """u as a real function of one complex variable.

    Points where an expression is undefined come out as NaN.
    """
    if not isinstance(u, ExprAst):
        return u
    if u.dimension > 1:
        raise DomainError(
            f'{u.canonical()} is not a function of one complex variable'
        )
    fn = as_complex_function(u)

    def values(z):
        try:
            return fn(z)
        except ExprDomainError:
            flat = np.asarray(z, dtype=complex).ravel()
            out = np.full(flat.shape, np.nan)
            for k, point in enumerate(flat):
                try:
                    out[k] = fn(point)
                except ExprDomainError:
                    pass
            return out.reshape(np.shape(z))
    return values


def _clamp(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if np.any(np.isnan(values) | (values == np.inf)):
        raise SampleError('function is NaN or +inf at a sample point')
    return np.maximum(values, FLOOR)


def _circle_values(fn, z, r, m, offset):
    angles = 2 * np.pi * (np.arange(m) + offset) / m
    points = z + r * np.exp(1j * angles)
    with np.errstate(all='ignore'):
        return np.asarray(fn(points), dtype=float) * np.ones(m)


def circle_mean(
    u: ExprAst | PointwiseFunction, z: complex, r: float,
    m: int = CIRCLE_NODES,
) -> float:
    """Trapezoid mean of u over the circle |w - z| = r.

    A circle whose nodes hit a pole is rotated by half a node spacing.
    """
    if not r > 0:
        raise ParameterError(f'radius must be positive, got {r}')
    if m < MIN_CONTOUR_NODES:
        raise ParameterError(
            f'need at least {MIN_CONTOUR_NODES} circle nodes, got {m}'
        )
    fn = pointwise(u)
    values = _circle_values(fn, complex(z), r, m, 0.0)
    if not np.isfinite(values).all():
        values = _circle_values(fn, complex(z), r, m, 0.5)
    return float(np.mean(_clamp(values)))


def _probe_array(probes) -> np.ndarray:
    probes = np.atleast_1d(np.asarray(probes, dtype=complex)).ravel()
    if not probes.size:
        raise ParameterError('no probe points')
    return probes


def submean_test(
    u: ExprAst | PointwiseFunction,
    probes,
    radii: typing.Sequence[float],
    m: int = CIRCLE_NODES,
    check: str = 'submean',
) -> Certificate:
    """u(z) <= circle_mean(u, z, r) for every probe z and radius r"""
    fn = pointwise(u)
    probes = _probe_array(probes)
    if not len(radii):
        raise ParameterError('no radii')
    worst = None
    for z in probes:
        with np.errstate(all='ignore'):
            value = float(_clamp(fn(z)))
        for r in radii:
            mean = circle_mean(fn, z, r, m)
            if worst is None or mean - value < worst[1] - worst[0]:
                worst = (value, mean, z, r)
    value, mean, z, r = worst
    logger.debug('%s: worst margin %.3g at %s, r=%g', check, mean - value, z, r)
    return Certificate.compare(
        check,
        lhs=value,
        rhs=mean,
        tolerance=SUBMEAN_TOLERANCE,
        witness={'point': z, 'radius': r},
        parameters={'probes': len(probes), 'radii': list(radii), 'm': m},
    )


@dataclass(frozen=True)
class RadialKernel:
    """psi_delta(w) = c psi(|w| / delta) / delta^2, supported in |w| < delta"""
    delta: float
    profile: str = 'quintic'

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError(f'delta must be positive, got {self.delta}')
        if self.profile not in PROFILES:
            raise ProfileError(f'unknown kernel profile: {self.profile}')

    def shape(self, t) -> np.ndarray:
        """The unnormalized profile psi(t), zero for t >= 1"""
        t = np.asarray(t, dtype=float)
        return np.where(t < 1, PROFILES[self.profile](t), 0.0)

    @cached_property
    def _gauss(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = roots_legendre(RING_COUNT)
        return (x + 1) / 2, w / 2

    @cached_property
    def normalization(self) -> float:
        """c with 2 pi c times the integral of psi(t) t dt over [0, 1] = 1"""
        t, w = self._gauss
        return float(1 / (2 * np.pi * np.sum(w * self.shape(t) * t)))

    @cached_property
    def second_moment(self) -> float:
        """Integral of |w|^2 against the unit-scale kernel"""
        t, w = self._gauss
        return float(
            2 * np.pi * self.normalization * np.sum(w * self.shape(t) * t ** 3)
        )

    @property
    def shift(self) -> float:
        """(|z|^2)_delta - |z|^2"""
        return self.delta ** 2 * self.second_moment

    def __call__(self, w) -> np.ndarray:
        t = np.abs(np.asarray(w)) / self.delta
        return self.normalization * self.shape(t) / self.delta ** 2

    def rings(self) -> tuple[np.ndarray, np.ndarray]:
        """Gauss radii and ring weights (summing to 1) of the radial measure"""
        t, w = self._gauss
        weights = 2 * np.pi * self.normalization * self.shape(t) * t * w
        return self.delta * t, weights / weights.sum()


def _lattice_kernel(kernel: RadialKernel, h: float):
    radius = int(np.ceil(kernel.delta / h))
    offsets = np.arange(-radius, radius + 1)
    distance = np.hypot(offsets[:, None], offsets[None, :]) * h
    footprint = distance < kernel.delta
    weights = np.where(footprint, kernel.shape(distance / kernel.delta), 0.0)
    return weights / weights.sum(), footprint


def mollify(u: ScalarField, kernel: RadialKernel) -> ScalarField:
    """Discrete convolution with the sampled kernel, on the shrunk region.

    The result is defined at nodes whose whole kernel footprint lies in
    u's region.
    """
    grid = u.grid
    if grid.n != 1:
        raise DomainError(f'mollify needs a one-axis grid, got n={grid.n}')
    if kernel.delta < MIN_KERNEL_STEPS * grid.h:
        raise ResolutionError(
            f'delta {kernel.delta:g} spans less than {MIN_KERNEL_STEPS:g} '
            f'grid steps of {grid.h:g}'
        )
    weights, footprint = _lattice_kernel(kernel, grid.h)
    support = ndimage.binary_erosion(u.region, structure=footprint)
    if not support.any():
        raise DomainError(f'delta {kernel.delta:g} leaves no nodes inside')
    values = (
        ndimage.convolve(u.values.real, weights, mode='constant', cval=0.0)
        + 1j * ndimage.convolve(u.values.imag, weights, mode='constant', cval=0.0)
    )
    logger.debug(
        'mollify: %d x %d kernel, %d of %d nodes kept',
        *weights.shape, int(support.sum()), int(u.region.sum()),
    )
    return ScalarField(grid, values, support)


def commutation_check(
    u: ScalarField, first: RadialKernel, second: RadialKernel,
) -> Certificate:
    """(u_first)_second = (u_second)_first on the doubly shrunk region"""
    one = mollify(mollify(u, first), second)
    other = mollify(mollify(u, second), first)
    region = one.region & other.region
    difference = (one - other).restrict(region)
    scale = 1 + u.sup()
    return Certificate.compare(
        'mollify_commute',
        lhs=difference.sup(),
        rhs=0.0,
        tolerance=COMMUTE_TOLERANCE * scale,
        parameters={
            'deltas': [first.delta, second.delta],
            'nodes': int(region.sum()),
        },
    )


def mollified(
    u: ExprAst | PointwiseFunction, kernel: RadialKernel,
    m: int = RING_NODES,
) -> PointwiseFunction:
    """u_delta as a pointwise function: Gauss rings of circle means"""
    fn = pointwise(u)
    radii, weights = kernel.rings()
    angles = 2 * np.pi * (np.arange(m) + 0.5) / m
    offsets = radii[:, None] * np.exp(1j * angles)[None, :]

    def smoothed(z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, CHUNK):
            block = flat[start:start + CHUNK, None, None] + offsets[None]
            with np.errstate(all='ignore'):
                values = np.broadcast_to(
                    np.asarray(fn(block), dtype=float), block.shape,
                )
            out[start:start + CHUNK] = _clamp(values).mean(axis=-1) @ weights
        return out.reshape(z.shape)
    return smoothed


def shrunk_nodes(grid: Grid, delta: float) -> np.ndarray:
    """Nodes of a one-axis grid farther than delta from the boundary"""
    region = grid.mask & (grid.distance_field() > delta)
    if not region.any():
        raise DomainError(f'no nodes farther than {delta:g} from the boundary')
    return grid.node_points(region)[:, 0]


def mollify_monotone_check(
    u: ExprAst | PointwiseFunction,
    grid: Grid,
    delta1: float,
    delta2: float,
    profile: str = 'quintic',
) -> Certificate:
    """u_delta1 >= u_delta2 at the nodes of the delta1-shrunk grid"""
    if not delta1 > delta2 > 0:
        raise ParameterError(
            f'need delta1 > delta2 > 0, got {delta1:g}, {delta2:g}'
        )
    probes = shrunk_nodes(grid, delta1)
    wide = mollified(u, RadialKernel(delta1, profile))(probes)
    narrow = mollified(u, RadialKernel(delta2, profile))(probes)
    worst = int(np.argmin(wide - narrow))
    return Certificate.compare(
        'mollify_monotone',
        lhs=narrow[worst],
        rhs=wide[worst],
        tolerance=SUBMEAN_TOLERANCE,
        witness={'point': probes[worst]},
        parameters={
            'delta1': delta1,
            'delta2': delta2,
            'profile': profile,
            'probes': len(probes),
        },
    )


def _phi_values(phi: ExprAst, t: np.ndarray) -> np.ndarray:
    if phi.dimension > 1:
        raise DomainError(f'{phi.canonical()} is not a function of x1')
    return evaluate(phi, np.stack([t, np.zeros_like(t)]))


def convex_compose_check(
    phi: ExprAst,
    u: ExprAst | PointwiseFunction,
    probes,
    radii: typing.Sequence[float],
    m: int = CIRCLE_NODES,
) -> Certificate:
    """The sub-mean test of phi(u), phi convex increasing in x1.

    phi is spot-checked on the range u takes over the tested circles.
    """
    fn = pointwise(u)
    probes = _probe_array(probes)
    angles = 2 * np.pi * np.arange(m) / m
    with np.errstate(all='ignore'):
        seen = np.concatenate([
            np.atleast_1d(np.asarray(fn(z + r * np.exp(1j * angles)), dtype=float))
            for z in probes for r in radii
        ] + [np.asarray(fn(probes), dtype=float).ravel()])
    seen = np.maximum(seen[np.isfinite(seen) | (seen == -np.inf)], FLOOR)
    if not seen.size:
        raise SampleError('u has no finite values on the tested circles')
    hi = float(seen.max())
    lo = max(float(seen.min()), hi - COMPOSE_SPAN)
    if hi - lo < 1:
        lo, hi = lo - 0.5, hi + 0.5
    values = _phi_values(phi, np.linspace(lo, hi, COMPOSE_SAMPLES))
    scale = 1 + float(np.abs(values).max())
    slope = np.diff(values)
    if slope.min() < -CONVEXITY_TOLERANCE * scale:
        raise PreconditionError(
            f'{phi.canonical()} is not increasing', float(-slope.min()),
        )
    bend = np.diff(slope)
    if bend.min() < -CONVEXITY_TOLERANCE * scale:
        raise PreconditionError(
            f'{phi.canonical()} is not convex', float(-bend.min()),
        )

    def composed(z):
        with np.errstate(all='ignore'):
            inner = np.maximum(np.asarray(fn(z), dtype=float), FLOOR)
        return _phi_values(phi, inner)

    certificate = submean_test(composed, probes, radii, m, check='convex_compose')
    certificate.parameters['phi'] = phi.canonical()
    return certificate


def psh_test(
    weight: ExprAst | RealFunction, probes, strict: bool = False,
) -> Certificate:
    """Smallest Levi-form eigenvalue over the probes.

    probes: complex points of shape (K, n); a flat array means n = 1.
    Plain mode passes at eigenvalues >= -1e-6; strict mode needs > 1e-6.
    """
    points = np.asarray(probes, dtype=complex)
    if points.ndim == 1:
        points = points[:, None]
    eigenvalues, _ = eig(levi_matrices(weight, points))
    lowest = eigenvalues[..., -1]
    worst = int(np.argmin(lowest))
    strictly = bool(lowest.min() > STRICT_THRESHOLD)
    logger.debug(
        'psh_test on %d probes: smallest eigenvalue %.3g',
        len(points), lowest[worst],
    )
    return Certificate.compare(
        'strict_psh' if strict else 'psh',
        lhs=np.nextafter(STRICT_THRESHOLD, np.inf) if strict else 0.0,
        rhs=lowest[worst],
        tolerance=0.0 if strict else PSH_TOLERANCE,
        witness={'point': points[worst]},
        parameters={'probes': len(points), 'strictly_psh': strictly},
    )


def _check_convex(domain: DomainSpec):
    if not domain.is_convex:
        raise DomainError(
            f'-log distance is only modelled on convex domains, not '
            f'{domain.kind}'
        )


def neg_log_distance(domain: DomainSpec) -> RealFunction:
    """-log d(z, complement) on real points (2n, ...), +inf outside"""
    _check_convex(domain)

    def fn(point):
        point = np.asarray(point, dtype=float)
        distance = np.min(np.stack([
            axis.distance(point[2 * j] + 1j * point[2 * j + 1])
            for j, axis in enumerate(domain.axes)
        ]), axis=0)
        inside = distance > 0
        return np.where(inside, -np.log(np.where(inside, distance, 1.0)), np.inf)
    return fn


def exhaustion(domain: DomainSpec) -> RealFunction:
    """|z|^2 - log d(z, complement) on real points (2n, ...)"""
    distance = neg_log_distance(domain)

    def fn(point):
        point = np.asarray(point, dtype=float)
        return np.sum(point ** 2, axis=0) + distance(point)
    return fn


def _check_grid(domain: DomainSpec, grid: Grid):
    _check_convex(domain)
    if grid.domain != domain:
        raise DomainError('the grid was built for another domain')


def neg_log_dist_field(domain: DomainSpec, grid: Grid) -> ScalarField:
    """-log d(z, complement) at every node"""
    _check_grid(domain, grid)
    distance = np.broadcast_to(grid.distance_field(), grid.shape)
    safe = np.where(grid.mask, distance, 1.0)
    return ScalarField(grid, np.where(grid.mask, -np.log(safe), 0.0))


def exhaustion_field(domain: DomainSpec, grid: Grid) -> ScalarField:
    """|z|^2 - log d(z, complement) at every node"""
    norm2 = sum(np.abs(z) ** 2 for z in grid.coordinates())
    return neg_log_dist_field(domain, grid) + ScalarField(grid, norm2)


def sublevel_check(domain: DomainSpec, grid: Grid, level: float) -> Certificate:
    """Nodes with u < level keep away from the boundary.

    u < c means d > exp(|z|^2 - c) >= exp(-c); the certificate bounds the
    ratio exp(|z|^2 - c) / d by 1 over the sublevel nodes.
    """
    u = exhaustion_field(domain, grid)
    inside = grid.mask & (u.values.real < level)
    if not inside.any():
        raise ParameterError(f'the sublevel set {{u < {level:g}}} is empty')
    distance = np.broadcast_to(grid.distance_field(), grid.shape)[inside]
    norm2 = grid.node_points(inside)
    norm2 = np.sum(np.abs(norm2) ** 2, axis=1)
    ratio = np.exp(norm2 - level) / distance
    worst = int(np.argmax(ratio))
    return Certificate.compare(
        'exhaustion_sublevel',
        lhs=ratio[worst],
        rhs=1.0,
        witness={'point': grid.node_points(inside)[worst]},
        parameters={
            'level': level,
            'nodes': int(inside.sum()),
            'min_distance': float(distance.min()),
            'distance_floor': float(np.exp(-level)),
        },
    )
