"""Auxiliary weights and constants of the L^2 extension estimate

rho = log(|z|^2 + s^2), eta = -rho + log(-rho) and psi = -log(eta) on
the disc where |z|^2 + s^2 < 1/e, their Wirtinger derivatives in closed
form, and the numeric constants that enter the extension inequality:
the cutoff integral C, the 1/6 lower bound and the optimal r0 with its
constant C'.

The closed forms use that all three weights are radial in t = |z|^2; the
finite differences they are checked against work in the plane.
"""

import logging
import math
import typing

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import roots_legendre
from scipy.stats import qmc

from scvlab.errors import DomainError, ParameterError, ProfileError
from scvlab.expr import as_complex_function, parse
from scvlab.profiles import (
    smoothstep3,
    smoothstep3_slope,
    smoothstep5,
    smoothstep5_slope,
)
from scvlab.types import Certificate, Sweep


logger = logging.getLogger(__name__)

THRESHOLD = math.exp(-1)
S_MAX = math.exp(-0.5)
IDENTITY_TOLERANCE = 1e-5
INEQUALITY_TOLERANCE = 1e-8
CONSTANT_TOLERANCE = 1e-6
FD_STEP = 1e-5
MAX_FD_STEP = 1e-5
SAMPLE_COUNT = 10_000
SAMPLE_SHRINK = 0.999
GAUSS_PANELS = 16
GAUSS_NODES = 16
MIDPOINT_CELLS = 1000
PROFILE_SAMPLES = 3001
PROFILE_STEP = 1e-4
SCALES = (0.5, 0.1)
SWEEP_RANGE = (1.0, 1e6)
SWEEP_COUNT = 1001
R0_BRACKET = (1e-6, 0.02, 1 / 24 - 1e-6)
R0_TOLERANCE = 1e-8
R0_OFFSET = 1e-3

IDENTITIES = {
    1: 'rho_zbar',
    2: 'rho_zzbar',
    3: 'eta_z',
    4: 'eta_zzbar',
    5: 'psi_zzbar',
    6: 'psi_zzbar_eta_bound',
    7: 'psi_zzbar_lower_bound',
    8: 'psi_z_modulus',
    9: 'psi_zzbar_rho_bound',
}


@dataclass(frozen=True)
class ChenWeights:
    """The weights rho, eta, psi for one s in (0, e^{-1/2})"""
    s: float

    def __post_init__(self):
        if not 0 < self.s < S_MAX:
            raise ParameterError(
                f's must lie in (0, e^(-1/2)), got {self.s}'
            )

    @property
    def radius(self) -> float:
        """Largest |z| with |z|^2 + s^2 < 1/e"""
        return math.sqrt(THRESHOLD - self.s ** 2)

    def admissible(self, z) -> np.ndarray:
        """|z|^2 as an array, checked against |z|^2 + s^2 < 1/e"""
        t = np.abs(np.asarray(z, dtype=complex)) ** 2
        bad = t + self.s ** 2 >= THRESHOLD
        if np.any(bad):
            worst = np.asarray(z).ravel()[np.argmax(bad.ravel())]
            raise DomainError(
                f'|z|^2 + s^2 must stay below 1/e, z={complex(worst)} '
                f's={self.s}'
            )
        return t

    def rho(self, t):
        return np.log(t + self.s ** 2)

    def eta(self, t):
        rho = self.rho(t)
        return -rho + np.log(-rho)

    def psi(self, t):
        return -np.log(self.eta(t))

    def closed_forms(self, z) -> dict[str, np.ndarray]:
        """Values and Wirtinger derivatives by the closed formulas"""
        z = np.asarray(z, dtype=complex)
        t = self.admissible(z)
        a = t + self.s ** 2
        rho = np.log(a)
        eta = -rho + np.log(-rho)
        factor = 1 + 1 / -rho
        rho_z = np.conj(z) / a
        rho_zz = self.s ** 2 / a ** 2
        eta_z = -factor * rho_z
        eta_zz = -factor * rho_zz - np.abs(rho_z) ** 2 / rho ** 2
        psi_zz = (
            factor * rho_zz / eta
            + np.abs(rho_z) ** 2 / (eta * rho ** 2)
            + np.abs(eta_z) ** 2 / eta ** 2
        )
        return {
            't': t,
            'rho': rho,
            'eta': eta,
            'psi': -np.log(eta),
            'rho_z': rho_z,
            'rho_zbar': z / a,
            'rho_zzbar': rho_zz,
            'eta_z': eta_z,
            'eta_zzbar': eta_zz,
            'psi_z': -eta_z / eta,
            'psi_zzbar': psi_zz,
            'psi_zzbar_from_eta': -eta_zz / eta + np.abs(eta_z) ** 2 / eta ** 2,
        }

    def increments(self, z: np.ndarray, dz) -> dict[str, np.ndarray]:
        """f(z + dz) - f(z) for rho, eta and psi.

        Differences are formed through log1p, so they keep their relative
        accuracy when dz is tiny. Raises DomainError when z + dz leaves
        the admissible disc.
        """
        self.admissible(z + dz)
        t = np.abs(z) ** 2
        a = t + self.s ** 2
        rho = np.log(a)
        eta = -rho + np.log(-rho)
        dt = 2 * np.real(np.conj(z) * dz) + np.abs(dz) ** 2
        d_rho = np.log1p(dt / a)
        d_eta = -d_rho + np.log1p(d_rho / rho)
        return {
            'rho': d_rho,
            'eta': d_eta,
            'psi': -np.log1p(d_eta / eta),
        }

    def finite_differences(
        self, z, h_fd: float = FD_STEP,
    ) -> dict[str, np.ndarray]:
        """The same derivatives as closed_forms, by finite differences.

        Centered x and y stencils with step h_fd sqrt(|z|^2 + s^2):
        f_z = (f_x - i f_y) / 2, f_zbar = (f_x + i f_y) / 2 and
        f_zzbar = (f_xx + f_yy) / 4.
        """
        if not 0 < h_fd <= MAX_FD_STEP:
            raise ParameterError(
                f'FD step must lie in (0, {MAX_FD_STEP:g}], got {h_fd}'
            )
        z = np.asarray(z, dtype=complex)
        t = self.admissible(z)
        delta = h_fd * np.sqrt(t + self.s ** 2)
        east, west, north, south = (
            self.increments(z, shift)
            for shift in (delta, -delta, 1j * delta, -1j * delta)
        )
        out = {}
        for name in ('rho', 'eta', 'psi'):
            f_x = (east[name] - west[name]) / (2 * delta)
            f_y = (north[name] - south[name]) / (2 * delta)
            laplacian = (
                east[name] + west[name] + north[name] + south[name]
            ) / delta ** 2
            out[f'{name}_z'] = 0.5 * (f_x - 1j * f_y)
            out[f'{name}_zbar'] = 0.5 * (f_x + 1j * f_y)
            out[f'{name}_zzbar'] = 0.25 * laplacian
        return out


def chen_weights(s: float, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rho, eta, psi) at z"""
    weights = ChenWeights(s)
    t = weights.admissible(z)
    return weights.rho(t), weights.eta(t), weights.psi(t)


def sample_points(
    s: float, count: int = SAMPLE_COUNT, radius: float | None = None,
) -> np.ndarray:
    """Halton points in the admissible disc, or in |z| <= radius"""
    if radius is None:
        radius = ChenWeights(s).radius * SAMPLE_SHRINK
    u = qmc.Halton(d=2, scramble=False).random(count)
    return radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])


def identity_points(s: float, count: int = SAMPLE_COUNT) -> np.ndarray:
    """The Halton sample plus count // 4 points in |z| <= s"""
    return np.concatenate([
        sample_points(s, count),
        sample_points(s, max(count // 4, 1), radius=s),
    ])


def _relative_gap(value, bound) -> np.ndarray:
    return (bound - value) / (1 + np.abs(value))


def _identity(
    item: int, errors: np.ndarray, points: np.ndarray, s: float,
) -> Certificate:
    worst = int(np.argmax(errors))
    return Certificate.compare(
        f'chen_identity_{item}_{IDENTITIES[item]}',
        errors[worst],
        IDENTITY_TOLERANCE,
        witness={'point': points[worst]},
        parameters={'s': s, 'points': len(points)},
    )


def _inequality(
    item: int, value, bound, points: np.ndarray, s: float,
) -> Certificate:
    gaps = _relative_gap(value, bound)
    worst = int(np.argmax(gaps))
    return Certificate.compare(
        f'chen_identity_{item}_{IDENTITIES[item]}',
        gaps[worst],
        0.0,
        INEQUALITY_TOLERANCE,
        witness={'point': points[worst]},
        parameters={'s': s, 'points': len(points)},
    )


def weight_identities_check(
    s: float,
    points=None,
    h_fd: float = FD_STEP,
) -> list[Certificate]:
    """Certify the nine derivative identities and inequalities.

    Equalities compare finite differences with the closed forms,
    |fd - closed| <= 1e-5 (1 + |closed|). Inequalities use the closed
    forms. The last item only applies where |z| <= s, so the sample must
    reach into that disc; identity_points adds one. h_fd is the relative
    FD step, at most 1e-5.
    """
    weights = ChenWeights(s)
    if points is None:
        points = identity_points(s)
    points = np.asarray(points, dtype=complex).ravel()
    closed = weights.closed_forms(points)
    fd = weights.finite_differences(points, h_fd)

    def error(key, reference):
        return np.abs(fd[key] - reference) / (1 + np.abs(reference))

    eta = closed['eta']
    certs = [
        _identity(1, error('rho_zbar', closed['rho_zbar']), points, s),
        _identity(2, error('rho_zzbar', closed['rho_zzbar']), points, s),
        _identity(3, error('eta_z', closed['eta_z']), points, s),
        _identity(4, error('eta_zzbar', closed['eta_zzbar']), points, s),
        _identity(5, np.maximum(
            error('psi_zzbar', closed['psi_zzbar']),
            error('psi_zzbar', closed['psi_zzbar_from_eta']),
        ), points, s),
        _inequality(
            6, closed['psi_zzbar'],
            (1 / eta ** 2 + 1 / (eta * (1 - closed['rho']) ** 2))
            * np.abs(closed['eta_z']) ** 2,
            points, s,
        ),
        _inequality(
            7, closed['psi_zzbar'],
            s ** 2 / (eta * (closed['t'] + s ** 2) ** 2),
            points, s,
        ),
    ]
    factor = 1 + 1 / -closed['rho']
    modulus = factor ** 2 * np.abs(closed['rho_z']) ** 2 / eta ** 2
    certs.append(_identity(8, np.maximum(
        error('psi_z', closed['psi_z']),
        np.abs(np.abs(fd['psi_z']) ** 2 - modulus) / (1 + modulus),
    ), points, s))
    inner = closed['t'] <= s ** 2
    if not inner.any():
        raise ParameterError(f'no sample point with |z| <= {s:g}')
    certs.append(_inequality(
        9, closed['psi_zzbar'][inner],
        np.abs(closed['rho_z'][inner]) ** 2 / eta[inner],
        points[inner], s,
    ))
    failed = [cert.check for cert in certs if not cert.passed]
    if failed:
        logger.warning('s=%g: failed %s', s, ', '.join(failed))
    return certs


def order_chain_check(s: float, points=None) -> Certificate:
    """1 < -rho < eta < -2 rho, eta < 4 log(1/s), -log(4 log(1/s)) < psi < 0"""
    if points is None:
        points = sample_points(s)
    points = np.asarray(points, dtype=complex).ravel()
    rho, eta, psi = chen_weights(s, points)
    cap = 4 * math.log(1 / s)
    gaps = np.stack([
        -rho - 1,
        eta + rho,
        -2 * rho - eta,
        cap - eta,
        psi + math.log(cap),
        -psi,
    ])
    smallest = gaps.min(axis=0)
    worst = int(np.argmin(smallest))
    return Certificate.compare(
        'chen_order_chain',
        0.0,
        smallest[worst],
        witness={'point': points[worst]},
        parameters={'s': s, 'points': len(points)},
    )


def weights_sweep(s: float, points=None) -> Sweep:
    """The lower bound on psi_zzbar point by point"""
    if points is None:
        points = sample_points(s, SAMPLE_COUNT // 10)
    points = np.asarray(points, dtype=complex).ravel()
    closed = ChenWeights(s).closed_forms(points)
    bound = s ** 2 / (closed['eta'] * (closed['t'] + s ** 2) ** 2)
    rows = [
        [z.real, z.imag, lower, value, value - lower]
        for z, lower, value in zip(points, bound, closed['psi_zzbar'])
    ]
    return Sweep(
        f'chen_weights_s{s:g}', ['x1', 'y1', 'lhs', 'rhs', 'margin'], rows,
    )


@dataclass(frozen=True)
class CutoffProfile:
    """A decreasing chi with chi = 1 on t <= 1/2 and chi = 0 on t >= 1"""
    name: str
    value: typing.Callable[[np.ndarray], np.ndarray]
    slope: typing.Callable[[np.ndarray], np.ndarray]

    @classmethod
    def quintic(cls) -> 'CutoffProfile':
        return cls(
            'quintic',
            lambda t: 1 - smoothstep5(2 * np.asarray(t) - 1),
            lambda t: -2 * smoothstep5_slope(2 * np.asarray(t) - 1),
        )

    @classmethod
    def cubic(cls) -> 'CutoffProfile':
        return cls(
            'cubic',
            lambda t: 1 - smoothstep3(2 * np.asarray(t) - 1),
            lambda t: -2 * smoothstep3_slope(2 * np.asarray(t) - 1),
        )

    @classmethod
    def from_expr(cls, src: str) -> 'CutoffProfile':
        """A profile written as an expression in x1 = t"""
        fn = as_complex_function(parse(src))

        def value(t):
            return fn(np.asarray(t, dtype=float))

        def slope(t):
            t = np.asarray(t, dtype=float)
            d = PROFILE_STEP
            return (
                value(t - 2 * d) - 8 * value(t - d)
                + 8 * value(t + d) - value(t + 2 * d)
            ) / (12 * d)
        return cls(src, value, slope)

    @classmethod
    def named(cls, name: str) -> 'CutoffProfile':
        """quintic, cubic, or an expression"""
        match name:
            case 'quintic':
                return cls.quintic()
            case 'cubic':
                return cls.cubic()
        return cls.from_expr(name)

    def validate(self, tol: float = 1e-9):
        t = np.linspace(0.0, 1.5, PROFILE_SAMPLES)
        values = np.asarray(self.value(t), dtype=float)
        if not np.all(np.isfinite(values)):
            raise ProfileError(f'{self.name}: non-finite values')
        if np.max(np.abs(values[t <= 0.5] - 1)) > tol:
            raise ProfileError(f'{self.name}: chi must be 1 for t <= 1/2')
        if np.max(np.abs(values[t >= 1])) > tol:
            raise ProfileError(f'{self.name}: chi must be 0 for t >= 1')
        rise = np.diff(values).max()
        if rise > tol:
            raise ProfileError(
                f'{self.name}: chi must be non-increasing, rises by {rise:.3g}'
            )


def _gauss(a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]"""
    x, w = roots_legendre(GAUSS_NODES)
    edges = np.linspace(a, b, GAUSS_PANELS + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def chen_constant_C(  # pylint: disable=invalid-name
    profile: CutoffProfile | None = None,
) -> float:
    """C = 2 integral over 1/2 < |w|^2 < 1 of |chi'(|w|^2)|^2 (|w|^2 + 1)^2.

    In polar form this is 2 pi times the integral over t in [1/2, 1].
    """
    profile = profile or CutoffProfile.quintic()
    profile.validate()
    t, w = _gauss(0.5, 1.0)
    density = np.abs(profile.slope(t)) ** 2 * (t + 1) ** 2
    return float(2 * math.pi * np.sum(w * density))


def _plane_constant(profile: CutoffProfile, cells: int) -> float:
    h = 2.0 / cells
    axis = -1 + h * (np.arange(cells) + 0.5)
    t = axis[:, None] ** 2 + axis[None, :] ** 2
    inside = (t > 0.5) & (t < 1)
    density = np.zeros_like(t)
    density[inside] = (
        np.abs(profile.slope(t[inside])) ** 2 * (t[inside] + 1) ** 2
    )
    return float(2 * density.sum() * h * h)


def scaled_constant(s: float, profile: CutoffProfile | None = None) -> float:
    """The integral over s^2/2 < |z|^2 < s^2 that rescales to C.

    2 integral |chi'(|z|^2/s^2)|^2 (|z|^2 + s^2)^2 / s^6, taken in the
    radius |z| rather than in |z|^2.
    """
    profile = profile or CutoffProfile.quintic()
    r, w = _gauss(s / math.sqrt(2), s)
    t = r * r
    density = (
        np.abs(profile.slope(t / s ** 2)) ** 2 * (t + s ** 2) ** 2 / s ** 6
    )
    return float(2 * np.sum(w * density * 2 * math.pi * r))


def constant_checks(
    profile: CutoffProfile | None = None,
    cells: int = MIDPOINT_CELLS,
    scales: typing.Sequence[float] = SCALES,
) -> list[Certificate]:
    """C by radial Gauss against a plane midpoint rule, and its rescalings"""
    profile = profile or CutoffProfile.quintic()
    value = chen_constant_C(profile)
    plane = _plane_constant(profile, cells)
    logger.info('C = %.12g (%s profile), midpoint %.12g', value,
                profile.name, plane)
    certs = [Certificate.compare(
        'chen_constant_quadrature',
        abs(value - plane) / value,
        CONSTANT_TOLERANCE,
        parameters={'profile': profile.name, 'C': value, 'midpoint': plane,
                    'cells': cells},
    )]
    scaled = {s: scaled_constant(s, profile) for s in scales}
    worst = max(scaled, key=lambda s: abs(scaled[s] - value))
    certs.append(Certificate.compare(
        'chen_constant_scaling',
        abs(scaled[worst] - value) / value,
        CONSTANT_TOLERANCE,
        witness={'s': worst},
        parameters={'profile': profile.name, 'C': value,
                    'scaled': {f'{s:g}': v for s, v in scaled.items()}},
    ))
    return certs


def sixth_ratio(x):
    """x^2 / (x^2 + 4x + 1), at least 1/6 for x >= 1"""
    x = np.asarray(x, dtype=float)
    return x * x / (x * x + 4 * x + 1)


def sixth_bound_check(xs=None) -> Certificate:
    """min over x >= 1 of x^2 / (x^2 + 4x + 1) against 1/6"""
    if xs is None:
        xs = np.logspace(
            math.log10(SWEEP_RANGE[0]), math.log10(SWEEP_RANGE[1]),
            SWEEP_COUNT,
        )
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 1):
        raise ParameterError('the 1/6 bound needs x = -rho >= 1')
    ratios = sixth_ratio(xs)
    worst = int(np.argmin(ratios))
    return Certificate.compare(
        'sixth_bound',
        1 / 6,
        ratios[worst],
        1e-12,
        witness={'x': xs[worst]},
        parameters={'samples': len(xs), 'x_max': xs.max()},
    )


def r0_objective(r):
    """g(r) = (1 + 1/r) / (1/6 - 4r) on 0 < r < 1/24"""
    return (1 + 1 / r) / (1 / 6 - 4 * r)


def r0_objective_slope(r):
    return (4 * r * r + 8 * r - 1 / 6) / (r * r * (1 / 6 - 4 * r) ** 2)


def r0_closed_form() -> float:
    """Positive root of 4r^2 + 8r - 1/6"""
    return (-8 + math.sqrt(64 + 8 / 3)) / 8


@dataclass
class R0Result:
    r0: float
    constant: float
    golden: float


def optimize_r0() -> R0Result:
    """Minimize g by golden section, then polish on g' = 0"""
    found = optimize.minimize_scalar(
        r0_objective, bracket=R0_BRACKET, method='golden', tol=1e-12,
    )
    golden = float(found.x)
    low = max(R0_BRACKET[0], golden / 2)
    high = min(R0_BRACKET[2], golden * 2)
    r0 = optimize.brentq(r0_objective_slope, low, high, xtol=1e-15)
    logger.debug('r0: golden %.12g, polished %.15g', golden, r0)
    return R0Result(r0, float(r0_objective(r0)), golden)


def r0_checks(result: R0Result | None = None) -> list[Certificate]:
    """The optimal r0 against the closed form, stationarity, minimality"""
    result = result or optimize_r0()
    r0, g0 = result.r0, result.constant
    closed = r0_closed_form()
    parameters = {'r0': r0, 'C_prime': g0, 'golden': result.golden}
    neighbours = r0_objective(np.array([r0 - R0_OFFSET, r0 + R0_OFFSET]))
    return [
        Certificate.compare(
            'r0_closed_form', abs(r0 - closed), R0_TOLERANCE,
            parameters={**parameters, 'closed_form': closed},
        ),
        Certificate.compare(
            'r0_stationary', abs(r0_objective_slope(r0)), 1e-6 * g0 / r0,
            parameters=parameters,
        ),
        Certificate.compare(
            'r0_local_minimum', g0, neighbours.min(),
            witness={'offset': R0_OFFSET}, parameters=parameters,
        ),
    ]
