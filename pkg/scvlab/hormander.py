"""Weighted L^2 existence and extension certificates

hormander_solve produces a solution of dbar u = f, makes it as small as
possible in L^2(e^-phi) by removing its projection onto holomorphic
polynomials, and certifies

    integral |u|^2 e^-phi <= integral |f|^2_A e^-phi,  A = Levi form of phi.

ot_extend_check certifies the L^2 extension inequality for a given
holomorphic extension F of f from the slice z_n = 0.
"""

import logging
import math
import typing

import numpy as np

from scvlab.cauchy import solve_dbar_1d
from scvlab.errors import (
    DimensionError,
    DomainError,
    ParameterError,
    PreconditionError,
    SingularMatrixError,
)
from scvlab.expr import ExprAst
from scvlab.grid import build_grid, FormField, Grid, ScalarField
from scvlab.hermitian import eig, norm_A_sq
from scvlab.hulls import monomial_exponents
from scvlab.polydisc import solve_dbar_polydisc
from scvlab.types import Certificate, DomainSpec, Sweep
from scvlab.weights import chen_constant_C, CutoffProfile, optimize_r0, S_MAX
from scvlab.wirtinger import levi_matrices, real_function, RealFunction


logger = logging.getLogger(__name__)

DEGREES = (4, 8, 12)
SINGULAR_LEVI = 1e-10
PSH_TOLERANCE = 1e-6
MONOTONE_SLACK = 1e-9
SHRINK = 0.5
SLICE_TOLERANCE = 1e-8
EXCLUSION_STEPS = 2.0
TAIL_ANGLES = 32
WILD_SCALES = (1e-3, 1e-2, 1e-1, 1.0)

ComplexFunction = typing.Callable[..., typing.Any]


def _weight_at(
    phi: ExprAst | RealFunction, points: np.ndarray,
) -> np.ndarray:
    """phi at complex points of shape (count, n) or (..., n)"""
    points = np.asarray(points, dtype=complex)
    real = np.empty((2 * points.shape[-1],) + points.shape[:-1])
    real[0::2] = np.moveaxis(points.real, -1, 0)
    real[1::2] = np.moveaxis(points.imag, -1, 0)
    return np.asarray(real_function(phi)(real), dtype=float)


def _levi_stack(phi, points: np.ndarray):
    matrices = levi_matrices(phi, points)
    lowest = eig(matrices)[0][..., -1]
    worst = int(np.argmin(lowest))
    location = points[worst].tolist()
    if lowest[worst] < -PSH_TOLERANCE:
        raise PreconditionError(
            f'weight is not psh at {location}', -float(lowest[worst]),
        )
    if lowest[worst] <= SINGULAR_LEVI:
        raise SingularMatrixError(
            f'Levi form of the weight is singular at {location} '
            f'(min eigenvalue {lowest[worst]:.3g})',
            location,
        )
    return matrices


def _solve_region(f: FormField, shrink: float) -> np.ndarray:
    grid = f.grid
    if grid.n == 1:
        return grid.mask
    return grid.ball_region(shrink * grid.domain.radii) & grid.interior(1)


def _particular_solution(
    f: FormField, shrink: float,
) -> tuple[ScalarField, Certificate | None]:
    if f.grid.n == 1:
        return solve_dbar_1d(f.components()[0]), None
    return solve_dbar_polydisc(f, shrink)


def holomorphic_projection(
    values: np.ndarray,
    points: np.ndarray,
    weights: np.ndarray,
    degree: int,
    centers: np.ndarray,
    radii: np.ndarray,
) -> np.ndarray:
    """Weighted least-squares fit by polynomials ((z - c) / r)^alpha.

    Returns the fitted values at the points; values minus the fit is the
    part orthogonal to holomorphic polynomials of degree <= `degree`.
    """
    exponents = monomial_exponents(points.shape[1], degree)
    scaled = (points - centers) / radii
    basis = np.prod(scaled[:, None, :] ** exponents[None, :, :], axis=2)
    root = np.sqrt(weights)
    coeffs = np.linalg.lstsq(
        root[:, None] * basis, root * values, rcond=None,
    )[0]
    return basis @ coeffs


def hormander_solve(
    f: FormField,
    phi: ExprAst | RealFunction,
    degrees: typing.Sequence[int] = DEGREES,
    shrink: float = SHRINK,
) -> tuple[ScalarField, Certificate]:
    """A small solution of dbar u = f and its weighted L^2 certificate.

    On two axes the solution and the certificate live on the polydisc
    shrunk by `shrink`. The reported lhs is the norm after projecting
    out holomorphic polynomials of the largest degree; the norms for
    every degree go into the parameters and must not increase.
    """
    grid = f.grid
    if grid.n not in (1, 2):
        raise DimensionError(f'hormander_solve handles n=1 or 2, got {grid.n}')
    if f.degree != (0, 1):
        raise DimensionError(f'expected a (0, 1)-form, got {f.degree}')
    degrees = sorted(degrees)
    region = _solve_region(f, shrink)
    points = grid.node_points(region)
    matrices = _levi_stack(phi, points)

    u, solve_cert = _particular_solution(f, shrink)
    density = np.exp(-_weight_at(phi, points))
    weights = grid.weights[region] * density
    values = u.values[region]

    radii = grid.domain.radii * (shrink if grid.n > 1 else 1.0)
    norms = []
    fitted = np.zeros_like(values)
    for degree in degrees:
        fitted = holomorphic_projection(
            values, points, weights, degree, grid.domain.centers, radii,
        )
        norms.append(float(np.sum(weights * np.abs(values - fitted) ** 2)))
    monotone = all(
        later <= earlier * (1 + MONOTONE_SLACK) + 1e-14
        for earlier, later in zip(norms, norms[1:])
    )

    rhs = float(np.sum(weights * norm_A_sq(f.vector_at_nodes(region), matrices)))
    small = np.zeros(grid.shape, dtype=complex)
    small[region] = values - fitted
    u = ScalarField(grid, small, region)
    parameters = {
        'n': grid.n,
        'nodes': int(region.sum()),
        'degrees': degrees,
        'lhs_by_degree': norms,
        'h': grid.h,
    }
    if solve_cert is not None:
        parameters['solve_residual'] = solve_cert.lhs
        parameters['shrink'] = shrink
    logger.info(
        'weighted L2 solve on %d nodes: %.6g <= %.6g', region.sum(),
        norms[-1], rhs,
    )
    if not monotone:
        logger.warning('projected norms are not monotone in degree: %s', norms)
        return u, Certificate.failure(
            'hormander_l2', f'projected norms increase with degree: {norms}',
            parameters,
        )
    if solve_cert is not None and not solve_cert.passed:
        return u, Certificate.failure(
            'hormander_l2',
            f'dbar residual {solve_cert.lhs:.3g} above {solve_cert.rhs:.3g}',
            parameters,
        )
    return u, Certificate.compare('hormander_l2', norms[-1], rhs,
                                  parameters=parameters)


def _slice_domain(domain: DomainSpec) -> DomainSpec:
    if domain.kind not in ('polydisc', 'product') or domain.dimension < 2:
        raise DomainError(
            'the extension check needs a product of at least two discs'
        )
    last = domain.axes[-1]
    if last.center != 0:
        raise DomainError(
            f'the last axis must be centered at 0, got {last.center}'
        )
    if last.radius >= S_MAX:
        raise ParameterError(
            f'sup |z_n| must stay below e^(-1/2), got {last.radius}'
        )
    rest = domain.axes[:-1]
    return DomainSpec('disc' if len(rest) == 1 else domain.kind, rest)


def extension_constant(profile: CutoffProfile | None = None) -> dict:
    """C, C' and 8 C' C"""
    c = chen_constant_C(profile)
    c_prime = optimize_r0().constant
    return {'C': c, 'C_prime': c_prime, 'constant': 8 * c_prime * c}


def ot_extend_check(
    grid: Grid,
    phi: ExprAst | RealFunction,
    f: ComplexFunction,
    F: ComplexFunction | None = None,  # pylint: disable=invalid-name
    p: float = 2.0,
    profile: CutoffProfile | None = None,
) -> Certificate:
    """integral |F|^p e^-phi / (|z_n|^2 (log |z_n|^2)^2) <= 8 C' C integral |f|^p e^-phi.

    f is a function of z' = (z_1, .., z_{n-1}); F of all n coordinates,
    by default F(z', z_n) = f(z'). Nodes with |z_n| < 2h are left out of
    the quadrature and replaced by the bound

        pi / -log(eps^2) * sum over z' of w(z') sup |F|^p e^-phi,

    the exact integral of the singular density over |z_n| < eps times the
    largest value of the rest, sampled on rings.
    """
    if not 0 < p <= 2:
        raise ParameterError(f'p must lie in (0, 2], got {p}')
    slice_domain = _slice_domain(grid.domain)
    slice_grid = build_grid(slice_domain, grid.nodes_per_axis[:-1])
    if F is None:
        def F(*z):  # pylint: disable=invalid-name
            return f(*z[:-1])

    slice_points = slice_grid.node_points()
    base = [slice_points[:, j] for j in range(slice_grid.n)]
    f_values = np.broadcast_to(
        np.asarray(f(*base), dtype=complex), len(slice_points),
    )
    mismatch = np.abs(
        np.asarray(F(*base, np.zeros(len(slice_points))), dtype=complex)
        - f_values
    )
    if mismatch.size and mismatch.max() > SLICE_TOLERANCE:
        raise PreconditionError('F does not restrict to f on z_n = 0',
                                float(mismatch.max()))

    slice_phi = _weight_at(
        phi, np.concatenate([slice_points, np.zeros((len(slice_points), 1))],
                            axis=1),
    )
    slice_integral = float(np.sum(
        slice_grid.weights[slice_grid.mask]
        * np.abs(f_values) ** p * np.exp(-slice_phi)
    ))

    eps = EXCLUSION_STEPS * grid.spacing[-1]
    z_n = np.broadcast_to(grid.coordinate(grid.n), grid.shape)
    kept = grid.mask & (np.abs(z_n) >= eps)
    points = grid.node_points(kept)
    t = np.abs(points[:, -1]) ** 2
    f_big = np.asarray(F(*points.T), dtype=complex)
    density = (
        np.abs(f_big) ** p * np.exp(-_weight_at(phi, points))
        / (t * np.log(t) ** 2)
    )
    quadrature = float(np.sum(grid.weights[kept] * density))

    angles = np.exp(2j * np.pi * np.arange(TAIL_ANGLES) / TAIL_ANGLES)
    ring = np.concatenate([[0], 0.5 * eps * angles, eps * angles])
    near = np.concatenate([
        np.repeat(slice_points[:, None, :], len(ring), axis=1),
        np.broadcast_to(ring[None, :, None], (len(slice_points), len(ring), 1)),
    ], axis=2)
    near_values = (
        np.abs(np.asarray(F(*np.moveaxis(near, -1, 0)), dtype=complex)) ** p
        * np.exp(-_weight_at(phi, near))
    )
    tail = float(
        math.pi / -math.log(eps ** 2)
        * np.sum(slice_grid.weights[slice_grid.mask] * near_values.max(axis=1))
    )

    constants = extension_constant(profile)
    rhs = constants['constant'] * slice_integral
    logger.info(
        'extension check: %.6g + tail %.3g <= %.6g (8 C\' C = %.6g)',
        quadrature, tail, rhs, constants['constant'],
    )
    return Certificate.compare(
        'ot_extension',
        quadrature + tail,
        rhs,
        parameters={
            **constants,
            'p': p,
            'quadrature': quadrature,
            'tail': tail,
            'epsilon': eps,
            'slice_integral': slice_integral,
            'nodes_per_axis': list(grid.nodes_per_axis),
        },
    )


def ot_sensitivity_sweep(
    grid: Grid,
    phi: ExprAst | RealFunction,
    f: ComplexFunction,
    scales: typing.Sequence[float] = WILD_SCALES,
    p: float = 2.0,
) -> Sweep:
    """Margins for the extensions F = f(z') (1 + z_n / scale)"""
    rows = []
    for scale in scales:
        def wild(*z, scale=scale):
            return f(*z[:-1]) * (1 + z[-1] / scale)
        cert = ot_extend_check(grid, phi, f, wild, p)
        rows.append([scale, cert.lhs, cert.rhs, cert.margin])
    return Sweep('ot_sensitivity', ['scale', 'lhs', 'rhs', 'margin'], rows)
