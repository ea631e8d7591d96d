"""One-variable Cauchy formulas

Contour and area quadratures for the Cauchy-Pompeiu formula, the Cauchy
transform as a dbar solver, and power series on polydiscs.

All area integrals here are against Lebesgue measure: the Cauchy kernel
(1/2 pi i) dz ^ dzbar / (z - zeta) becomes -(1/pi) dlambda / (z - zeta).
"""

import logging
import typing

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage, signal

from scvlab.errors import ContourError, DomainError, ParameterError
from scvlab.grid import Grid, ScalarField
from scvlab.types import Certificate
from scvlab.wirtinger import d_dz


logger = logging.getLogger(__name__)

MIN_CONTOUR_NODES = 16
NEAR_RADIUS = 1.5
CONTOUR_CLEARANCE = 3.0
CAUCHY_TOLERANCE = 1e-8
CHUNK_BYTES = 1 << 27


@dataclass(frozen=True)
class ContourGrid:
    """m uniform nodes on the circle |z - center| = radius"""
    center: complex
    radius: float
    m: int = 256

    def __post_init__(self):
        if self.m < MIN_CONTOUR_NODES:
            raise ParameterError(
                f'need at least {MIN_CONTOUR_NODES} contour nodes, got {self.m}'
            )
        if not self.radius > 0:
            raise DomainError(f'radius must be positive, got {self.radius}')

    @cached_property
    def angles(self) -> np.ndarray:
        """theta_k = 2 pi k / m"""
        return 2 * np.pi * np.arange(self.m) / self.m

    @cached_property
    def nodes(self) -> np.ndarray:
        """Contour nodes"""
        return self.center + self.radius * np.exp(1j * self.angles)

    def sample(self, fn: typing.Callable[[np.ndarray], typing.Any]) -> np.ndarray:
        """fn at the contour nodes"""
        return np.asarray(fn(self.nodes), dtype=complex) * np.ones(self.m)


def _near_correction(
    field: ScalarField, zeta: complex, excluded: np.ndarray,
) -> complex:
    """Integral of field / (z - zeta) over the excluded near cells.

    The field's constant part integrates to zero over the symmetric block,
    its linear part to d field/dz (zeta) times the excluded area.
    """
    if not excluded.any():
        return 0j
    grid = field.grid
    z = grid.coordinate(1)
    nearest = np.unravel_index(
        np.argmin(np.where(excluded, np.abs(z - zeta), np.inf)), grid.shape,
    )
    slope = d_dz(field, 1).values[nearest]
    return complex(slope * grid.weights[excluded].sum())


def _area_term(field: ScalarField, zeta: complex) -> complex:
    grid = field.grid
    if grid.n != 1:
        raise DomainError('Cauchy area integrals need a one-axis grid')
    z = np.broadcast_to(grid.coordinate(1), grid.shape)
    region = field.region
    near = np.abs(z - zeta) < NEAR_RADIUS * grid.h
    keep = region & ~near
    total = np.sum(
        grid.weights[keep] * field.values[keep] / (z[keep] - zeta)
    )
    total += _near_correction(field, zeta, region & near)
    return complex(-total / np.pi)


def cauchy_integral(
    u_boundary: np.ndarray,
    dbar_u: ScalarField | None,
    zeta: complex,
    contour: ContourGrid,
    area_grid: Grid | None = None,
) -> complex:
    """Cauchy-Pompeiu reconstruction of u(zeta).

    u(zeta) = (1/2 pi i) (contour integral of u / (z - zeta) dz
              + area integral of (du/dzbar) / (z - zeta) dz ^ dzbar)
    """
    h = area_grid.h if area_grid is not None else (
        2 * np.pi * contour.radius / contour.m
    )
    gap = contour.radius - abs(zeta - contour.center)
    if gap <= 0:
        raise ContourError(f'{zeta} is not inside the contour')
    if gap < CONTOUR_CLEARANCE * h:
        raise ContourError(
            f'{zeta} is within {CONTOUR_CLEARANCE:g}h of the contour'
        )
    u_boundary = np.asarray(u_boundary, dtype=complex)
    if u_boundary.shape != (contour.m,):
        raise ParameterError(
            f'expected {contour.m} boundary values, got {u_boundary.shape}'
        )
    tangent = contour.radius * np.exp(1j * contour.angles)
    value = np.mean(u_boundary * tangent / (contour.nodes - zeta))
    if dbar_u is not None:
        value += _area_term(dbar_u, zeta)
    return complex(value)


def cauchy_transform(phi: ScalarField, zeta: complex) -> complex:
    """u(zeta) = (1/2 pi i) integral of phi / (z - zeta) dz ^ dzbar.

    du/dzbar = phi where phi is smooth. Nodes within 1.5h of zeta are
    replaced by the near-cell correction.
    """
    return _area_term(phi, zeta)


def _kernel(count: int, h: float) -> np.ndarray:
    offsets = np.arange(-(count - 1), count)
    e = offsets[:, None] + 1j * offsets[None, :]
    with np.errstate(divide='ignore', invalid='ignore'):
        kernel = np.where(np.abs(e) < NEAR_RADIUS, 0, 1 / (np.pi * h * e))
    return kernel[:, :, None]


def lattice_transform(field: ScalarField, axis: int) -> ScalarField:
    """Cauchy transform along one axis, evaluated at every node.

    The other coordinates are held fixed. The transform is a discrete
    convolution on the axis lattice, done by FFT in chunks.
    """
    grid = field.grid
    dims = grid.axis_dims(axis)
    lattice = grid.lattices[axis - 1]
    count = lattice.count
    h = lattice.spacing

    weighted = field.values * grid.broadcast_axis(axis, lattice.weights)
    moved = np.moveaxis(weighted, dims, (0, 1))
    rest_shape = moved.shape[2:]
    flat = moved.reshape(count, count, -1)
    batch = flat.shape[2]
    kernel = _kernel(count, h)
    chunk = max(1, CHUNK_BYTES // (16 * (3 * count) ** 2))

    out = np.empty_like(flat)
    for start in range(0, batch, chunk):
        full = signal.fftconvolve(
            flat[:, :, start:start + chunk], kernel, mode='full', axes=(0, 1),
        )
        out[:, :, start:start + chunk] = full[count - 1:2 * count - 1,
                                              count - 1:2 * count - 1]
    values = np.moveaxis(out.reshape((count, count) + rest_shape), (0, 1), dims)

    excluded = ndimage.convolve(
        lattice.weights, np.ones((3, 3)), mode='constant', cval=0.0,
    )
    slope = d_dz(field, axis).values
    values = values - slope * grid.broadcast_axis(axis, excluded) / np.pi
    logger.debug(
        'lattice transform along axis %d: %d x %d lattice, %d columns',
        axis, count, count, batch,
    )
    return ScalarField(grid, values)


def solve_dbar_1d(phi: ScalarField) -> ScalarField:
    """A solution u of du/dzbar = phi on a one-axis grid"""
    if phi.grid.n != 1:
        raise DomainError(
            f'solve_dbar_1d needs a one-axis grid, got n={phi.grid.n}'
        )
    return lattice_transform(phi, 1)


def torus_samples(
    fn: typing.Callable[..., typing.Any],
    centers: typing.Sequence[complex],
    radii: typing.Sequence[float],
    m: int = 256,
) -> np.ndarray:
    """fn on the distinguished boundary, shape (m,) * n"""
    if m < MIN_CONTOUR_NODES:
        raise ParameterError(
            f'need at least {MIN_CONTOUR_NODES} contour nodes, got {m}'
        )
    angles = 2 * np.pi * np.arange(m) / m
    n = len(centers)
    coords = []
    for j, (c, r) in enumerate(zip(centers, radii)):
        shape = [1] * n
        shape[j] = m
        coords.append((complex(c) + r * np.exp(1j * angles)).reshape(shape))
    with np.errstate(all='ignore'):
        values = np.asarray(fn(*coords), dtype=complex)
    return np.broadcast_to(values, (m,) * n).copy()


def power_series(
    samples: np.ndarray, radii: typing.Sequence[float], order: int,
) -> np.ndarray:
    """Taylor coefficients a_alpha = d^alpha u(center) / alpha!.

    samples come from torus_samples; the tensor trapezoid rule on the
    torus is a DFT. Returns an array of shape (order + 1,) * n.
    """
    samples = np.asarray(samples, dtype=complex)
    m = samples.shape[0]
    if order >= m:
        raise ParameterError(f'order {order} needs more than {m} nodes')
    n = samples.ndim
    spectrum = np.fft.fftn(samples) / m ** n
    coeffs = spectrum[(slice(0, order + 1),) * n]
    for j, r in enumerate(radii):
        shape = [1] * n
        shape[j] = order + 1
        coeffs = coeffs / (float(r) ** np.arange(order + 1)).reshape(shape)
    return coeffs


def cauchy_inequality_check(
    coeffs: np.ndarray, bound: float, radii: typing.Sequence[float],
) -> Certificate:
    """|a_alpha| r^alpha <= M for every computed alpha"""
    coeffs = np.asarray(coeffs, dtype=complex)
    scaled = np.abs(coeffs)
    for j, r in enumerate(radii):
        shape = [1] * coeffs.ndim
        shape[j] = coeffs.shape[j]
        scaled = scaled * (float(r) ** np.arange(coeffs.shape[j])).reshape(shape)
    worst = np.unravel_index(np.argmax(scaled), scaled.shape)
    return Certificate.compare(
        'cauchy_inequality',
        lhs=scaled[worst],
        rhs=bound,
        tolerance=CAUCHY_TOLERANCE * bound,
        witness={'alpha': list(worst)},
        parameters={
            'radii': list(radii),
            'orders': coeffs.shape[0] - 1,
        },
    )
