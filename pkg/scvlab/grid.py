"""Grids, sampled fields and quadrature

Every complex axis j of a domain is discretized on a square lattice that
covers its disc. The lattice of a domain in C^n is the tensor product of
the axis lattices, stored with shape (N1, N1, N2, N2, ...): array dims
2j-2 and 2j-1 hold x_j and y_j. Nodes strictly inside the domain are
unmasked; every field keeps zeros on masked-out nodes.
"""

import itertools
import logging
import math
import typing

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage

from scvlab.errors import (
    DegreeError,
    DimensionError,
    DomainError,
    ResolutionError,
    SampleError,
)
from scvlab.types import AxisDisc, DomainSpec


logger = logging.getLogger(__name__)

MIN_NODES = 8

MultiIndex = tuple[int, ...]


def _segment_area(x: float, radius: float) -> float:
    """Antiderivative of sqrt(radius^2 - x^2), clipped to the disc"""
    x = min(max(x, -radius), radius)
    return 0.5 * (
        x * math.sqrt(max(radius * radius - x * x, 0.0))
        + radius * radius * math.asin(x / radius)
    )


def rect_disc_area(
    x0: float, x1: float, y0: float, y1: float, radius: float,
) -> float:
    """Area of the rectangle [x0, x1] x [y0, y1] inside |z| < radius"""
    lo, hi = max(x0, -radius), min(x1, radius)
    if lo >= hi:
        return 0.0
    cuts = {lo, hi}
    for y in (y0, y1):
        if abs(y) < radius:
            chord = math.sqrt(radius * radius - y * y)
            cuts.update(c for c in (-chord, chord) if lo < c < hi)
    cuts = sorted(cuts)

    area = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (left + right)
        half = math.sqrt(max(radius * radius - mid * mid, 0.0))
        top_on_arc = half < y1
        bottom_on_arc = -half > y0
        top = half if top_on_arc else y1
        bottom = -half if bottom_on_arc else y0
        if top <= bottom:
            continue
        arc = _segment_area(right, radius) - _segment_area(left, radius)
        width = right - left
        area += (arc if top_on_arc else y1 * width)
        area -= (-arc if bottom_on_arc else y0 * width)
    return area


def _cell_areas(offsets: np.ndarray, h: float, radius: float) -> np.ndarray:
    """Exact area of each lattice cell inside the centered disc"""
    lo = offsets - h / 2
    hi = offsets + h / 2
    far = np.maximum(np.abs(lo), np.abs(hi))
    near = np.where(lo * hi <= 0, 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    inside = far[:, None] ** 2 + far[None, :] ** 2 <= radius ** 2
    outside = near[:, None] ** 2 + near[None, :] ** 2 >= radius ** 2

    areas = np.where(inside, h * h, 0.0)
    for i, k in zip(*np.nonzero(~inside & ~outside)):
        areas[i, k] = rect_disc_area(lo[i], hi[i], lo[k], hi[k], radius)
    return areas


def _gather_to_mask(weights: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Move the weight of masked-out cells to their nearest unmasked node"""
    _, indices = ndimage.distance_transform_edt(~mask, return_indices=True)
    stray = (weights > 0) & ~mask
    gathered = np.where(mask, weights, 0.0)
    np.add.at(
        gathered,
        (indices[0][stray], indices[1][stray]),
        weights[stray],
    )
    return gathered


def _outer(arrays: typing.Sequence[np.ndarray], ufunc) -> np.ndarray:
    out = arrays[0]
    for arr in arrays[1:]:
        out = ufunc.outer(out, arr)
    return out


def _axis_nodes(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return xs[:, None] + 1j * ys[None, :]


@dataclass(frozen=True, eq=False)
class AxisLattice:
    """The square lattice covering one axis disc"""
    axis: AxisDisc
    count: int

    @cached_property
    def spacing(self) -> float:
        """Node spacing h = 2 radius / (count - 1)"""
        return 2 * self.axis.radius / (self.count - 1)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Node offsets from the axis center, per real direction"""
        return -self.axis.radius + self.spacing * np.arange(self.count)

    @cached_property
    def xs(self) -> np.ndarray:
        """Real parts of the nodes along the lattice"""
        return self.axis.center.real + self.offsets

    @cached_property
    def ys(self) -> np.ndarray:
        """Imaginary parts of the nodes along the lattice"""
        return self.axis.center.imag + self.offsets

    @cached_property
    def nodes(self) -> np.ndarray:
        """Complex node coordinates, shape (count, count)"""
        return _axis_nodes(self.xs, self.ys)

    @cached_property
    def mask(self) -> np.ndarray:
        """Nodes strictly inside the axis set"""
        return self.axis.distance(self.nodes) > 0

    @cached_property
    def weights(self) -> np.ndarray:
        """Cell-area quadrature weights, summing to the axis area"""
        areas = _cell_areas(self.offsets, self.spacing, self.axis.radius)
        if self.axis.r_inner > 0:
            areas = areas - _cell_areas(
                self.offsets, self.spacing, self.axis.r_inner,
            )
        return _gather_to_mask(areas, self.mask)


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor lattice over a domain, with quadrature weights"""
    domain: DomainSpec
    lattices: tuple[AxisLattice, ...]

    @property
    def n(self) -> int:
        """Number of complex axes"""
        return len(self.lattices)

    @property
    def nodes_per_axis(self) -> tuple[int, ...]:
        """Lattice size per axis"""
        return tuple(lat.count for lat in self.lattices)

    @property
    def spacing(self) -> tuple[float, ...]:
        """Node spacing per axis"""
        return tuple(lat.spacing for lat in self.lattices)

    @property
    def h(self) -> float:
        """The largest spacing over all axes"""
        return max(self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of lattice arrays"""
        return tuple(c for lat in self.lattices for c in (lat.count,) * 2)

    @cached_property
    def mask(self) -> np.ndarray:
        """Unmasked (inside) nodes"""
        return _outer([lat.mask for lat in self.lattices], np.logical_and)

    @cached_property
    def weights(self) -> np.ndarray:
        """Product quadrature weights, zero off the mask"""
        return _outer([lat.weights for lat in self.lattices], np.multiply)

    @property
    def area(self) -> float:
        """Sum of the quadrature weights"""
        return float(self.weights.sum())

    @property
    def node_count(self) -> int:
        """Number of unmasked nodes"""
        return int(self.mask.sum())

    def axis_dims(self, axis: int) -> tuple[int, int]:
        """The two array dims of complex axis `axis` (1-based)"""
        if not 1 <= axis <= self.n:
            raise DimensionError(f'axis {axis} outside 1..{self.n}')
        return 2 * axis - 2, 2 * axis - 1

    def broadcast_axis(self, axis: int, arr: np.ndarray) -> np.ndarray:
        """Reshape a per-axis (N, N) array to broadcast over the lattice"""
        shape = [1] * (2 * self.n)
        dims = self.axis_dims(axis)
        shape[dims[0]] = arr.shape[0]
        shape[dims[1]] = arr.shape[1]
        return arr.reshape(shape)

    def coordinate(self, axis: int) -> np.ndarray:
        """z_axis over the lattice, broadcastable to the lattice shape"""
        return self.broadcast_axis(axis, self.lattices[axis - 1].nodes)

    def point_at(self, index: typing.Sequence[int]) -> list[complex]:
        """Complex coordinates of the node at a lattice index"""
        index = tuple(int(i) for i in index)
        return [
            complex(np.broadcast_to(z, self.shape)[index])
            for z in self.coordinates()
        ]

    def coordinates(self) -> list[np.ndarray]:
        """All complex coordinates, broadcastable to the lattice shape"""
        return [self.coordinate(j) for j in range(1, self.n + 1)]

    def axis_region(self, axis: int, region: np.ndarray) -> np.ndarray:
        """Lift a per-axis node set to the lattice, intersected with mask"""
        return self.mask & self.broadcast_axis(axis, region)

    def interior(self, margin: int = 1) -> np.ndarray:
        """Nodes whose FD stencils reach `margin` steps inside the mask"""
        if margin <= 0:
            return self.mask.copy()
        return _outer([
            ndimage.binary_erosion(lat.mask, iterations=margin)
            for lat in self.lattices
        ], np.logical_and)

    def ball_region(
        self, radii: typing.Sequence[float] | float,
    ) -> np.ndarray:
        """Nodes with |z_j - c_j| <= radii_j on every axis"""
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (self.n,))
        return _outer([
            np.abs(lat.nodes - lat.axis.center) <= r
            for lat, r in zip(self.lattices, radii)
        ], np.logical_and) & self.mask

    def distance_field(self) -> np.ndarray:
        """Distance to the complement of the domain, at every node"""
        return np.minimum.reduce(np.broadcast_arrays(*[
            self.broadcast_axis(j + 1, lat.axis.distance(lat.nodes))
            for j, lat in enumerate(self.lattices)
        ]))

    def node_points(self, region: np.ndarray | None = None) -> np.ndarray:
        """Complex coordinates of the nodes in a region, shape (count, n)"""
        region = self.mask if region is None else region
        return np.stack([
            np.broadcast_to(z, self.shape)[region]
            for z in self.coordinates()
        ], axis=-1)

    def real_points(self, region: np.ndarray | None = None) -> np.ndarray:
        """Real coordinates (x1, y1, ...) of region nodes, shape (2n, count)"""
        points = self.node_points(region)
        return np.stack([
            part for j in range(self.n)
            for part in (points[:, j].real, points[:, j].imag)
        ])

    def scatter(
        self, values: np.ndarray, region: np.ndarray | None = None,
    ) -> np.ndarray:
        """Place per-node values on the lattice, zeros elsewhere"""
        region = self.mask if region is None else region
        out = np.zeros(self.shape, dtype=np.result_type(values, float))
        out[region] = values
        return out


def build_grid(
    domain: DomainSpec, nodes_per_axis: int | typing.Sequence[int],
) -> Grid:
    """Discretize a domain on a tensor lattice"""
    if isinstance(nodes_per_axis, (int, np.integer)):
        nodes_per_axis = [int(nodes_per_axis)] * domain.dimension
    nodes_per_axis = list(nodes_per_axis)
    if len(nodes_per_axis) != domain.dimension:
        raise DomainError(
            f'axis count mismatch: {len(nodes_per_axis)} resolutions for a '
            f'{domain.dimension}-dimensional domain'
        )
    if min(nodes_per_axis) < MIN_NODES:
        raise ResolutionError(
            f'need at least {MIN_NODES} nodes per axis, got {nodes_per_axis}'
        )
    grid = Grid(
        domain=domain,
        lattices=tuple(
            AxisLattice(axis, count)
            for axis, count in zip(domain.axes, nodes_per_axis)
        ),
    )
    logger.debug(
        'built %s grid %s: %d nodes, h=%.4g',
        domain.kind, nodes_per_axis, grid.node_count, grid.h,
    )
    return grid


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples over a grid.

    Values live on the full lattice and are zero outside `region`, which
    is the grid mask unless a smaller support is given.
    """
    grid: Grid
    values: np.ndarray
    support: np.ndarray | None = None

    def __post_init__(self):
        values = np.broadcast_to(
            np.asarray(self.values, dtype=complex), self.grid.shape,
        )
        object.__setattr__(self, 'values', np.where(self.region, values, 0))

    @property
    def region(self) -> np.ndarray:
        """Nodes where the field is defined"""
        if self.support is None:
            return self.grid.mask
        return self.support & self.grid.mask

    def at_nodes(self) -> np.ndarray:
        """Values on the defined nodes, in lattice order"""
        return self.values[self.region]

    def restrict(self, region: np.ndarray) -> 'ScalarField':
        """The same field, defined only on `region`"""
        return ScalarField(self.grid, self.values, self.region & region)

    def sup(self, region: np.ndarray | None = None) -> float:
        """Max modulus over the defined nodes, optionally within a region"""
        where = self.region if region is None else self.region & region
        if not where.any():
            return 0.0
        return float(np.abs(self.values[where]).max())

    def conj(self) -> 'ScalarField':
        """Complex conjugate"""
        return ScalarField(self.grid, np.conj(self.values), self.support)

    def abs(self) -> 'ScalarField':
        """Node-wise modulus"""
        return ScalarField(self.grid, np.abs(self.values), self.support)

    def _combine(self, other, op) -> 'ScalarField':
        if isinstance(other, ScalarField):
            if other.grid is not self.grid:
                raise DomainError('fields live on different grids')
            support = None
            if self.support is not None or other.support is not None:
                support = self.region & other.region
            return ScalarField(self.grid, op(self.values, other.values), support)
        return ScalarField(self.grid, op(self.values, other), self.support)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __radd__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    def __rmul__(self, other):
        return self._combine(other, np.multiply)

    def __neg__(self):
        return ScalarField(self.grid, -self.values, self.support)


def zero_field(grid: Grid) -> ScalarField:
    """The zero field"""
    return ScalarField(grid, np.zeros(grid.shape, dtype=complex))


def sample(
    fn: typing.Callable[..., typing.Any], grid: Grid,
) -> ScalarField:
    """Sample fn(z1, ..., zn) at every node.

    fn is called once with broadcastable complex coordinate arrays.
    """
    with np.errstate(all='ignore'):
        values = np.broadcast_to(
            np.asarray(fn(*grid.coordinates()), dtype=complex), grid.shape,
        )
    bad = grid.mask & ~np.isfinite(values)
    if bad.any():
        node = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SampleError(f'non-finite sample at lattice node {node}', node)
    return ScalarField(grid, values)


def integrate(field: ScalarField) -> complex:
    """Quadrature of the field against Lebesgue measure"""
    values = field.at_nodes()
    if not np.isfinite(values).all():
        raise SampleError('cannot integrate non-finite values')
    return complex(np.sum(values * field.grid.weights[field.region]))


def boundary_distance(domain: DomainSpec, point) -> float:
    """Euclidean distance from an inside point to the domain's complement"""
    point = np.atleast_1d(np.asarray(point, dtype=complex))
    if point.shape != (domain.dimension,):
        raise DomainError(
            f'point has {point.size} coordinates, domain has '
            f'{domain.dimension} axes'
        )
    distance = min(
        float(axis.distance(z)) for axis, z in zip(domain.axes, point)
    )
    if distance <= 0:
        raise DomainError(f'point {point.tolist()} is not inside the domain')
    return distance


def increasing_multiindices(n: int, length: int) -> list[MultiIndex]:
    """All strictly increasing multi-indices of a length, entries in 1..n"""
    return list(itertools.combinations(range(1, n + 1), length))


@dataclass(frozen=True, eq=False)
class FormField:
    """A (p, q)-form: sum' f_{I,J} dz^I ^ dzbar^J with sampled coefficients.

    Missing keys are zero coefficients.
    """
    grid: Grid
    degree: tuple[int, int]
    coeffs: dict[tuple[MultiIndex, MultiIndex], ScalarField]

    def __post_init__(self):
        p, q = self.degree
        n = self.grid.n
        if not (0 <= p <= n and 0 <= q <= n):
            raise DegreeError(f'degree {self.degree} out of range for n={n}')
        for (multi_i, multi_j), coeff in self.coeffs.items():
            if len(multi_i) != p or len(multi_j) != q:
                raise DegreeError(
                    f'key {(multi_i, multi_j)} does not match degree '
                    f'{self.degree}'
                )
            for multi in (multi_i, multi_j):
                if list(multi) != sorted(set(multi)):
                    raise DegreeError(f'{multi} is not strictly increasing')
                if multi and not (multi[0] >= 1 and multi[-1] <= n):
                    raise DegreeError(f'{multi} has entries outside 1..{n}')
            if coeff.grid is not self.grid:
                raise DomainError('form coefficient on a different grid')

    @classmethod
    def scalar(cls, field: ScalarField) -> 'FormField':
        """A function as a (0, 0)-form"""
        return cls(field.grid, (0, 0), {((), ()): field})

    @classmethod
    def from_components(
        cls, grid: Grid, components: typing.Sequence[ScalarField | None],
    ) -> 'FormField':
        """The (0, 1)-form sum_j components[j-1] dzbar_j"""
        if len(components) != grid.n:
            raise DimensionError(
                f'need {grid.n} components, got {len(components)}'
            )
        return cls(grid, (0, 1), {
            ((), (j,)): c
            for j, c in enumerate(components, start=1)
            if c is not None
        })

    def coefficient(self, multi_i: MultiIndex, multi_j: MultiIndex):
        """The coefficient f_{I,J}, zero if absent"""
        try:
            return self.coeffs[(tuple(multi_i), tuple(multi_j))]
        except KeyError:
            return zero_field(self.grid)

    def components(self) -> list[ScalarField]:
        """Coefficients of dzbar_1 .. dzbar_n of a (0, 1)-form"""
        if self.degree != (0, 1):
            raise DegreeError(f'expected a (0, 1)-form, got {self.degree}')
        return [
            self.coefficient((), (j,)) for j in range(1, self.grid.n + 1)
        ]

    def vector_at_nodes(self, region: np.ndarray | None = None) -> np.ndarray:
        """(0, 1) coefficients per node, shape (count, n)"""
        region = self.grid.mask if region is None else region
        return np.stack([c.values[region] for c in self.components()], axis=-1)
