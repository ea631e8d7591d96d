"""Grid, field and quadrature tests"""
import math

import numpy as np
import pytest

from scvlab.errors import (
    DegreeError,
    DimensionError,
    DomainError,
    ResolutionError,
    SampleError,
)
from scvlab.grid import (
    boundary_distance,
    build_grid,
    FormField,
    increasing_multiindices,
    integrate,
    rect_disc_area,
    sample,
    zero_field,
)
from scvlab.types import DomainSpec


def test_rect_disc_area():
    """Exact rectangle-disc intersections"""
    assert rect_disc_area(-0.1, 0.1, -0.1, 0.1, 1) == pytest.approx(0.04)
    assert rect_disc_area(-2, 2, -2, 2, 1) == pytest.approx(math.pi)
    assert rect_disc_area(0, 2, 0, 2, 1) == pytest.approx(math.pi / 4)
    assert rect_disc_area(1.5, 2, 0, 1, 1) == 0


def test_disc_weights_sum_to_area():
    """Boundary cells are cut exactly"""
    for count in (9, 16, 33):
        grid = build_grid(DomainSpec.disc(0.5j, 1), count)
        assert grid.area == pytest.approx(math.pi, rel=1e-12)


def test_annulus_area():
    """The hole is cut out of the weights"""
    grid = build_grid(DomainSpec.annulus(0, 0.5, 1), 21)
    assert grid.area == pytest.approx(0.75 * math.pi, rel=1e-12)


def test_polydisc_area():
    """Product weights give the product area"""
    grid = build_grid(DomainSpec.polydisc([0, 1], [1, 0.5]), [9, 11])
    assert grid.shape == (9, 9, 11, 11)
    assert grid.area == pytest.approx(math.pi ** 2 * 0.25, rel=1e-12)


def test_mask_is_strict():
    """Nodes on the circle are masked out"""
    grid = build_grid(DomainSpec.disc(0, 1), 9)
    assert grid.h == pytest.approx(0.25)
    assert grid.mask[4, 4]
    assert not grid.mask[8, 4]
    assert not grid.weights[~grid.mask].any()


def test_build_grid_errors():
    """Too few nodes, or resolutions that do not match the axes"""
    with pytest.raises(ResolutionError):
        build_grid(DomainSpec.disc(0, 1), 7)
    with pytest.raises(DomainError):
        build_grid(DomainSpec.disc(0, 1), [9, 9])


def test_axis_dims():
    """Axes are numbered from 1"""
    grid = build_grid(DomainSpec.polydisc([0, 0], [1, 1]), 8)
    assert grid.axis_dims(2) == (2, 3)
    with pytest.raises(DimensionError):
        grid.axis_dims(3)


def test_node_listing():
    """Node and real point listings agree"""
    grid = build_grid(DomainSpec.polydisc([0, 0], [1, 1]), 8)
    points = grid.node_points()
    assert points.shape == (grid.node_count, 2)
    real = grid.real_points()
    assert real.shape == (4, grid.node_count)
    assert np.allclose(real[2] + 1j * real[3], points[:, 1])


def test_regions():
    """interior and ball_region sit inside the mask"""
    grid = build_grid(DomainSpec.disc(0, 1), 21)
    inner = grid.interior(2)
    assert not np.any(inner & ~grid.mask)
    assert inner.sum() < grid.interior(1).sum() < grid.node_count
    ball = grid.ball_region(0.5)
    assert np.all(np.abs(grid.node_points(ball)) <= 0.5)


def test_sample_zero_off_mask():
    """Samples keep zeros outside the domain"""
    grid = build_grid(DomainSpec.disc(0, 1), 9)
    field = sample(lambda z: 1 + z, grid)
    assert field.values[0, 0] == 0
    assert field.values[4, 4] == 1


def test_sample_non_finite():
    """Poles inside the domain are reported with their node"""
    grid = build_grid(DomainSpec.disc(0, 1), 9)
    with pytest.raises(SampleError) as excinfo:
        sample(lambda z: 1 / z, grid)
    assert excinfo.value.node == (4, 4)


def test_integrate():
    """The integral of |z|^2 over the unit disc is pi / 2"""
    grid = build_grid(DomainSpec.disc(0, 1), 81)
    assert integrate(sample(lambda z: np.abs(z) ** 2, grid)).real == \
        pytest.approx(math.pi / 2, rel=0.02)
    assert integrate(zero_field(grid)) == 0


def test_field_arithmetic():
    """Fields on one grid combine, fields on two grids do not"""
    grid = build_grid(DomainSpec.disc(0, 1), 9)
    one = sample(lambda z: 1 + 0 * z, grid)
    assert (one + one).sup() == 2
    assert (2 - one).sup() == 1
    with pytest.raises(DomainError):
        _ = one + sample(lambda z: z, build_grid(DomainSpec.disc(0, 1), 9))


def test_boundary_distance():
    """Distance to the complement of a polydisc"""
    domain = DomainSpec.polydisc([0, 0], [1, 0.5])
    assert boundary_distance(domain, [0.5, 0]) == pytest.approx(0.5)
    assert boundary_distance(domain, [0, 0.3]) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        boundary_distance(domain, [0, 0.6])


def test_multiindices():
    """Strictly increasing multi-indices"""
    assert increasing_multiindices(3, 2) == [(1, 2), (1, 3), (2, 3)]


def test_form_components():
    """(0, 1)-forms from components, missing ones are zero"""
    grid = build_grid(DomainSpec.polydisc([0, 0], [1, 1]), 8)
    form = FormField.from_components(grid, [sample(lambda z1, z2: z1, grid), None])
    first, second = form.components()
    assert second.sup() == 0
    assert form.vector_at_nodes().shape == (grid.node_count, 2)
    assert np.allclose(form.vector_at_nodes()[:, 0], grid.node_points()[:, 0])
    with pytest.raises(DimensionError):
        FormField.from_components(grid, [first])


def test_form_degree_checks():
    """Degrees and keys are validated"""
    grid = build_grid(DomainSpec.polydisc([0, 0], [1, 1]), 8)
    field = zero_field(grid)
    with pytest.raises(DegreeError):
        FormField(grid, (3, 0), {})
    with pytest.raises(DegreeError):
        FormField(grid, (0, 2), {((), (2, 1)): field})
    with pytest.raises(DegreeError):
        FormField.scalar(field).components()
