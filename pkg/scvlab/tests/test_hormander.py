"""Weighted L^2 existence and extension tests"""
import math

import numpy as np
import pytest

from scvlab.errors import (
    DimensionError,
    DomainError,
    ParameterError,
    PreconditionError,
    SingularMatrixError,
)
from scvlab.expr import parse
from scvlab.grid import build_grid, FormField, sample
from scvlab.hormander import (
    extension_constant,
    holomorphic_projection,
    hormander_solve,
    ot_extend_check,
    ot_sensitivity_sweep,
)
from scvlab.types import DomainSpec


@pytest.fixture(name='disc_grid', scope='module')
def fixture_disc_grid():
    """Unit disc, 41 nodes per axis"""
    return build_grid(DomainSpec.disc(0, 1), 41)


@pytest.fixture(name='ot_grid', scope='module')
def fixture_ot_grid():
    """disc(0, 0.9) x disc(0, 0.5)"""
    return build_grid(DomainSpec.polydisc([0, 0], [0.9, 0.5]), 17)


def _constant_form(grid, value=1.0):
    return FormField.from_components(
        grid, [sample(lambda z: value + 0 * z, grid)],
    )


def test_projection_keeps_polynomials(disc_grid):
    """Holomorphic polynomials are fitted exactly"""
    points = disc_grid.node_points()
    values = points[:, 0] ** 2 - 0.5j * points[:, 0]
    fitted = holomorphic_projection(
        values, points, disc_grid.weights[disc_grid.mask], 4,
        np.array([0]), np.array([1.0]),
    )
    assert np.allclose(fitted, values, atol=1e-10)


def test_solve_unit_weight(disc_grid):
    """phi = |z|^2, f = dzbar: u = conj(z) after projection"""
    u, cert = hormander_solve(_constant_form(disc_grid), parse('z_abs2_1'))
    assert cert.passed
    assert cert.check == 'hormander_l2'
    assert cert.rhs == pytest.approx(math.pi * (1 - math.exp(-1)), rel=0.03)
    assert cert.lhs == pytest.approx(math.pi * (1 - 2 * math.exp(-1)), rel=0.1)
    norms = cert.parameters['lhs_by_degree']
    assert all(b <= a * (1 + 1e-9) for a, b in zip(norms, norms[1:]))
    assert u.grid is disc_grid


def test_solve_zero_form(disc_grid):
    """f = 0 gives u = 0 and 0 <= 0"""
    u, cert = hormander_solve(_constant_form(disc_grid, 0.0), parse('z_abs2_1'))
    assert cert.passed
    assert cert.lhs == pytest.approx(0, abs=1e-20)
    assert u.sup() == pytest.approx(0, abs=1e-12)


def test_solve_doubled_weight(disc_grid):
    """phi = 2|z|^2 halves the density of |f|^2_A"""
    _, cert = hormander_solve(_constant_form(disc_grid), parse('2*z_abs2_1'))
    assert cert.passed
    assert cert.rhs == pytest.approx(math.pi * (1 - math.exp(-2)) / 4, rel=0.03)


def test_solve_flat_weight(disc_grid):
    """Re z has a vanishing Levi form"""
    with pytest.raises(SingularMatrixError):
        hormander_solve(_constant_form(disc_grid), parse('x1'))


def test_solve_not_psh(disc_grid):
    """-|z|^2 is rejected"""
    with pytest.raises(PreconditionError):
        hormander_solve(_constant_form(disc_grid), parse('-z_abs2_1'))


def test_solve_bidisc():
    """dzbar_1 on the bidisc, certified on the half-size bidisc"""
    grid = build_grid(DomainSpec.polydisc([0, 0], [1, 1]), 16)
    form = FormField.from_components(
        grid, [sample(lambda z1, z2: 1 + 0 * z1 * z2, grid), None],
    )
    _, cert = hormander_solve(form, parse('z_abs2_1 + z_abs2_2'))
    assert cert.passed
    assert cert.parameters['n'] == 2
    assert cert.parameters['shrink'] == 0.5


def test_solve_three_axes():
    """Only one and two axes are supported"""
    grid = build_grid(DomainSpec.polydisc([0, 0, 0], [1, 1, 1]), 8)
    with pytest.raises(DimensionError):
        hormander_solve(
            FormField.from_components(grid, [None] * 3),
            parse('z_abs2_1 + z_abs2_2 + z_abs2_3'),
        )


def test_extension_constant():
    """8 C' C is of order 10^5"""
    constants = extension_constant()
    assert constants['constant'] == pytest.approx(
        8 * constants['C'] * constants['C_prime'])
    assert 2e5 < constants['constant'] < 3e5


def test_extension_trivial(ot_grid):
    """F = f = 1 with phi = |z|^2"""
    cert = ot_extend_check(
        ot_grid, parse('z_abs2_1 + z_abs2_2'), lambda z1: 1 + 0 * z1,
    )
    assert cert.passed
    assert cert.check == 'ot_extension'
    assert cert.parameters['epsilon'] == pytest.approx(2 * 1.0 / 16)
    assert cert.parameters['tail'] > 0
    assert cert.lhs == pytest.approx(
        cert.parameters['quadrature'] + cert.parameters['tail'])


def test_extension_zero(ot_grid):
    """f = 0, F = 0 gives 0 <= 0"""
    cert = ot_extend_check(
        ot_grid, parse('z_abs2_1 + z_abs2_2'), lambda z1: 0 * z1,
    )
    assert cert.passed
    assert cert.lhs == 0
    assert cert.rhs == 0


def test_extension_slice_mismatch(ot_grid):
    """F must restrict to f"""
    with pytest.raises(PreconditionError):
        ot_extend_check(
            ot_grid, parse('z_abs2_1'), lambda z1: 1 + 0 * z1,
            lambda z1, z2: 1.001 + 0 * z1,
        )


def test_extension_radius_too_large():
    """sup |z_n| must stay below e^(-1/2)"""
    grid = build_grid(DomainSpec.polydisc([0, 0], [0.9, 0.7]), 9)
    with pytest.raises(ParameterError):
        ot_extend_check(grid, parse('z_abs2_1'), lambda z1: 1 + 0 * z1)


def test_extension_needs_product(disc_grid):
    """A single disc has no slice"""
    with pytest.raises(DomainError):
        ot_extend_check(disc_grid, parse('z_abs2_1'), lambda z1: 1 + 0 * z1)


def test_extension_bad_exponent(ot_grid):
    """p must lie in (0, 2]"""
    with pytest.raises(ParameterError):
        ot_extend_check(ot_grid, parse('z_abs2_1'), lambda z1: 1 + 0 * z1,
                        p=3)


def test_sensitivity_sweep(ot_grid):
    """One row per scale, margins reported"""
    sweep = ot_sensitivity_sweep(
        ot_grid, parse('z_abs2_1 + z_abs2_2'), lambda z1: 1 + 0 * z1,
        scales=[0.01, 1.0],
    )
    assert sweep.header == ['scale', 'lhs', 'rhs', 'margin']
    assert [row[0] for row in sweep.rows] == [0.01, 1.0]
    assert sweep.rows[0][1] > sweep.rows[1][1]
