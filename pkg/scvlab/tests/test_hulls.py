"""Hull tests"""
import numpy as np
import pytest

from scvlab.errors import DomainError, PreconditionError
from scvlab.grid import build_grid
from scvlab.hulls import (
    CompactSample,
    hull_distance_check,
    hull_distance_upper_check,
    hull_inclusion_check,
    monomial_exponents,
    poly_hull_membership,
    polynomial_family,
    psh_hull_membership,
    PshFamilyMember,
    retained_sweep,
)
from scvlab.types import DomainSpec


def _disc_nodes(radius, count):
    grid = build_grid(DomainSpec.disc(0, radius), count)
    return grid, grid.node_points()


def test_monomial_exponents():
    """Monomials of degree <= 2 in two variables"""
    exponents = monomial_exponents(2, 2)
    assert len(exponents) == 6
    assert exponents[0].tolist() == [0, 0]
    assert exponents.sum(axis=1).max() == 2


def test_family_grows_with_degree():
    """Raising the degree keeps every earlier function"""
    sample = CompactSample.circle(0, 1)
    low = polynomial_family(sample, 3, count=5, seed=7)
    high = polynomial_family(sample, 4, count=5, seed=7)
    assert high.size > low.size
    assert set(low.labels) <= set(high.labels)


def test_poly_hull_circle():
    """The hull of the unit circle is the closed unit disc"""
    _, nodes = _disc_nodes(1.5, 31)
    retained = poly_hull_membership(CompactSample.circle(0, 1), nodes, 8)
    radius = np.abs(nodes[:, 0])
    assert np.all(retained[radius <= 0.9])
    assert not np.any(retained[radius >= 1.02])


def test_poly_hull_two_points():
    """The hull of {0, 1} is {0, 1}"""
    _, nodes = _disc_nodes(1.5, 31)
    candidates = np.concatenate([nodes, [[0], [1]]])
    retained = poly_hull_membership(CompactSample([0, 1]), candidates, 4)
    kept = candidates[retained, 0]
    assert 0 in kept and 1 in kept
    assert np.all(np.minimum(np.abs(kept), np.abs(kept - 1)) <= 0.1)


def test_poly_hull_one_point():
    """A single point is its own hull"""
    candidates = np.array([[0.25 + 0.5j], [0.5], [0.25 + 0.6j]])
    retained = poly_hull_membership(CompactSample([0.25 + 0.5j]), candidates, 2)
    assert retained.tolist() == [True, False, False]


def test_sample_retained():
    """Every sample point is in its own hull"""
    sample = CompactSample.circle(0.1, 0.7, count=64)
    assert np.all(poly_hull_membership(sample, sample.points, 6))


def test_degree_monotone():
    """More degree never retains more"""
    _, nodes = _disc_nodes(1.5, 21)
    sample = CompactSample([0.5, 0.5j, -0.5])
    low = poly_hull_membership(sample, nodes, 2, count=10)
    high = poly_hull_membership(sample, nodes, 4, count=10)
    assert not np.any(high & ~low)


def test_psh_hull_circle():
    """|z|^2 and |z|^k cut the candidates down to the closed disc"""
    _, nodes = _disc_nodes(1.5, 31)
    probes = [0.5, 0.3j, -0.7 + 0.2j]
    family = [PshFamilyMember.from_expr('z_abs2_1', probes)] + [
        PshFamilyMember.from_expr(f'z_abs2_1^{k / 2}', probes)
        for k in range(1, 9)
    ]
    sample = CompactSample.circle(0, 1)
    retained = psh_hull_membership(sample, nodes, family)
    radius = np.abs(nodes[:, 0])
    assert np.all(retained[radius <= 1])
    assert not np.any(retained[radius >= 1.02])

    augmented = family + [PshFamilyMember.from_expr('x1', probes)]
    assert np.array_equal(psh_hull_membership(sample, nodes, augmented), retained)


def test_psh_hull_empty_family():
    """With no functions every candidate stays"""
    _, nodes = _disc_nodes(1.5, 11)
    assert np.all(psh_hull_membership(CompactSample([0]), nodes, []))


def test_psh_hull_rejects_non_psh():
    """Members must be psh"""
    _, nodes = _disc_nodes(1.5, 11)
    family = [PshFamilyMember.from_expr('-z_abs2_1', [0.2, 0.3j])]
    with pytest.raises(PreconditionError):
        psh_hull_membership(CompactSample([0]), nodes, family)


def test_hull_inclusion():
    """The psh hull of |f| lies inside the polynomial hull of f"""
    _, nodes = _disc_nodes(1.5, 21)
    cert = hull_inclusion_check(
        CompactSample.circle(0, 1, count=64), nodes, 4,
        probes=[0.45 + 0.15j, -0.35j], count=5,
    )
    assert cert.passed
    assert cert.parameters['psh_retained'] <= cert.parameters['poly_retained']


def test_hull_distance_circle():
    """The hull of a circle of radius 0.5 keeps distance 0.5"""
    grid, nodes = _disc_nodes(1, 41)
    sample = CompactSample.circle(0, 0.5)
    retained = poly_hull_membership(sample, nodes, 8)
    cert = hull_distance_check(
        sample, nodes, retained, DomainSpec.disc(0, 1), grid.h,
    )
    assert cert.passed
    assert cert.lhs == pytest.approx(0.5)
    assert cert.rhs == pytest.approx(0.5, abs=2 * grid.h)


def test_hull_distance_point():
    """The hull of the center keeps distance 1"""
    grid, nodes = _disc_nodes(1, 21)
    sample = CompactSample([0])
    candidates = np.concatenate([nodes, [[0]]])
    retained = poly_hull_membership(sample, candidates, 2)
    cert = hull_distance_check(
        sample, candidates, retained, DomainSpec.disc(0, 1), grid.h,
    )
    assert cert.passed
    assert cert.rhs == pytest.approx(1.0)


def test_hull_distance_torus():
    """The distinguished boundary of a small bidisc keeps distance 0.5"""
    domain = DomainSpec.polydisc([0, 0], [1, 1])
    grid = build_grid(domain, 9)
    nodes = grid.node_points()
    sample = CompactSample.torus([0, 0], [0.5, 0.5], count=16)
    retained = poly_hull_membership(sample, nodes, 4, count=5)
    cert = hull_distance_check(sample, nodes, retained, domain, grid.h)
    assert cert.passed
    assert cert.rhs == pytest.approx(0.5, abs=2 * grid.h)


def test_hull_distance_outside_sample():
    """Samples must lie in the domain"""
    sample = CompactSample([2.0])
    with pytest.raises(DomainError):
        hull_distance_check(
            sample, [[0]], np.array([True]), DomainSpec.disc(0, 1), 0.1,
        )


def test_hull_distance_upper_circle():
    """The computed hull of a circle reaches back to the circle"""
    grid, nodes = _disc_nodes(1, 41)
    sample = CompactSample.circle(0, 0.5)
    retained = poly_hull_membership(sample, nodes, 8)
    cert = hull_distance_upper_check(
        sample, nodes, retained, DomainSpec.disc(0, 1), grid.h,
    )
    assert cert.check == 'hull_distance_upper'
    assert cert.passed
    assert cert.rhs == pytest.approx(0.5)


def test_hull_distance_upper_center_only():
    """Keeping only the center is too far from the boundary"""
    grid, nodes = _disc_nodes(1, 21)
    candidates = np.concatenate([nodes, [[0]]])
    retained = np.abs(candidates[:, 0]) < 1e-12
    sample = CompactSample.circle(0, 0.5)
    domain = DomainSpec.disc(0, 1)
    upper = hull_distance_upper_check(
        sample, candidates, retained, domain, grid.h,
    )
    assert not upper.passed
    assert upper.lhs == pytest.approx(1.0)
    assert hull_distance_check(
        sample, candidates, retained, domain, grid.h,
    ).passed


def test_retained_sweep():
    """Retained sets export one row per candidate"""
    sweep = retained_sweep('hull', [[0.5j], [1]], np.array([True, False]))
    assert sweep.header == ['x1', 'y1', 'retained']
    assert sweep.rows == [[0.0, 0.5, 1], [1.0, 0.0, 0]]
