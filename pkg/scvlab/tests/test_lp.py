"""L^p iteration, breakdown and openness tests"""
import math

import numpy as np
import pytest

from scvlab.errors import ParameterError
from scvlab.lp import (
    breakdown_exponents,
    dyadic_increments,
    lp_breakdown_exponents,
    lp_closed_form,
    lp_iteration,
    lp_iteration_check,
    lp_sweep,
    openness_sweep,
    openness_threshold_demo,
    truncated_integral,
)


def test_iteration_fixed_point():
    """A0 = C0 stays put"""
    assert np.all(lp_iteration(1.0, 1.0, 1.0, 10) == 1.0)


def test_iteration_values():
    """A0 = 10, C0 = 1, p = 1: A_n = 10^(2^-n)"""
    values = lp_iteration(10.0, 1.0, 1.0, 25)
    assert values[1] == pytest.approx(math.sqrt(10))
    assert values[2] == pytest.approx(1.7783, abs=1e-4)
    assert abs(values[25] - 1) <= 1e-6


def test_iteration_increasing():
    """Starting below C0 the sequence rises to C0"""
    values = lp_iteration(0.1, 1.0, 1.0, 30)
    assert np.all(np.diff(values) >= 0)
    assert values[-1] == pytest.approx(1.0, abs=1e-6)


def test_iteration_p_two():
    """p = 2 jumps to C0 in one step"""
    assert lp_iteration(5.0, 2.0, 2.0, 3).tolist() == pytest.approx(
        [5.0, 2.0, 2.0, 2.0])


def test_iteration_bad_parameters():
    """p outside (0, 2] and non-positive constants"""
    with pytest.raises(ParameterError):
        lp_iteration(1.0, 1.0, 2.5, 3)
    with pytest.raises(ParameterError):
        lp_iteration(1.0, 1.0, 0.0, 3)
    with pytest.raises(ParameterError):
        lp_iteration(-1.0, 1.0, 1.0, 3)


def test_closed_form_matches():
    """Recursion and closed form agree to 1e-12"""
    for a0, p in ((10.0, 1.0), (0.1, 0.5), (3.0, 1.9)):
        values = lp_iteration(a0, 2.0, p, 20)
        closed = lp_closed_form(a0, 2.0, p, 20)
        assert np.allclose(values, closed, rtol=1e-12, atol=0)


def test_iteration_check():
    """Closed form and limit certificates"""
    certs = lp_iteration_check(10.0, 1.0, 1.0)
    assert [cert.check for cert in certs] == ['lp_closed_form', 'lp_limit']
    assert all(cert.passed for cert in certs)
    assert certs[1].parameters['monotone']


def test_iteration_check_slow():
    """Small p converges too slowly for 25 steps"""
    certs = lp_iteration_check(10.0, 1.0, 0.1)
    assert certs[0].passed
    assert not certs[1].passed


def test_lp_sweep():
    """One row per step"""
    sweep = lp_sweep(10.0, 1.0, 1.0, 5)
    assert sweep.header == ['n', 'A_n', 'closed_form']
    assert len(sweep.rows) == 6
    assert sweep.rows[0] == [0, 10.0, 10.0]


def test_exponents():
    """2/p and (nq + 2) / ((n + 1) q)"""
    assert breakdown_exponents(1, 2, 2) == pytest.approx((1.0, 1.0))
    assert breakdown_exponents(1, 3, 3) == pytest.approx((2 / 3, 5 / 6))
    with pytest.raises(ParameterError):
        breakdown_exponents(0, 2, 2)


def test_breakdown_equality():
    """n = 1, p = q = 2 holds with equality"""
    cert = lp_breakdown_exponents(1, 2, 2)
    assert cert.passed
    assert cert.margin == pytest.approx(0)
    assert cert.parameters['ratio_bounded']


def test_breakdown_fails_above_two():
    """n = 1, p = q = 3 rules out extension"""
    cert = lp_breakdown_exponents(1, 3, 3)
    assert not cert.passed
    assert cert.parameters['thin_domain_holds']
    assert not cert.parameters['ratio_bounded']


def test_breakdown_large_n():
    """With p = 2 the condition stays true as n grows"""
    cert = lp_breakdown_exponents(100, 2, 3)
    assert cert.passed
    assert cert.lhs == pytest.approx(1, abs=0.01)


def test_dyadic_increments():
    """Annulus contributions of |z|^0 are pi (4^-m - 4^-(m+1))"""
    increments = dyadic_increments(0.0, 5)
    expected = [math.pi * (4.0 ** -m - 4.0 ** -(m + 1)) for m in range(5)]
    assert increments == pytest.approx(expected, rel=1e-12)


def test_truncated_integral():
    """p = 2, k = 1, alpha = 1: 2 pi (1/2 - e^-j / 4)"""
    for j in (1, 4):
        assert truncated_integral(2.0, 1, 1.0, j) == pytest.approx(
            2 * math.pi * (0.5 - math.exp(-j) / 4), rel=1e-10)


def test_openness_finite():
    """pk - 2 alpha = 0 is integrable"""
    cert = openness_threshold_demo(2.0, 1, 1.0)
    assert cert.passed
    assert cert.parameters['analytic_finite']
    assert cert.parameters['increment_ratio'] == pytest.approx(0.25)


def test_openness_divergent():
    """pk - 2 alpha = -4 blows up at least twofold per level"""
    cert = openness_threshold_demo(2.0, 0, 2.0)
    assert cert.passed
    assert not cert.parameters['analytic_finite']
    assert cert.parameters['increment_ratio'] >= 2


def test_openness_boundary():
    """pk - 2 alpha = -2 diverges logarithmically"""
    cert = openness_threshold_demo(2.0, 0, 1.0)
    assert cert.passed
    assert cert.parameters['boundary']
    assert not cert.parameters['numeric_finite']


def test_openness_bad_alpha():
    """alpha must be positive"""
    with pytest.raises(ParameterError):
        openness_threshold_demo(2.0, 1, 0.0)


def test_openness_sweep():
    """Five cases, no mismatches"""
    cert, sweep = openness_sweep()
    assert cert.passed
    assert len(sweep.rows) == 5
    assert sweep.header[:4] == ['p', 'k', 'alpha', 'exponent']
