"""Suite runner tests"""
import math

import pytest

from scvlab.config import validate
from scvlab.errors import DomainError
from scvlab.suites import cauchy_suite, guarded, run_suites, SUITES
from scvlab.types import SuiteResult


def test_guarded_records_errors():
    """Library errors become failing certificates"""
    result = SuiteResult()
    with guarded(result, 'broken', {'a': 1}):
        raise DomainError('no such disc')
    certificate, = result.certificates
    assert not certificate.passed
    assert certificate.error == 'DomainError: no such disc'
    assert certificate.parameters == {'a': 1}
    assert math.isnan(certificate.lhs)


def test_guarded_passes_other_errors():
    """Programming errors are not swallowed"""
    with pytest.raises(KeyError):
        with guarded(SuiteResult(), 'broken'):
            raise KeyError('x')


def test_cauchy_suite():
    """The Cauchy checks pass at the default resolution"""
    result = cauchy_suite(validate({}, 'cauchy'))
    assert [c.check for c in result.certificates] == [
        'cauchy_coefficients',
        'cauchy_inequality',
        'cauchy_mean_value',
        'cauchy_pompeiu',
    ]
    assert all(c.passed for c in result.certificates)


def test_suite_order():
    """'all' runs every suite in declaration order"""
    assert list(SUITES) == [
        'solve-dbar', 'cauchy', 'psh', 'hull', 'operator',
        'hormander', 'ot', 'lp', 'weights',
    ]


def test_run_single_suite():
    """A named command runs just that suite"""
    result = run_suites(validate({}, 'cauchy'))
    assert len(result.certificates) == 4


@pytest.mark.parametrize('command, options, checks', [
    ('hull', {'nodes': 41}, [
        'hull_distance', 'hull_distance_upper', 'psh_hull_in_poly_hull',
    ]),
    ('operator', {'instances': 5, 'max_dim': 4}, [
        'operator_graph_perp',
        'operator_range_perp',
        'operator_double_adjoint',
        'operator_solve_bound',
        'operator_basic_estimate',
    ]),
    ('hormander', {'nodes': 41}, [
        'hormander_l2', 'chen_constant_quadrature', 'chen_constant_scaling',
    ]),
    ('ot', {'nodes': 17, 'scales': [0.1, 1.0]}, [
        'ot_extension', 'r0_closed_form', 'r0_stationary', 'r0_local_minimum',
    ]),
    ('lp', {}, None),
    ('weights', {'s': 0.1, 'samples': 500}, None),
])
def test_suite_passes(command, options, checks):
    """Every certificate of a suite passes at reduced resolution"""
    config = validate({'suites': {command: options}}, command)
    result = run_suites(config)
    failed = [c.check for c in result.certificates if not c.passed]
    assert not failed
    if checks is not None:
        assert [c.check for c in result.certificates] == checks


def test_operator_suite_instances():
    """The operator checks report how many instances they cover"""
    config = validate(
        {'suites': {'operator': {'instances': 5, 'max_dim': 4}}}, 'operator',
    )
    for certificate in run_suites(config).certificates:
        assert certificate.parameters['instances'] == 5


def test_weights_suite_single_scale():
    """Nine identities, the order chain and the 1/6 bound for one s"""
    config = validate(
        {'suites': {'weights': {'s': 0.1, 'samples': 500}}}, 'weights',
    )
    result = run_suites(config)
    assert len(result.certificates) == 11
    assert result.certificates[8].check.startswith('chen_identity_9_')
    assert result.certificates[8].parameters['points'] > 0
    assert result.certificates[-1].check == 'sixth_bound'
    assert [sweep.name for sweep in result.sweeps] == ['chen_weights_s0.1']


def test_weights_suite_small_scale():
    """The identity sample reaches |z| <= s even for tiny s"""
    config = validate(
        {'suites': {'weights': {'s': 0.001, 'samples': 200}}}, 'weights',
    )
    result = run_suites(config)
    assert all(c.passed for c in result.certificates)
    assert result.certificates[8].parameters['points'] >= 50
