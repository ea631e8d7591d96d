"""Verification suites

One function per CLI command. Each takes the RunConfig and returns a
SuiteResult; a LabError raised by a check becomes a failing certificate
named after the check, and the suite goes on with the next one.
"""

import contextlib
import logging
import math
import typing

from dataclasses import replace

import numpy as np

from scvlab import cauchy, hormander, hulls, lp, operators, polydisc, psh, weights
from scvlab.errors import DimensionError, LabError
from scvlab.expr import parse
from scvlab.grid import build_grid, FormField, sample
from scvlab.types import Certificate, DomainSpec, RunConfig, SuiteResult, Sweep
from scvlab.wirtinger import cr_residual


logger = logging.getLogger(__name__)

Suite = typing.Callable[[RunConfig], SuiteResult]

DBAR_LEVELS = (32, 64, 128)
DBAR_TOLERANCE = 1e-3
DBAR_SHRINK = 0.9
POLYDISC_LEVELS = (16, 24, 32)
COEFFICIENT_ORDER = 20
COEFFICIENT_RADIUS = 0.5
COEFFICIENT_TOLERANCE = 1e-10
CONTOUR_NODES = 256
MEAN_VALUE_TOLERANCE = 1e-12
POMPEIU_FACTOR = 10.0
SUBMEAN_PROBES = (0, 0.3, 0.3j, -0.2 + 0.2j)
SUBMEAN_RADII = (0.1, 0.2)
MONOTONE_NODES = 11
MOLLIFY_DELTAS = (0.2, 0.1)
PSH_PROBE_NODES = 9
SUBLEVEL = 1.0
HULL_NODES = 96
HULL_DEGREE = 8
HULL_RADIUS = 0.5
HULL_INCLUSION_NODES = 21
HULL_INCLUSION_DEGREE = 4
OPERATOR_INSTANCES = 100
OPERATOR_MAX_DIM = 8
DOUBLE_ADJOINT_TOLERANCE = 1e-12
BOUND_TOLERANCE = 1e-8
WEIGHT_SCALES = (0.1, 0.01, 0.001)
LP_START = (10.0, 1.0, 1.0)
BREAKDOWN_CASES = ((1, 2.0, 2.0, True), (1, 3.0, 3.0, False))

DBAR_EXAMPLES = {
    'one': (lambda z: 1 + 0 * z, np.conj),
    'zbar': (np.conj, lambda z: np.conj(z) ** 2 / 2),
    'exp': (np.exp, lambda z: np.conj(z) * np.exp(z)),
}
# dbar of zbar_1, zbar_1 zbar_2 and |z_1|^2 + |z_2|^2
POLYDISC_EXAMPLES = {
    'dzbar1': (lambda z1, z2: 1 + 0 * z1 * z2, lambda z1, z2: 0 * z1 * z2),
    'dbar_product': (lambda z1, z2: np.conj(z2) + 0 * z1,
                     lambda z1, z2: np.conj(z1) + 0 * z2),
    'dbar_norm': (lambda z1, z2: z1 + 0 * z2, lambda z1, z2: z2 + 0 * z1),
}

DEFAULT_DISC = DomainSpec.disc(0, 1)
DEFAULT_BIDISC = DomainSpec.polydisc([0, 0], [1, 1])
OT_DOMAIN = DomainSpec.polydisc([0, 0], [0.9, 0.5])


@contextlib.contextmanager
def guarded(result: SuiteResult, check: str, parameters: dict | None = None):
    """Record a LabError raised inside the block as a failing certificate"""
    try:
        yield
    except LabError as exc:
        logger.warning('%s: %s', check, exc)
        result.certificates.append(
            Certificate.failure(check, f'{type(exc).__name__}: {exc}', parameters)
        )


def _domain(config: RunConfig, dimension: int, default: DomainSpec) -> DomainSpec:
    if config.domain is not None and config.domain.dimension == dimension:
        return config.domain
    return default


def _nodes(config: RunConfig, suite: str) -> int:
    return int(config.options(suite).get('nodes', config.resolution))


def _form(grid, components) -> FormField:
    return FormField.from_components(
        grid, [sample(component, grid) for component in components],
    )


def solve_dbar_suite(config: RunConfig) -> SuiteResult:
    """The one-variable Cauchy transform solver and the bidisc solver"""
    options = config.options('solve-dbar')
    result = SuiteResult()
    disc = _domain(config, 1, DEFAULT_DISC)
    levels = options.get('resolutions', DBAR_LEVELS)
    tolerance = config.tolerance('dbar_1d', DBAR_TOLERANCE)
    rows = []
    for name, (phi, particular) in DBAR_EXAMPLES.items():
        check = f'dbar_1d_{name}'
        with guarded(result, check):
            residuals = []
            for count in levels:
                grid = build_grid(disc, count)
                u = cauchy.solve_dbar_1d(sample(phi, grid))
                region = grid.ball_region(DBAR_SHRINK * disc.radii)
                residual = cr_residual(u - sample(particular, grid), region)
                residuals.append(residual)
                rows.append([name, count, grid.h, residual])
            decreasing = all(b < a for a, b in zip(residuals, residuals[1:]))
            result.certificates.append(Certificate.compare(
                check,
                residuals[-1],
                tolerance if decreasing else -math.inf,
                parameters={
                    'levels': list(levels),
                    'residuals': residuals,
                    'decreasing': decreasing,
                    'shrink': DBAR_SHRINK,
                },
            ))
    result.sweeps.append(
        Sweep('dbar_1d_refinement', ['example', 'nodes', 'h', 'residual'], rows)
    )

    bidisc = _domain(config, 2, DEFAULT_BIDISC)
    grid = build_grid(bidisc, _nodes(config, 'solve-dbar'))
    for name, components in POLYDISC_EXAMPLES.items():
        check = f'polydisc_dbar_{name}'
        with guarded(result, check):
            _, certificate = polydisc.solve_dbar_polydisc(_form(grid, components))
            result.certificates.append(replace(certificate, check=check))
    with guarded(result, 'polydisc_refinement'):
        sweep = polydisc.refinement_study(
            bidisc,
            lambda g: _form(g, POLYDISC_EXAMPLES['dbar_norm']),
            options.get('refinement', POLYDISC_LEVELS),
        )
        residuals = [row[2] for row in sweep.rows]
        result.certificates.append(Certificate.compare(
            'polydisc_refinement', residuals[-1], residuals[0],
            parameters={'nodes': [row[0] for row in sweep.rows],
                        'residuals': residuals},
        ))
        result.sweeps.append(sweep)
    return result


def cauchy_suite(config: RunConfig) -> SuiteResult:
    """Power series, the Cauchy inequality and Cauchy-Pompeiu"""
    result = SuiteResult()
    with guarded(result, 'cauchy_coefficients'):
        samples = cauchy.torus_samples(
            lambda z: 1 / (1 - z), [0], [COEFFICIENT_RADIUS], CONTOUR_NODES,
        )
        coeffs = cauchy.power_series(
            samples, [COEFFICIENT_RADIUS], COEFFICIENT_ORDER,
        )
        errors = np.abs(coeffs - 1)
        worst = int(np.argmax(errors))
        result.certificates.append(Certificate.compare(
            'cauchy_coefficients',
            errors[worst],
            0,
            config.tolerance('cauchy_coefficients', COEFFICIENT_TOLERANCE),
            witness={'order': worst, 'coefficient': coeffs[worst]},
            parameters={'radius': COEFFICIENT_RADIUS,
                        'order': COEFFICIENT_ORDER, 'm': CONTOUR_NODES},
        ))
    with guarded(result, 'cauchy_inequality'):
        coeffs = cauchy.power_series(
            cauchy.torus_samples(np.exp, [0], [1.0], CONTOUR_NODES),
            [1.0], COEFFICIENT_ORDER,
        )
        result.certificates.append(
            cauchy.cauchy_inequality_check(coeffs, math.e, [1.0])
        )
    with guarded(result, 'cauchy_mean_value'):
        contour = cauchy.ContourGrid(0, 0.5, CONTOUR_NODES)
        boundary = contour.sample(np.exp)
        value = cauchy.cauchy_integral(boundary, None, 0, contour)
        result.certificates.append(Certificate.compare(
            'cauchy_mean_value',
            abs(value - boundary.mean()),
            0,
            MEAN_VALUE_TOLERANCE,
            parameters={'value': value},
        ))
    with guarded(result, 'cauchy_pompeiu'):
        # u = |z|^2 has du/dzbar = z
        disc = DomainSpec.disc(0, 0.5)
        grid = build_grid(disc, _nodes(config, 'cauchy'))
        contour = cauchy.ContourGrid(0, 0.5, CONTOUR_NODES)
        zeta = 0.1 + 0.05j
        value = cauchy.cauchy_integral(
            contour.sample(lambda z: np.abs(z) ** 2),
            sample(lambda z: z, grid),
            zeta,
            contour,
            grid,
        )
        result.certificates.append(Certificate.compare(
            'cauchy_pompeiu',
            abs(value - abs(zeta) ** 2),
            0,
            POMPEIU_FACTOR * grid.h,
            witness={'zeta': zeta, 'value': value},
            parameters={'h': grid.h},
        ))
    return result


def _weight_suite(config: RunConfig, result: SuiteResult, domain: DomainSpec):
    weight = parse(config.weight)
    if weight.dimension > domain.dimension:
        raise DimensionError(
            f'weight uses {weight.dimension} axes, domain has '
            f'{domain.dimension}'
        )
    if domain.dimension == 1:
        center = domain.centers[0]
        radius = domain.radii[0]
        probes = [center + radius * complex(p) for p in SUBMEAN_PROBES]
        result.certificates.append(psh.submean_test(
            weight, probes, [radius * r for r in SUBMEAN_RADII],
            check='submean_weight',
        ))
    probes = build_grid(domain, PSH_PROBE_NODES).node_points()
    result.certificates.append(psh.psh_test(weight, probes))


def psh_suite(config: RunConfig) -> SuiteResult:
    """Sub-mean value tests, mollification and the psh exhaustion"""
    result = SuiteResult()
    domain = config.domain or DEFAULT_DISC
    if config.weight is not None:
        with guarded(result, 'psh_weight'):
            _weight_suite(config, result, domain)
        return result

    examples = {
        'submean_square': lambda z: np.abs(z) ** 2,
        'submean_log': lambda z: np.log(np.abs(z - 0.2)),
        'submean_exp_modulus': lambda z: np.abs(np.exp(z)),
    }
    for check, fn in examples.items():
        with guarded(result, check):
            result.certificates.append(psh.submean_test(
                fn, SUBMEAN_PROBES, SUBMEAN_RADII, check=check,
            ))
    with guarded(result, 'submean_negative_detected'):
        result.certificates.append(psh.submean_test(
            lambda z: -np.abs(z) ** 2, SUBMEAN_PROBES, SUBMEAN_RADII,
        ).inverted('submean_negative_detected'))

    coarse = build_grid(DEFAULT_DISC, MONOTONE_NODES)
    monotone = {
        'mollify_monotone_square': lambda z: np.abs(z) ** 2,
        'mollify_monotone_log': lambda z: np.log(np.abs(z - 0.1)),
    }
    for check, fn in monotone.items():
        with guarded(result, check):
            result.certificates.append(replace(
                psh.mollify_monotone_check(fn, coarse, *MOLLIFY_DELTAS),
                check=check,
            ))
    with guarded(result, 'mollify_commute'):
        grid = build_grid(DEFAULT_DISC, _nodes(config, 'psh'))
        u = sample(lambda z: np.log(np.abs(z) ** 2 + 0.01), grid)
        result.certificates.append(replace(
            psh.commutation_check(
                u, psh.RadialKernel(0.1), psh.RadialKernel(0.15),
            ),
            check='mollify_commute',
        ))
    with guarded(result, 'convex_compose'):
        result.certificates.append(psh.convex_compose_check(
            parse('exp(x1)'), lambda z: np.log(np.abs(z - 0.3)),
            SUBMEAN_PROBES, SUBMEAN_RADII,
        ))
    with guarded(result, 'psh_levi'):
        probes = build_grid(DEFAULT_BIDISC, PSH_PROBE_NODES).node_points()
        result.certificates.append(replace(
            psh.psh_test(parse('z_abs2_1 + z_abs2_2'), probes, strict=True),
            check='psh_levi',
        ))
    if domain.is_convex:
        with guarded(result, 'sublevel'):
            grid = build_grid(domain, PSH_PROBE_NODES)
            result.certificates.append(
                psh.sublevel_check(domain, grid, SUBLEVEL)
            )
    return result


def hull_suite(config: RunConfig) -> SuiteResult:
    """Polynomial and psh hulls of a circle in the unit disc"""
    options = config.options('hull')
    result = SuiteResult()
    radius = float(options.get('radius', HULL_RADIUS))
    degree = int(options.get('degree', HULL_DEGREE))
    grid = build_grid(DEFAULT_DISC, int(options.get('nodes', HULL_NODES)))
    candidates = grid.node_points()
    compact = hulls.CompactSample.circle(0, radius)
    with guarded(result, 'hull_distance'):
        retained = hulls.poly_hull_membership(
            compact, candidates, degree, seed=config.seed,
        )
        result.certificates.append(hulls.hull_distance_check(
            compact, candidates, retained, DEFAULT_DISC, grid.h,
            parameters={'degree': degree},
        ))
        result.certificates.append(hulls.hull_distance_upper_check(
            compact, candidates, retained, DEFAULT_DISC, grid.h,
            parameters={'degree': degree},
        ))
        result.sweeps.append(
            hulls.retained_sweep('hull_retained', candidates, retained)
        )
    with guarded(result, 'hull_inclusion'):
        coarse = build_grid(DEFAULT_DISC, HULL_INCLUSION_NODES)
        result.certificates.append(hulls.hull_inclusion_check(
            compact, coarse.node_points(), HULL_INCLUSION_DEGREE,
            probes=[0.45 + 0.15j, -0.35j], count=5, seed=config.seed,
        ))
    return result


def _worst(certificates: list[Certificate], check: str, **parameters):
    certificate = min(certificates, key=lambda c: c.margin + c.tolerance)
    return replace(
        certificate,
        check=check,
        passed=all(c.passed for c in certificates),
        parameters={**certificate.parameters, **parameters},
    )


def operator_suite(config: RunConfig) -> SuiteResult:
    """Seeded random operators between weighted spaces"""
    options = config.options('operator')
    result = SuiteResult()
    count = int(options.get('instances', OPERATOR_INSTANCES))
    max_dim = int(options.get('max_dim', OPERATOR_MAX_DIM))
    seeds = range(config.seed, config.seed + count)
    checks = {
        'operator_graph_perp': [],
        'operator_range_perp': [],
        'operator_double_adjoint': [],
        'operator_solve_bound': [],
        'operator_basic_estimate': [],
    }
    for seed in seeds:
        rng = np.random.default_rng(seed)
        rows, cols = (int(d) for d in rng.integers(1, max_dim + 1, 2))
        parameters = {'seed': seed, 'rows': rows, 'cols': cols}
        with guarded(result, f'operator_instance_{seed}', parameters):
            op = operators.random_instance(rows, cols, seed)
            checks['operator_graph_perp'].append(operators.graph_perp_check(op))
            checks['operator_range_perp'].append(operators.range_perp_check(op))
            twice = operators.adjoint(operators.adjoint(op))
            checks['operator_double_adjoint'].append(Certificate.compare(
                'double_adjoint',
                np.abs(twice.matrix - op.matrix).max(),
                0,
                DOUBLE_ADJOINT_TOLERANCE,
                parameters=parameters,
            ))
            constant = operators.estimate_constant(op)
            z = op(rng.standard_normal(cols) + 1j * rng.standard_normal(cols))
            x = operators.solve_with_bound(op, z)
            checks['operator_solve_bound'].append(Certificate.compare(
                'solve_bound',
                op.source.norm(x),
                constant * op.target.norm(z),
                BOUND_TOLERANCE * constant * op.target.norm(z),
                parameters={**parameters, 'C': constant},
            ))
            t_op, s_op = operators.random_system(rows, cols, seed)
            checks['operator_basic_estimate'].append(
                operators.basic_estimate_equivalence(
                    t_op, s_op, operators.system_constant(t_op, s_op), seed,
                )
            )
    for check, certificates in checks.items():
        if certificates:
            result.certificates.append(
                _worst(certificates, check, instances=len(certificates))
            )
    return result


def _total_weight(config: RunConfig, default: str):
    weight = config.weight if config.weight is not None else default
    if config.psi is not None:
        weight = f'({weight}) + ({config.psi})'
    return parse(weight)


def _unit_slice_data(*z):
    return 1 + 0 * z[0]


def hormander_suite(config: RunConfig) -> SuiteResult:
    """The weighted L^2 solution on the disc and the constant C"""
    options = config.options('hormander')
    result = SuiteResult()
    domain = _domain(config, 1, DEFAULT_DISC)
    with guarded(result, 'hormander_l2'):
        grid = build_grid(domain, _nodes(config, 'hormander'))
        phi = _total_weight(config, 'z_abs2_1')
        form = _form(grid, [lambda z: 1 + 0 * z])
        _, certificate = hormander.hormander_solve(
            form, phi, options.get('degrees', hormander.DEGREES),
        )
        result.certificates.append(certificate)
    with guarded(result, 'chen_constant'):
        profile = weights.CutoffProfile.named(options.get('profile', 'quintic'))
        result.certificates.extend(weights.constant_checks(profile))
    return result


def ot_suite(config: RunConfig) -> SuiteResult:
    """The extension inequality on disc(0, 0.9) x disc(0, 0.5), and r0"""
    options = config.options('ot')
    result = SuiteResult()
    domain = _domain(config, 2, OT_DOMAIN)
    p = float(options.get('p', 2.0))
    with guarded(result, 'ot_extension'):
        grid = build_grid(domain, _nodes(config, 'ot'))
        phi = _total_weight(config, ' + '.join(
            f'z_abs2_{j}' for j in range(1, domain.dimension + 1)
        ))
        f = _unit_slice_data
        profile = weights.CutoffProfile.named(options.get('profile', 'quintic'))
        result.certificates.append(
            hormander.ot_extend_check(grid, phi, f, p=p, profile=profile)
        )
        result.sweeps.append(hormander.ot_sensitivity_sweep(
            grid, phi, f, options.get('scales', hormander.WILD_SCALES), p,
        ))
    with guarded(result, 'r0'):
        result.certificates.extend(weights.r0_checks())
    return result


def lp_suite(config: RunConfig) -> SuiteResult:
    """The L^p iteration, breakdown exponents and openness"""
    options = config.options('lp')
    result = SuiteResult()
    a0 = float(options.get('a0', LP_START[0]))
    c0 = float(options.get('c0', LP_START[1]))
    p = float(options.get('p', LP_START[2]))
    with guarded(result, 'lp_iteration'):
        result.certificates.extend(lp.lp_iteration_check(a0, c0, p))
        result.sweeps.append(lp.lp_sweep(a0, c0, p))
    for n, p_exp, q_exp, holds in BREAKDOWN_CASES:
        check = f'lp_breakdown_n{n}_p{p_exp:g}_q{q_exp:g}'
        with guarded(result, check):
            certificate = lp.lp_breakdown_exponents(n, p_exp, q_exp)
            if holds:
                result.certificates.append(replace(certificate, check=check))
            else:
                result.certificates.append(certificate.inverted(check))
    with guarded(result, 'openness_sweep'):
        certificate, sweep = lp.openness_sweep()
        result.certificates.append(certificate)
        result.sweeps.append(sweep)
    return result


def weights_suite(config: RunConfig) -> SuiteResult:
    """The Chen weights: nine identities, order chain, and the 1/6 bound"""
    options = config.options('weights')
    result = SuiteResult()
    scales = options.get('s', WEIGHT_SCALES)
    if not isinstance(scales, list | tuple):
        scales = [scales]
    count = int(options.get('samples', weights.SAMPLE_COUNT))
    for s in scales:
        with guarded(result, f'chen_weights_s{s:g}', {'s': s}):
            points = weights.identity_points(s, count)
            result.certificates.extend(
                weights.weight_identities_check(s, points)
            )
            result.certificates.append(weights.order_chain_check(s, points))
            result.sweeps.append(weights.weights_sweep(s))
    with guarded(result, 'sixth_bound'):
        result.certificates.append(weights.sixth_bound_check())
    return result


SUITES: dict[str, Suite] = {
    'solve-dbar': solve_dbar_suite,
    'cauchy': cauchy_suite,
    'psh': psh_suite,
    'hull': hull_suite,
    'operator': operator_suite,
    'hormander': hormander_suite,
    'ot': ot_suite,
    'lp': lp_suite,
    'weights': weights_suite,
}


def run_suites(config: RunConfig) -> SuiteResult:
    """The named suite, or every suite in declaration order for 'all'"""
    names = list(SUITES) if config.command == 'all' else [config.command]
    result = SuiteResult()
    for name in names:
        logger.info('running suite %s', name)
        with guarded(result, f'{name}_suite'):
            result.extend(SUITES[name](config))
    return result
