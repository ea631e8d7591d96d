"""L^p machinery around the extension estimate

The iteration A_n = A_{n-1} (C0 / A_{n-1})^(p/2) that carries the L^2
constant over to 0 < p <= 2, the exponent conditions that rule out
extension from L^q to L^p outside 0 < p = q <= 2, and a demonstration of
the integrability threshold behind strong openness on the model weights
phi = 2 alpha log|z|, phi_j = max(phi, -j).
"""

import logging
import math
import typing

import numpy as np
from scipy.special import roots_legendre

from scvlab.errors import ParameterError
from scvlab.types import Certificate, Sweep


logger = logging.getLogger(__name__)

CLOSED_FORM_TOLERANCE = 1e-12
CONVERGENCE_TOLERANCE = 1e-6
EXPONENT_TOLERANCE = 1e-12
GAUSS_NODES = 16
DYADIC_LEVELS = 40
RATIO_SLACK = 1e-6
TRUNCATION_PANELS = 60

DEFAULT_DELTAS = (1e-2, 1e-4, 1e-6, 1e-8)
OPENNESS_CASES = (
    (2.0, 1, 1.0),
    (2.0, 0, 2.0),
    (2.0, 0, 1.0),
    (1.0, 2, 0.5),
    (3.0, 1, 3.0),
)


def _check_iteration(a0: float, c0: float, p: float):
    if not 0 < p <= 2:
        raise ParameterError(f'p must lie in (0, 2], got {p}')
    if a0 <= 0 or c0 <= 0:
        raise ParameterError(f'A0 and C0 must be positive, got {a0}, {c0}')


def lp_iteration(a0: float, c0: float, p: float, steps: int) -> np.ndarray:
    """A_0, ..., A_steps"""
    _check_iteration(a0, c0, p)
    values = [float(a0)]
    for _ in range(steps):
        previous = values[-1]
        values.append(previous * (c0 / previous) ** (p / 2))
    return np.array(values)


def lp_closed_form(a0: float, c0: float, p: float, steps: int) -> np.ndarray:
    """C0 (A0 / C0)^((1 - p/2)^n) for n = 0, ..., steps"""
    _check_iteration(a0, c0, p)
    powers = (1 - p / 2) ** np.arange(steps + 1)
    return c0 * (a0 / c0) ** powers


def lp_iteration_check(
    a0: float, c0: float, p: float, steps: int = 25,
) -> list[Certificate]:
    """The recursion against its closed form, and its limit C0"""
    values = lp_iteration(a0, c0, p, steps)
    closed = lp_closed_form(a0, c0, p, steps)
    errors = np.abs(values - closed) / closed
    worst = int(np.argmax(errors))
    steps_taken = np.diff(values)
    if a0 > c0:
        monotone = bool(np.all(steps_taken <= 0))
    elif a0 < c0:
        monotone = bool(np.all(steps_taken >= 0))
    else:
        monotone = bool(np.all(values == a0))
    parameters = {'A0': a0, 'C0': c0, 'p': p, 'steps': steps,
                  'monotone': monotone}
    return [
        Certificate.compare(
            'lp_closed_form', errors[worst], CLOSED_FORM_TOLERANCE,
            witness={'n': worst}, parameters=parameters,
        ),
        Certificate.compare(
            'lp_limit', abs(values[-1] - c0),
            CONVERGENCE_TOLERANCE * c0 if monotone else -math.inf,
            witness={'A_last': values[-1]}, parameters=parameters,
        ),
    ]


def lp_sweep(a0: float, c0: float, p: float, steps: int = 25) -> Sweep:
    """The sequence and its closed form"""
    values = lp_iteration(a0, c0, p, steps)
    closed = lp_closed_form(a0, c0, p, steps)
    rows = [[n, a, b] for n, (a, b) in enumerate(zip(values, closed))]
    return Sweep(f'lp_iteration_p{p:g}', ['n', 'A_n', 'closed_form'], rows)


def breakdown_exponents(n: int, p: float, q: float) -> tuple[float, float]:
    """(2/p, (nq + 2) / ((n + 1) q))"""
    if n < 1:
        raise ParameterError(f'n must be a positive integer, got {n}')
    if p <= 0 or q <= 0:
        raise ParameterError(f'p and q must be positive, got {p}, {q}')
    return 2 / p, (n * q + 2) / ((n + 1) * q)


def lp_breakdown_exponents(
    n: int, p: float, q: float,
    deltas: typing.Sequence[float] = DEFAULT_DELTAS,
) -> Certificate:
    """Necessary condition 2/p >= (nq + 2) / ((n + 1) q) for L^q -> L^p.

    Extending z^n off a thin neighbourhood of n + 1 lines, the L^q norm
    of the data is c_n delta^((nq+2)/((n+1)q)) with c_n = (nq+2)^(-1/q)
    while any extension has L^p norm of order delta^(2/p). The ratio of
    the two must stay bounded as delta -> 0.
    """
    target, source = breakdown_exponents(n, p, q)
    c_n = (n * q + 2) ** (-1 / q)
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    ratios = deltas ** target / (c_n * deltas ** source)
    return Certificate.compare(
        'lp_breakdown',
        source,
        target,
        EXPONENT_TOLERANCE,
        parameters={
            'n': n,
            'p': p,
            'q': q,
            'c_n': c_n,
            'deltas': deltas,
            'ratios': ratios,
            'ratio_bounded': bool(np.all(np.diff(ratios) <= 1e-12 * ratios[:-1])),
            'thin_domain_holds': p <= q,
            'wide_domain_holds': q <= p,
        },
    )


def _gauss_panels(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(GAUSS_NODES)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    return (
        mid[:, None] + half[:, None] * x,
        half[:, None] * w,
    )


def dyadic_increments(exponent: float, levels: int = DYADIC_LEVELS) -> np.ndarray:
    """2 pi integral of r^(exponent + 1) over 2^-(m+1) < r < 2^-m"""
    edges = 2.0 ** -np.arange(levels + 1, dtype=float)[::-1]
    nodes, weights = _gauss_panels(edges)
    increments = 2 * math.pi * np.sum(weights * nodes ** (exponent + 1), axis=1)
    return increments[::-1]


def truncated_integral(p: float, k: int, alpha: float, j: float) -> float:
    """integral over |z| < 1 of |z|^(pk) e^(-max(2 alpha log|z|, -j))"""
    r_j = math.exp(-j / (2 * alpha))
    inner_nodes, inner_weights = _gauss_panels(np.array([0.0, r_j]))
    inner = math.exp(j) * np.sum(inner_weights * inner_nodes ** (p * k + 1))
    edges = np.geomspace(r_j, 1.0, TRUNCATION_PANELS + 1)
    nodes, weights = _gauss_panels(edges)
    outer = np.sum(weights * nodes ** (p * k - 2 * alpha + 1))
    return float(2 * math.pi * (inner + outer))


def openness_threshold_demo(
    p: float, k: int, alpha: float, j_max: int = 8,
    levels: int = DYADIC_LEVELS,
) -> Certificate:
    """Finiteness of integral |z|^(pk) e^-phi near 0, analytic and numeric.

    Analytically the integral is finite iff pk - 2 alpha > -2. The
    numeric flag comes from dyadic annuli shrinking to 0: the integral
    converges iff their contributions eventually shrink. Every truncated
    weight phi_j is bounded, so its integral is finite; those values are
    reported and must increase with j.
    """
    if p <= 0 or alpha <= 0:
        raise ParameterError(f'p and alpha must be positive, got {p}, {alpha}')
    if k < 0:
        raise ParameterError(f'k must be a nonnegative integer, got {k}')
    exponent = p * k - 2 * alpha
    boundary = abs(exponent + 2) <= EXPONENT_TOLERANCE
    analytic = exponent > -2 and not boundary
    increments = dyadic_increments(exponent, levels)
    ratio = float(increments[-1] / increments[-2])
    numeric = ratio < 1 - RATIO_SLACK
    truncated = [truncated_integral(p, k, alpha, j) for j in range(1, j_max + 1)]
    bounded = all(np.isfinite(truncated)) and all(
        b >= a for a, b in zip(truncated, truncated[1:])
    )
    mismatch = int(analytic != numeric) + int(not bounded)
    logger.debug(
        'openness p=%g k=%d alpha=%g: exponent %g, ratio %.6g, %s',
        p, k, alpha, exponent, ratio, 'finite' if analytic else 'divergent',
    )
    return Certificate.compare(
        'openness_threshold',
        mismatch,
        0,
        parameters={
            'p': p,
            'k': k,
            'alpha': alpha,
            'exponent': exponent,
            'boundary': boundary,
            'analytic_finite': analytic,
            'numeric_finite': numeric,
            'increment_ratio': ratio,
            'partial_sum': float(increments.sum()),
            'truncated': truncated,
        },
    )


def openness_sweep(
    cases: typing.Sequence[tuple[float, int, float]] = OPENNESS_CASES,
) -> tuple[Certificate, Sweep]:
    """The threshold demo over several (p, k, alpha), one certificate"""
    rows = []
    mismatches = 0
    for p, k, alpha in cases:
        cert = openness_threshold_demo(p, k, alpha)
        mismatches += int(cert.lhs)
        params = cert.parameters
        rows.append([
            p, k, alpha, params['exponent'], int(params['analytic_finite']),
            int(params['numeric_finite']), params['increment_ratio'],
        ])
    cert = Certificate.compare(
        'openness_sweep', mismatches, 0, parameters={'cases': len(rows)},
    )
    sweep = Sweep(
        'openness',
        ['p', 'k', 'alpha', 'exponent', 'analytic_finite', 'numeric_finite',
         'increment_ratio'],
        rows,
    )
    return cert, sweep
