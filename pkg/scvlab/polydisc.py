"""dbar on a bidisc

Solves du = f for a dbar-closed (0, 1)-form f on a polydisc D in C^2, on
the concentric polydisc D' = shrink * D. Each step solves
dG/dzbar_k = g with a cutoff Cauchy transform along axis k; two steps,
the second one applied to what the first leaves of f, give u.
"""

import logging
import typing

from dataclasses import dataclass

import numpy as np

from scvlab.cauchy import lattice_transform
from scvlab.errors import (
    ClosureError,
    DomainError,
    ParameterError,
    PreconditionError,
    ResolutionError,
)
from scvlab.grid import build_grid, FormField, Grid, ScalarField
from scvlab.profiles import smoothstep5
from scvlab.types import Certificate, DomainSpec, Sweep
from scvlab.wirtinger import d_dzbar, dbar_form, form_sup


logger = logging.getLogger(__name__)

CLOSURE_FACTOR = 50.0
RESIDUAL_FACTOR = 20.0
CUTOFF_WIDTH = 0.75
RESIDUAL_FLOOR = 1e-9


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoffs per axis: 1 on |z_k - c_k| <= inner_k, 0 near outer_k"""
    centers: tuple[complex, ...]
    inner: tuple[float, ...]
    outer: tuple[float, ...]

    def __post_init__(self):
        for r_in, r_out in zip(self.inner, self.outer):
            if not 0 < r_in < r_out:
                raise ParameterError(
                    f'cutoff needs 0 < inner < outer, got {r_in}, {r_out}'
                )

    @classmethod
    def for_domain(cls, domain: DomainSpec, shrink: float) -> 'CutoffSpec':
        """Inner radii midway between shrink * r and r"""
        radii = domain.radii
        return cls(
            centers=tuple(complex(c) for c in domain.centers),
            inner=tuple(float(r) for r in (1 + shrink) / 2 * radii),
            outer=tuple(float(r) for r in radii),
        )

    def profile(self, z, axis: int):
        """psi_axis(z), falling from 1 to 0 over 3/4 of the cutoff gap"""
        k = axis - 1
        gap = CUTOFF_WIDTH * (self.outer[k] - self.inner[k])
        t = (np.abs(np.asarray(z) - self.centers[k]) - self.inner[k]) / gap
        return 1 - smoothstep5(t)

    def field(self, grid: Grid, axis: int) -> ScalarField:
        """The cutoff in z_axis, sampled on a grid"""
        return ScalarField(grid, self.profile(grid.coordinate(axis), axis))

    def inner_region(self, grid: Grid, margin: float = 2.0) -> np.ndarray:
        """Nodes at least `margin` steps inside the inner polydisc"""
        radii = [r - margin * h for r, h in zip(self.inner, grid.spacing)]
        return grid.ball_region(radii) & grid.interior(1)


def solve_step(
    g: ScalarField, k: int, cutoff: CutoffSpec,
) -> ScalarField:
    """G with dG/dzbar_k = g on the inner polydisc.

    g must be holomorphic in every z_j with j > k there; G then is too.
    """
    grid = g.grid
    check = cutoff.inner_region(grid)
    tolerance = CLOSURE_FACTOR * grid.h ** 2
    for j in range(k + 1, grid.n + 1):
        residual = d_dzbar(g, j).sup(check)
        if residual > tolerance:
            raise PreconditionError(
                f'input of step {k} is not holomorphic in z_{j}', residual,
            )
        if residual > tolerance / 2:
            logger.warning(
                'step %d: dbar_%d residual %.3g is close to tolerance %.3g',
                k, j, residual, tolerance,
            )
    return lattice_transform(cutoff.field(grid, k) * g, k)


def solve_dbar_polydisc(
    f: FormField, shrink: float = 0.5,
) -> tuple[ScalarField, Certificate]:
    """u with du/dzbar = f on shrink * D, and its residual certificate"""
    grid = f.grid
    if grid.n != 2:
        raise DomainError(f'the polydisc solver is for n=2, got n={grid.n}')
    if grid.domain.kind == 'annulus':
        raise DomainError('the polydisc solver needs a product of discs')
    if not 0 < shrink < 1:
        raise ParameterError(f'shrink must be in (0, 1), got {shrink}')

    closure = form_sup(dbar_form(f), grid.interior(2))
    tolerance = CLOSURE_FACTOR * grid.h ** 2
    if closure > tolerance:
        raise ClosureError('the form is not dbar-closed', closure)

    cutoff = CutoffSpec.for_domain(grid.domain, shrink)
    f1, f2 = f.components()
    step2 = solve_step(f2, 2, cutoff)
    g1 = f1 - d_dzbar(step2, 1)
    step1 = solve_step(g1, 1, cutoff)
    u = step1 + step2

    region = grid.ball_region(shrink * grid.domain.radii) & grid.interior(1)
    residual = np.zeros(grid.shape)
    for axis, component in enumerate((f1, f2), start=1):
        residual = np.maximum(
            residual,
            np.where(region, np.abs(d_dzbar(u, axis).values - component.values), 0),
        )
    worst = np.unravel_index(np.argmax(residual), grid.shape)
    witness = grid.point_at(worst)
    logger.info(
        'polydisc solve on %s nodes: residual %.3g', grid.nodes_per_axis,
        residual[worst],
    )
    certificate = Certificate.compare(
        'polydisc_dbar_residual',
        lhs=residual[worst],
        rhs=RESIDUAL_FACTOR * grid.h,
        witness={'point': witness},
        parameters={
            'shrink': shrink,
            'nodes_per_axis': list(grid.nodes_per_axis),
            'h': grid.h,
            'closure_residual': closure,
        },
    )
    return u, certificate


def refinement_study(
    domain: DomainSpec,
    make_form: typing.Callable[[Grid], FormField],
    resolutions: typing.Sequence[int],
    shrink: float = 0.5,
) -> Sweep:
    """Solve at increasing resolutions; the residual must shrink"""
    rows = []
    previous = None
    for count in resolutions:
        grid = build_grid(domain, count)
        _, certificate = solve_dbar_polydisc(make_form(grid), shrink)
        rows.append([count, grid.h, certificate.lhs, certificate.rhs])
        if (
            previous is not None
            and certificate.lhs >= previous
            and certificate.lhs > RESIDUAL_FLOOR
        ):
            raise ResolutionError(
                f'residual {certificate.lhs:.3g} at {count} nodes did not '
                f'decrease from {previous:.3g}'
            )
        previous = certificate.lhs
    return Sweep(
        'polydisc_refinement', ['nodes', 'h', 'residual', 'bound'], rows,
    )
