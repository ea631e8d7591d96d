"""Type definitions

Project-wide type definitions, and utility types, are declared here.
"""

import math
import pathlib
import typing

from dataclasses import dataclass, field, asdict, replace

import numpy as np

from scvlab.errors import DomainError


DOMAIN_KINDS = ('disc', 'polydisc', 'product', 'annulus')


def complex_pair(value: complex) -> list[float]:
    """Serialize a complex number as a [re, im] pair"""
    value = complex(value)
    return [value.real, value.imag]


def parse_complex(value) -> complex:
    """Read a complex number from a [re, im] pair, or a plain real"""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f'expected a [re, im] pair, got {value!r}')
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def jsonable(value):
    """Turn numpy scalars, arrays and complex numbers into JSON-ready data"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return complex_pair(value)
    if isinstance(value, pathlib.Path):
        return str(value)
    return value


@dataclass(frozen=True)
class AxisDisc:
    """One complex axis of a domain: a disc, or an annulus if r_inner > 0"""
    center: complex
    radius: float
    r_inner: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f'radius must be positive, got {self.radius}')
        if self.r_inner < 0 or self.r_inner >= self.radius:
            raise DomainError(
                f'need 0 <= r_inner < r_outer, got {self.r_inner}, '
                f'{self.radius}'
            )

    def distance(self, z):
        """Signed distance from z to the complement of this axis set"""
        dist = np.abs(np.asarray(z) - self.center)
        outer = self.radius - dist
        if self.r_inner > 0:
            return np.minimum(outer, dist - self.r_inner)
        return outer


@dataclass(frozen=True)
class DomainSpec:
    """A product of discs (or a single annulus) in C^n"""
    kind: str
    axes: tuple[AxisDisc, ...]

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise DomainError(f'unknown domain kind: {self.kind}')
        if not self.axes:
            raise DomainError('a domain needs at least one axis')
        if self.kind in ('disc', 'annulus') and len(self.axes) != 1:
            raise DomainError(f'a {self.kind} has exactly one axis')
        if self.kind != 'annulus' and any(a.r_inner for a in self.axes):
            raise DomainError('only an annulus has an inner radius')

    @classmethod
    def disc(cls, center: complex, radius: float) -> 'DomainSpec':
        """The disc |z - center| < radius"""
        return cls('disc', (AxisDisc(complex(center), float(radius)),))

    @classmethod
    def polydisc(
        cls, centers: typing.Sequence[complex], radii: typing.Sequence[float],
    ) -> 'DomainSpec':
        """The polydisc with the given centers and radii per axis"""
        if len(centers) != len(radii):
            raise DomainError(
                f'axis count mismatch: {len(centers)} centers, '
                f'{len(radii)} radii'
            )
        return cls('polydisc', tuple(
            AxisDisc(complex(c), float(r)) for c, r in zip(centers, radii)
        ))

    @classmethod
    def product(
        cls, discs: typing.Sequence[tuple[complex, float]],
    ) -> 'DomainSpec':
        """A product of discs, given as (center, radius) pairs"""
        return cls('product', tuple(
            AxisDisc(complex(c), float(r)) for c, r in discs
        ))

    @classmethod
    def annulus(
        cls, center: complex, r_inner: float, r_outer: float,
    ) -> 'DomainSpec':
        """The annulus r_inner < |z - center| < r_outer"""
        return cls('annulus', (
            AxisDisc(complex(center), float(r_outer), float(r_inner)),
        ))

    @property
    def dimension(self) -> int:
        """Number of complex axes"""
        return len(self.axes)

    @property
    def centers(self) -> np.ndarray:
        """Centers per axis"""
        return np.array([a.center for a in self.axes], dtype=complex)

    @property
    def radii(self) -> np.ndarray:
        """Outer radii per axis"""
        return np.array([a.radius for a in self.axes], dtype=float)

    @property
    def is_convex(self) -> bool:
        """Products of discs are convex, annuli are not"""
        return self.kind != 'annulus'

    @property
    def area(self) -> float:
        """Lebesgue measure of the domain"""
        return math.prod(
            math.pi * (a.radius ** 2 - a.r_inner ** 2) for a in self.axes
        )

    def contains(self, point) -> bool:
        """Is the point strictly inside the domain?"""
        point = np.atleast_1d(np.asarray(point, dtype=complex))
        if point.shape != (self.dimension,):
            raise DomainError(
                f'point has {point.size} coordinates, domain has '
                f'{self.dimension} axes'
            )
        return all(
            float(a.distance(z)) > 0 for a, z in zip(self.axes, point)
        )

    def asdict(self) -> dict[str, typing.Any]:
        """Serialize to the {"kind", "params"} JSON form"""
        match self.kind:
            case 'disc':
                axis = self.axes[0]
                params = {
                    'center': complex_pair(axis.center),
                    'radius': axis.radius,
                }
            case 'polydisc':
                params = {
                    'centers': [complex_pair(a.center) for a in self.axes],
                    'radii': [a.radius for a in self.axes],
                }
            case 'product':
                params = {'discs': [
                    {'center': complex_pair(a.center), 'radius': a.radius}
                    for a in self.axes
                ]}
            case _:
                axis = self.axes[0]
                params = {
                    'center': complex_pair(axis.center),
                    'r_inner': axis.r_inner,
                    'r_outer': axis.radius,
                }
        return {'kind': self.kind, 'params': params}

    @classmethod
    def fromdict(cls, data) -> 'DomainSpec':
        """Create a DomainSpec from its JSON form"""
        kind = data['kind']
        params = data['params']
        match kind:
            case 'disc':
                return cls.disc(
                    parse_complex(params['center']), params['radius'],
                )
            case 'polydisc':
                return cls.polydisc(
                    [parse_complex(c) for c in params['centers']],
                    params['radii'],
                )
            case 'product':
                return cls.product([
                    (parse_complex(d['center']), d['radius'])
                    for d in params['discs']
                ])
            case 'annulus':
                return cls.annulus(
                    parse_complex(params['center']),
                    params['r_inner'],
                    params['r_outer'],
                )
        raise DomainError(f'unknown domain kind: {kind}')


@dataclass
class Certificate:
    """A verification report for one inequality on one configuration.

    The check passes iff margin = rhs - lhs >= -tolerance. A certificate
    built from an error carries the error text and never passes.
    """
    check: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    witness: typing.Any = None
    parameters: dict[str, typing.Any] = field(default_factory=dict)
    error: str | None = None

    @property
    def margin(self) -> float:
        """rhs - lhs; negative margins beyond the tolerance fail"""
        return self.rhs - self.lhs

    @classmethod
    def compare(
        cls,
        check: str,
        lhs: float,
        rhs: float,
        tolerance: float = 0.0,
        witness=None,
        parameters: dict | None = None,
    ) -> 'Certificate':
        """Certify lhs <= rhs + tolerance"""
        lhs = float(lhs)
        rhs = float(rhs)
        margin = rhs - lhs
        return cls(
            check=check,
            lhs=lhs,
            rhs=rhs,
            tolerance=float(tolerance),
            passed=bool(margin >= -tolerance),
            witness=jsonable(witness),
            parameters=jsonable(parameters or {}),
        )

    @classmethod
    def failure(
        cls, check: str, error: str, parameters: dict | None = None,
    ) -> 'Certificate':
        """A failing certificate for a check that raised"""
        return cls(
            check=check,
            lhs=math.nan,
            rhs=math.nan,
            tolerance=0.0,
            passed=False,
            parameters=jsonable(parameters or {}),
            error=error,
        )

    def inverted(self, check: str) -> 'Certificate':
        """A certificate that passes iff this one fails.

        Used where a suite demonstrates that a bad input is detected.
        The sides swap and the tolerance becomes the negative of the next
        float above the old one, so the inverted check is strict and
        still passes iff margin >= -tolerance.
        """
        tolerance = -math.nextafter(self.tolerance, math.inf)
        return replace(
            self,
            check=check,
            lhs=self.rhs,
            rhs=self.lhs,
            tolerance=tolerance,
            passed=bool(self.lhs - self.rhs >= -tolerance),
        )

    def asdict(self) -> dict[str, typing.Any]:
        """Serialize the Certificate, keys in a fixed order"""
        data = {
            'check': self.check,
            'pass': self.passed,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'margin': self.margin,
            'tolerance': self.tolerance,
            'witness': self.witness,
            'parameters': self.parameters,
        }
        if self.error is not None:
            data['error'] = self.error
        return data

    @classmethod
    def fromdict(cls, data) -> 'Certificate':
        """Create a Certificate from its serialized form"""
        return cls(
            check=data['check'],
            lhs=float(data['lhs']),
            rhs=float(data['rhs']),
            tolerance=float(data['tolerance']),
            passed=bool(data['pass']),
            witness=data.get('witness'),
            parameters=data.get('parameters', {}),
            error=data.get('error'),
        )


@dataclass
class Sweep:
    """Tabular sweep data, written as CSV for external plotting"""
    name: str
    header: list[str]
    rows: list[list[typing.Any]]


@dataclass
class SuiteResult:
    """Everything one verification suite produced"""
    certificates: list[Certificate] = field(default_factory=list)
    sweeps: list[Sweep] = field(default_factory=list)

    def extend(self, other: 'SuiteResult'):
        """Append the output of another suite"""
        self.certificates.extend(other.certificates)
        self.sweeps.extend(other.sweeps)


@dataclass
class RunConfig:
    """Settings for one CLI run"""
    command: str
    domain: DomainSpec | None = None
    weight: str | None = None
    psi: str | None = None
    resolution: int = 48
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)
    out: pathlib.Path = pathlib.Path('results')
    suites: dict[str, dict[str, typing.Any]] = field(default_factory=dict)
    verbose: bool = False

    def options(self, suite: str) -> dict[str, typing.Any]:
        """Suite-specific options from the config file"""
        return self.suites.get(suite, {})

    def tolerance(self, name: str, default: float) -> float:
        """A tolerance override, or the default"""
        return float(self.tolerances.get(name, default))

    def asdict(self):
        """Serialize the RunConfig"""
        data = asdict(self)
        data['domain'] = self.domain.asdict() if self.domain else None
        data['out'] = str(self.out)
        return data


class ResultStorage(typing.Protocol):
    """Methods that a result storage must implement"""
    def store_certificates(self, certificates: list[Certificate]):
        """Store the certificates of a run, replacing earlier ones"""

    def list_certificates(self) -> list[Certificate]:
        """Return all stored certificates"""
        raise NotImplementedError

    def store_sweep(self, sweep: Sweep) -> pathlib.Path:
        """Store one sweep as a CSV file"""
        raise NotImplementedError
