"""Run configuration

Loads the JSON config file of a run, validates it and applies command line
overrides. Violations are reported as ConfigError with a JSON pointer to
the offending value, e.g. /domain/params/radius.
"""

import json
import logging
import numbers
import pathlib
import typing

from scvlab.errors import ConfigError, DomainError, ExprError
from scvlab.expr import parse
from scvlab.grid import MIN_NODES
from scvlab.types import DOMAIN_KINDS, DomainSpec, RunConfig


logger = logging.getLogger(__name__)

SUITE_NAMES = (
    'solve-dbar', 'cauchy', 'psh', 'hull', 'operator', 'hormander', 'ot',
    'lp', 'weights',
)
COMMANDS = SUITE_NAMES + ('all',)
TOP_LEVEL_KEYS = (
    'domain', 'weight', 'psi', 'resolution', 'seed', 'tolerances', 'out',
    'suites',
)
DEFAULT_RESOLUTION = 48
DEFAULT_OUT = pathlib.Path('results')


def _is_number(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _expect_object(value, pointer: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError('expected an object', pointer)
    return value


def _expect_keys(data: dict, pointer: str, required, optional=()):
    for key in required:
        if key not in data:
            raise ConfigError(f'missing key "{key}"', pointer)
    for key in data:
        if key not in required and key not in optional:
            raise ConfigError('unknown key', f'{pointer}/{key}')


def _check_complex(value, pointer: str):
    if _is_number(value):
        return
    if (
        isinstance(value, list) and len(value) == 2
        and all(_is_number(v) for v in value)
    ):
        return
    raise ConfigError('expected a number or a [re, im] pair', pointer)


def _check_radius(value, pointer: str):
    if not _is_number(value) or value <= 0:
        raise ConfigError('expected a positive number', pointer)


def _check_list(value, pointer: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError('expected a non-empty array', pointer)
    return value


def validate_domain(data, pointer: str = '/domain') -> DomainSpec:
    """A DomainSpec from its JSON form, checked key by key"""
    data = _expect_object(data, pointer)
    _expect_keys(data, pointer, ('kind', 'params'))
    kind = data['kind']
    if kind not in DOMAIN_KINDS:
        raise ConfigError(
            f'kind must be one of {", ".join(DOMAIN_KINDS)}', f'{pointer}/kind',
        )
    params_pointer = f'{pointer}/params'
    params = _expect_object(data['params'], params_pointer)
    match kind:
        case 'disc':
            _expect_keys(params, params_pointer, ('center', 'radius'))
            _check_complex(params['center'], f'{params_pointer}/center')
            _check_radius(params['radius'], f'{params_pointer}/radius')
        case 'polydisc':
            _expect_keys(params, params_pointer, ('centers', 'radii'))
            centers = _check_list(params['centers'], f'{params_pointer}/centers')
            radii = _check_list(params['radii'], f'{params_pointer}/radii')
            for k, center in enumerate(centers):
                _check_complex(center, f'{params_pointer}/centers/{k}')
            for k, radius in enumerate(radii):
                _check_radius(radius, f'{params_pointer}/radii/{k}')
            if len(centers) != len(radii):
                raise ConfigError(
                    f'{len(centers)} centers but {len(radii)} radii',
                    params_pointer,
                )
        case 'product':
            _expect_keys(params, params_pointer, ('discs',))
            discs = _check_list(params['discs'], f'{params_pointer}/discs')
            for k, disc in enumerate(discs):
                disc_pointer = f'{params_pointer}/discs/{k}'
                disc = _expect_object(disc, disc_pointer)
                _expect_keys(disc, disc_pointer, ('center', 'radius'))
                _check_complex(disc['center'], f'{disc_pointer}/center')
                _check_radius(disc['radius'], f'{disc_pointer}/radius')
        case 'annulus':
            _expect_keys(
                params, params_pointer, ('center', 'r_inner', 'r_outer'),
            )
            _check_complex(params['center'], f'{params_pointer}/center')
            _check_radius(params['r_inner'], f'{params_pointer}/r_inner')
            _check_radius(params['r_outer'], f'{params_pointer}/r_outer')
            if params['r_inner'] >= params['r_outer']:
                raise ConfigError(
                    'r_inner must be below r_outer', f'{params_pointer}/r_inner',
                )
    try:
        return DomainSpec.fromdict(data)
    except DomainError as exc:
        raise ConfigError(str(exc), pointer) from exc


def _check_expression(value, pointer: str) -> str:
    if not isinstance(value, str):
        raise ConfigError('expected an expression string', pointer)
    try:
        parse(value)
    except ExprError as exc:
        raise ConfigError(f'expression does not parse: {exc}', pointer) from exc
    return value


def _check_int(value, pointer: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError('expected an integer', pointer)
    if minimum is not None and value < minimum:
        raise ConfigError(f'must be at least {minimum}', pointer)
    return value


def validate(data: typing.Any, command: str) -> RunConfig:
    """A RunConfig from decoded JSON"""
    if command not in COMMANDS:
        raise ConfigError(f'unknown command {command!r}')
    data = _expect_object(data, '')
    _expect_keys(data, '', (), TOP_LEVEL_KEYS)

    config = RunConfig(command=command)
    if 'domain' in data:
        config.domain = validate_domain(data['domain'])
    for key in ('weight', 'psi'):
        if key in data:
            setattr(config, key, _check_expression(data[key], f'/{key}'))
    if 'resolution' in data:
        config.resolution = _check_int(
            data['resolution'], '/resolution', MIN_NODES,
        )
    else:
        config.resolution = DEFAULT_RESOLUTION
    if 'seed' in data:
        config.seed = _check_int(data['seed'], '/seed')
    if 'tolerances' in data:
        tolerances = _expect_object(data['tolerances'], '/tolerances')
        for name, value in tolerances.items():
            if not _is_number(value) or value < 0:
                raise ConfigError(
                    'expected a nonnegative number', f'/tolerances/{name}',
                )
        config.tolerances = {k: float(v) for k, v in tolerances.items()}
    if 'out' in data:
        if not isinstance(data['out'], str):
            raise ConfigError('expected a path string', '/out')
        config.out = pathlib.Path(data['out'])
    else:
        config.out = DEFAULT_OUT
    if 'suites' in data:
        suites = _expect_object(data['suites'], '/suites')
        for name, options in suites.items():
            if name not in SUITE_NAMES:
                raise ConfigError('unknown suite', f'/suites/{name}')
            _expect_object(options, f'/suites/{name}')
        config.suites = suites
    return config


def load_config(
    path: pathlib.Path | str,
    command: str,
    out: str | None = None,
    seed: int | None = None,
    resolution: int | None = None,
) -> RunConfig:
    """Read, validate and override a config file"""
    path = pathlib.Path(path)
    try:
        with path.open() as config_file:
            data = json.load(config_file)
    except FileNotFoundError as exc:
        raise ConfigError(f'config file {path} not found') from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f'malformed JSON at line {exc.lineno} column {exc.colno}: '
            f'{exc.msg}'
        ) from exc
    config = validate(data, command)
    if out is not None:
        config.out = pathlib.Path(out)
    if seed is not None:
        config.seed = seed
    if resolution is not None:
        config.resolution = _check_int(resolution, '/resolution', MIN_NODES)
    logger.debug('loaded config %s for %s', path, command)
    return config
