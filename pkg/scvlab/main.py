"""scvlab CLI

This defines the CLI entrypoint for scvlab
"""

import argparse
import logging
import sys

from scvlab.config import COMMANDS, load_config
from scvlab.errors import ConfigError
from scvlab.storage import FileResultStorage
from scvlab.suites import run_suites
from scvlab.types import RunConfig


logger = logging.getLogger(__name__)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='scvlab',
        description='Numerical certificates for several complex variables',
    )
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument(
        '--config',
        required=True,
        dest='config_path',
        help='JSON run configuration',
    )
    parser.add_argument('--out', help='Output directory')
    parser.add_argument('--seed', type=int, help='Random seed')
    parser.add_argument(
        '--res',
        type=int,
        dest='resolution',
        help='Grid nodes per real axis',
    )
    parser.add_argument(
        '-v',
        '--verbose',
        action='store_true',
        dest='verbose',
    )
    return parser


def parse_args(argv: list[str] | None = None) -> RunConfig:
    """Parse the command line into a RunConfig.

    Usage and config errors exit with status 2.
    """
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(
            args.config_path,
            args.command,
            out=args.out,
            seed=args.seed,
            resolution=args.resolution,
        )
    except ConfigError as exc:
        parser.error(str(exc))
    config.verbose = args.verbose
    return config


def run(config: RunConfig) -> int:
    """Run the configured suites, store the results, return the exit code"""
    result = run_suites(config)
    storage = FileResultStorage.create(config.out)
    storage.store_certificates(result.certificates)
    for sweep in result.sweeps:
        storage.store_sweep(sweep)
    for certificate in result.certificates:
        status = 'PASS' if certificate.passed else 'FAIL'
        print(f'{certificate.check} {status} {certificate.margin:.17g}')
    failed = [c.check for c in result.certificates if not c.passed]
    if failed:
        logger.warning('%d of %d checks failed', len(failed),
                       len(result.certificates))
        return 1
    if not result.certificates:
        logger.warning('no certificates were produced')
        return 1
    return 0


def main(argv: list[str] | None = None):
    """CLI entrypoint

    This is usually run as a console script, installed into your virtualenv.
    Use argparse, load the config and dispatch to the selected suites.
    """
    config = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if config.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    sys.exit(run(config))
