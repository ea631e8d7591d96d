"""Implementations of storage backends"""

import csv
import json
import math
import pathlib

from scvlab.types import Certificate, Sweep


CERTIFICATES_FILE = 'certificates.json'


def _finite(value):
    """Non-finite floats become the strings nan, inf and -inf"""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f'{value:.17g}'
    return str(value)


class FileResultStorage:
    """A file-backed ResultStorage: certificates.json and one CSV per sweep"""

    @classmethod
    def create(cls, base_path: pathlib.Path):
        """Create a new FileResultStorage at the given target path"""
        base_path = pathlib.Path(base_path).expanduser().absolute()
        if not base_path.is_dir():
            base_path.mkdir(parents=True)
        return cls(base=base_path)

    def __init__(self, base: pathlib.Path):
        self._base = pathlib.Path(base)

    def store_certificates(self, certificates: list[Certificate]):
        """Write every certificate of a run, replacing earlier ones"""
        certificates_path = self._base / CERTIFICATES_FILE
        with certificates_path.open('w') as certificates_file:
            json.dump(
                [_finite(c.asdict()) for c in certificates],
                certificates_file,
                indent=4,
            )
            certificates_file.write('\n')

    def list_certificates(self) -> list[Certificate]:
        """Return stored certificates, none if nothing was stored"""
        certificates_path = self._base / CERTIFICATES_FILE
        try:
            with certificates_path.open() as certificates_file:
                certificates = json.load(certificates_file)
        except (ValueError, IOError):
            return []
        return [Certificate.fromdict(c) for c in certificates]

    def store_sweep(self, sweep: Sweep) -> pathlib.Path:
        """Write a sweep as <name>.csv"""
        sweep_path = self._base / f'{sweep.name}.csv'
        with sweep_path.open('w', newline='') as sweep_file:
            writer = csv.writer(sweep_file, lineterminator='\n')
            writer.writerow(sweep.header)
            for row in sweep.rows:
                writer.writerow([_cell(value) for value in row])
        return sweep_path
