"""CLI tests"""
import json
import pathlib

import pytest

from scvlab.main import main, parse_args, run


def _config(tmpdir, data=None) -> str:
    path = pathlib.Path(tmpdir) / 'suite.json'
    path.write_text(json.dumps({'out': str(pathlib.Path(tmpdir) / 'out'),
                                **(data or {})}))
    return str(path)


def test_parse_args(tmpdir):
    """The command and the config file make a RunConfig"""
    config = parse_args(['ot', '--config', _config(tmpdir)])
    assert config.command == 'ot'
    assert not config.verbose


def test_parse_args_overrides(tmpdir):
    """--res, --seed and --out override the file"""
    config = parse_args([
        'all', '--config', _config(tmpdir, {'resolution': 32}),
        '--res', '64', '--seed', '3', '--out', 'elsewhere', '-v',
    ])
    assert config.resolution == 64
    assert config.seed == 3
    assert config.out == pathlib.Path('elsewhere')
    assert config.verbose


def test_parse_args_bogus_flag():
    """Unknown flags are usage errors"""
    with pytest.raises(SystemExit) as excinfo:
        parse_args(['--bogus'])
    assert excinfo.value.code == 2


def test_parse_args_unknown_command(tmpdir):
    """Unknown commands are usage errors"""
    with pytest.raises(SystemExit) as excinfo:
        parse_args(['plot', '--config', _config(tmpdir)])
    assert excinfo.value.code == 2


def test_parse_args_bad_config(tmpdir, capsys):
    """Schema violations exit 2 and name the pointer"""
    with pytest.raises(SystemExit) as excinfo:
        parse_args(['lp', '--config', _config(tmpdir, {'resolution': 2})])
    assert excinfo.value.code == 2
    assert '/resolution' in capsys.readouterr().err


def test_run_lp(tmpdir, capsys):
    """The lp suite passes and writes certificates and sweeps"""
    config = parse_args(['lp', '--config', _config(tmpdir)])
    assert run(config) == 0
    out = pathlib.Path(tmpdir) / 'out'
    certificates = json.loads((out / 'certificates.json').read_text())
    assert [c['check'] for c in certificates] == [
        'lp_closed_form',
        'lp_limit',
        'lp_breakdown_n1_p2_q2',
        'lp_breakdown_n1_p3_q3',
        'openness_sweep',
    ]
    assert all(c['pass'] for c in certificates)
    assert (out / 'lp_iteration_p1.csv').exists()
    assert (out / 'openness.csv').exists()
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 5
    assert lines[0].startswith('lp_closed_form PASS ')


def test_run_weights(tmpdir):
    """s = 0.1 gives nine identities, the order chain and the 1/6 bound"""
    config = parse_args([
        'weights', '--config',
        _config(tmpdir, {'suites': {'weights': {'s': 0.1}}}),
    ])
    assert run(config) == 0
    out = pathlib.Path(tmpdir) / 'out'
    certificates = json.loads((out / 'certificates.json').read_text())
    assert len(certificates) == 11
    assert certificates[-1]['check'] == 'sixth_bound'
    assert (out / 'chen_weights_s0.1.csv').exists()


def test_run_psh_negative_weight(tmpdir):
    """-|z|^2 fails and the certificate names the witness"""
    config = parse_args([
        'psh', '--config', _config(tmpdir, {'weight': '-x1^2-y1^2'}),
    ])
    assert run(config) == 1
    certificates = json.loads(
        (pathlib.Path(tmpdir) / 'out' / 'certificates.json').read_text()
    )
    failed = [c for c in certificates if not c['pass']]
    assert failed
    assert failed[0]['check'] == 'submean_weight'
    assert failed[0]['witness']


def test_run_error_becomes_certificate(tmpdir):
    """A weight with more axes than the domain fails without raising"""
    config = parse_args([
        'psh', '--config', _config(tmpdir, {'weight': 'x1 + x3'}),
    ])
    assert run(config) == 1
    certificates = json.loads(
        (pathlib.Path(tmpdir) / 'out' / 'certificates.json').read_text()
    )
    assert certificates[-1]['check'] == 'psh_weight'
    assert certificates[-1]['error'].startswith('DimensionError')
    assert certificates[-1]['lhs'] == 'nan'


def test_run_deterministic(tmpdir):
    """The same config writes the same bytes"""
    path = _config(tmpdir, {'suites': {'operator': {'instances': 5}}})
    out = pathlib.Path(tmpdir) / 'out' / 'certificates.json'
    run(parse_args(['operator', '--config', path]))
    first = out.read_bytes()
    run(parse_args(['operator', '--config', path]))
    assert out.read_bytes() == first


def test_main_exit_code(tmpdir):
    """main exits with the run's status"""
    with pytest.raises(SystemExit) as excinfo:
        main(['lp', '--config', _config(tmpdir)])
    assert excinfo.value.code == 0
