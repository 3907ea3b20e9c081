import json

import numpy as np
import pytest

from qbm.cli import main
from qbm.config import options
from qbm.decoherence import tau_c_universal
from qbm.phase_space import read_raster
from qbm.util import read_csv


def _read_json(path):
    with open(str(path)) as f:
        return json.load(f)


def test_green(tmp_path):
    code = main(['green', '--p', '1', '--zeta', '2', '--omega-c', '200', '--beta', '1',
                 '--tmax', '5', '--out', str(tmp_path)])
    assert code == 0
    with open(str(tmp_path / 'green.csv')) as f:
        header = f.readline()
    assert header.startswith('# qbm ')
    assert 'zeta=2' in header
    df = read_csv(str(tmp_path / 'green.csv'))
    assert list(df.columns) == ['t', 'G', 'Gdot', 'Gddot']
    assert np.interp(1.0, df.t, df.G) == pytest.approx(0.4323, abs=5e-3)
    record = _read_json(tmp_path / 'green_residual.json')
    assert record['residual'] <= options.residual_tol
    assert record['min_det_v'] > 0


@pytest.mark.parametrize('method', ['talbot', 'dehoog'])
def test_green_inversion_check(tmp_path, method):
    code = main(['green', '--p', '1', '--zeta', '1', '--beta', '1', '--omega-c', '20',
                 '--tmax', '4', '--n-steps', '1024', '--decimation', '256', '--check', method,
                 '--out', str(tmp_path)])
    assert code == 0
    df = read_csv(str(tmp_path / 'green.csv'))
    assert df['G_' + method].notna().sum() == 4
    record = _read_json(tmp_path / 'green_residual.json')
    assert record['max_%s_deviation' % method] < 1e-4


def test_kernel(tmp_path):
    code = main(['kernel', '--p', '0.5', '--zeta', '1', '--beta', '1', '--omega-c', '10',
                 '--tmax', '2', '--n-steps', '128', '--out', str(tmp_path)])
    assert code == 0
    df = read_csv(str(tmp_path / 'kernel.csv'))
    assert list(df.columns) == ['t', 'damping', 'noise']
    assert len(df) == 129


def test_moments(tmp_path):
    code = main(['moments', '--p', '1', '--zeta', '1', '--beta', '1', '--omega-c', '10',
                 '--tmax', '2', '--n-steps', '256', '--decimation', '16',
                 '--out', str(tmp_path)])
    assert code == 0
    df = read_csv(str(tmp_path / 'moments.csv'))
    assert list(df.columns) == ['t', 'A', 'B', 'C']
    assert len(df) == 17
    assert _read_json(tmp_path / 'pointer.json')['b_inf'] > 0


def test_tc_white_noise(tmp_path, capsys):
    code = main(['tc', '--p', '1', '--zeta', '1', '--beta', '0.01', '--cutoff', 'none',
                 '--tmax', '6', '--n-steps', '4096', '--decimation', '1',
                 '--out', str(tmp_path)])
    assert code == 0
    t_c = _read_json(tmp_path / 'localization.json')['t_c']
    assert t_c == pytest.approx(tau_c_universal(form='white_noise'), abs=2e-3)
    assert 't_c =' in capsys.readouterr().out
    for name in ('moments.csv', 'pointer.json', 'criterion.csv'):
        assert (tmp_path / name).exists()


def test_evolve_gaussian(tmp_path):
    code = main(['evolve', '--p', '1', '--zeta', '1', '--beta', '1', '--cutoff', 'none',
                 '--tmax', '6', '--n-steps', '1024', '--state', 'gaussian', '--x0', '1',
                 '--times', '0.5', '--grid-n', '128', '--out', str(tmp_path)])
    assert code == 0
    df = read_csv(str(tmp_path / 'evolve.csv'))
    assert list(df.columns) == ['t', 'negativity_volume_W0', 'min_W1']
    assert df.negativity_volume_W0[0] < 1e-8
    assert np.isnan(df.min_W1[0])
    w = read_raster(str(tmp_path / 'wigner_t0.5'))
    assert w.t == 0.5
    assert w.norm == pytest.approx(1, abs=1e-4)
    assert not (tmp_path / 'pointer_t0.5.bin').exists()


def test_evolve_cat_writes_pointer_weight(tmp_path):
    code = main(['evolve', '--p', '1', '--zeta', '1', '--beta', '1', '--cutoff', 'none',
                 '--tmax', '6', '--n-steps', '1024', '--x0', '2', '--times', '0.2,5',
                 '--grid-n', '256', '--out', str(tmp_path)])
    assert code == 0
    df = read_csv(str(tmp_path / 'evolve.csv'))
    assert list(df.t) == [0.2, 5]
    assert df.negativity_volume_W0[0] > df.negativity_volume_W0[1]
    w1 = read_raster(str(tmp_path / 'pointer_t5'))
    assert w1.s_order == 1


def test_figure1(tmp_path, capsys):
    code = main(['figure1', '--no-pipeline', '--out', str(tmp_path)])
    assert code == 0
    assert len(read_csv(str(tmp_path / 'figure1.csv'))) == 9
    assert (tmp_path / 'figure1.gp').exists()
    assert not (tmp_path / 'figure1_pipeline.csv').exists()
    slope = float(capsys.readouterr().out.split('slope = ')[1].split(',')[0])
    assert slope == pytest.approx(-1, abs=1e-3)


def test_config_file_with_override(tmp_path):
    config = tmp_path / 'run.toml'
    config.write_text('p = 1\nzeta = 1\nbeta = 1\nomega-c = 20\ntmax = 2\nn_steps = 128\n')
    code = main(['green', '--config', str(config), '--zeta', '2', '--out', str(tmp_path)])
    assert code == 0
    with open(str(tmp_path / 'green.csv')) as f:
        header = f.readline()
    assert 'zeta=2' in header
    assert 'omega_c=20' in header


def test_unknown_config_key(tmp_path):
    config = tmp_path / 'run.toml'
    config.write_text('p = 1\nzeta = 1\nbeta = 1\ngamma = 3\n')
    assert main(['green', '--config', str(config), '--out', str(tmp_path)]) == 2


def test_config_table_rejected(tmp_path):
    config = tmp_path / 'run.toml'
    config.write_text('[bath]\np = 1\n')
    assert main(['green', '--config', str(config), '--out', str(tmp_path)]) == 4


def test_missing_bath_parameter(tmp_path):
    assert main(['green', '--p', '1', '--beta', '1', '--out', str(tmp_path)]) == 2


def test_unknown_command():
    assert main(['simulate']) == 2


def test_exponent_out_of_range(tmp_path):
    code = main(['green', '--p', '3', '--zeta', '1', '--beta', '1', '--out', str(tmp_path)])
    assert code == 4
    assert _read_json(tmp_path / 'error.json')['exit_code'] == 4


def test_time_beyond_horizon(tmp_path):
    code = main(['evolve', '--p', '1', '--zeta', '1', '--beta', '1', '--cutoff', 'none',
                 '--tmax', '6', '--n-steps', '256', '--times', '10', '--out', str(tmp_path)])
    assert code == 4
    assert _read_json(tmp_path / 'error.json')['error'] == 'OutOfRangeError'


def test_unwritable_output(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('')
    code = main(['green', '--p', '1', '--zeta', '1', '--beta', '1', '--omega-c', '20',
                 '--tmax', '1', '--n-steps', '64', '--out', str(blocker / 'out')])
    assert code == 3


def test_threads_restored(tmp_path):
    threads = options.threads
    main(['kernel', '--p', '1', '--zeta', '1', '--beta', '1', '--omega-c', '10', '--tmax', '1',
          '--n-steps', '64', '--threads', '2', '--out', str(tmp_path)])
    assert options.threads == threads
