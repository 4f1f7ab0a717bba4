import gradid
from gradid.utils import parse_result_rows, parse_variance_rows
# For testing the command line we leverage click facilities
from click.testing import CliRunner
from conftest import write_config
import numpy as np
import os
import pytest


def _read(path):
    with open(path) as f:
        return f.read()


def test_cli_help():
    runner = CliRunner()
    result = runner.invoke(gradid.cli, '--help')
    assert result.exit_code == 0
    assert 'compare-variance' in result.output


#######
# Run #
#######

def test_cli_run(tmpdir, config_file):
    runner = CliRunner()
    out = str(tmpdir.join('results.csv'))
    result = runner.invoke(gradid.cli, ['run', config_file, '--out', out,
                                        '--no-progress'],
                           catch_exceptions=False)
    assert result.exit_code == 0
    assert '4/4 coordinates' in result.output

    rows = parse_result_rows(_read(out))
    assert [r.estimator_id for r in rows] == ['bonnet', 'score', 'price',
                                              'stein-first-order']
    assert all(r.oracle is not None for r in rows)


def test_cli_run_to_stdout(config_file):
    runner = CliRunner()
    result = runner.invoke(gradid.cli, ['run', config_file, '--no-progress'])
    assert result.exit_code == 0
    assert ('estimator_id,target,coord,estimate,std_error,oracle,abs_error,'
            'z_score') in result.output


def test_cli_run_is_deterministic(tmpdir, config_file):
    runner = CliRunner()
    outputs = []
    for name in ['first.csv', 'second.csv']:
        out = str(tmpdir.join(name))
        runner.invoke(gradid.cli, ['run', config_file, '--out', out,
                                   '--no-progress'],
                      catch_exceptions=False)
        outputs.append(_read(out))
    assert outputs[0] == outputs[1]

    out = str(tmpdir.join('reseeded.csv'))
    runner.invoke(gradid.cli, ['run', config_file, '--out', out, '--seed',
                               '2', '--no-progress'],
                  catch_exceptions=False)
    assert _read(out) != outputs[0]


def test_cli_parallel_run(tmpdir, config_file):
    runner = CliRunner()
    serial, parallel = (str(tmpdir.join(n)) for n in ['s.csv', 'p.csv'])
    runner.invoke(gradid.cli, ['run', config_file, '--out', serial,
                               '--no-progress'], catch_exceptions=False)
    result = runner.invoke(gradid.cli, ['run', config_file, '--out', parallel,
                                        '--runner-type', 'ParallelRunner',
                                        '--max-processes', '2',
                                        '--no-progress'],
                           catch_exceptions=False)
    assert result.exit_code == 0
    assert _read(serial) == _read(parallel)


def test_cli_run_without_oracle(tmpdir, config_dict):
    config_dict['oracle'] = False
    config_file = write_config(tmpdir.join('no-oracle.txt'), config_dict)
    out = str(tmpdir.join('results.csv'))
    result = CliRunner().invoke(gradid.cli, ['run', config_file, '--out', out,
                                             '--no-progress'])
    assert result.exit_code == 0
    assert all(r.oracle is None for r in parse_result_rows(_read(out)))


def test_cli_smoothness_violation(tmpdir, config_dict):
    config_dict['h'] = {'name': 'abs_sum'}
    config_file = write_config(tmpdir.join('abs.txt'), config_dict)
    result = CliRunner().invoke(gradid.cli, ['run', config_file])
    assert result.exit_code == 2
    assert 'SmoothnessViolation' in result.output


def test_cli_config_errors(tmpdir, config_dict):
    runner = CliRunner()
    bad = str(tmpdir.join('bad.txt'))
    with open(bad, 'w') as f:
        f.write("family: 'gaussian'\nthis is not a pair\n")
    result = runner.invoke(gradid.cli, ['run', bad])
    assert result.exit_code == 2

    config_dict['n_samples'] = 1
    config_file = write_config(tmpdir.join('small.txt'), config_dict)
    result = runner.invoke(gradid.cli, ['run', config_file])
    assert result.exit_code == 2
    assert 'n_samples' in result.output


####################
# Compare variance #
####################

def test_cli_compare_variance(tmpdir, config_file):
    out = str(tmpdir.join('variance.csv'))
    result = CliRunner().invoke(gradid.cli, ['compare-variance', config_file,
                                             '--out', out, '--no-progress'],
                                catch_exceptions=False)
    assert result.exit_code == 0
    rows = parse_variance_rows(_read(out))
    variances = {r.estimator_id: r.variance for r in rows}
    assert set(variances) == {'bonnet', 'score', 'price',
                              'stein-first-order'}
    assert variances['price'] <= 1e-24


def test_cli_compare_variance_single_estimator(tmpdir, config_dict):
    config_dict['estimators'] = ['bonnet']
    config_file = write_config(tmpdir.join('single.txt'), config_dict)
    result = CliRunner().invoke(gradid.cli, ['compare-variance', config_file])
    assert result.exit_code == 2
    assert 'common target' in result.output


#####################
# Campaign commands #
#####################

def test_cli_campaign_workflow(tmpdir, config_file):
    runner = CliRunner()
    campaign_dir = str(tmpdir.join('campaign'))

    result = runner.invoke(gradid.cli, ['replicate', config_file,
                                        '--campaign-dir', campaign_dir,
                                        '--runs', '2', '--no-progress'],
                           catch_exceptions=False)
    assert result.exit_code == 0
    assert 'price:sigma:0,0: 1.0000' in result.output

    result = runner.invoke(gradid.cli, ['view', '--campaign-dir',
                                        campaign_dir, '--seed', '1',
                                        '--no-pager'],
                           catch_exceptions=False)
    assert result.exit_code == 0
    rows = parse_result_rows(result.output)
    assert [r.estimator_id for r in rows] == ['bonnet', 'score', 'price',
                                              'stein-first-order']

    result = runner.invoke(gradid.cli, ['view', '--campaign-dir',
                                        campaign_dir, '--seed', '7',
                                        '--no-pager'])
    assert result.exit_code == 2
    assert 'No result for seed 7' in result.output

    result = runner.invoke(gradid.cli, ['view', '--campaign-dir',
                                        campaign_dir, '--no-pager'],
                           catch_exceptions=False)
    assert "'seed': 1" in result.output

    npy = str(tmpdir.join('results.npy'))
    result = runner.invoke(gradid.cli, ['export', '--campaign-dir',
                                        campaign_dir, npy],
                           catch_exceptions=False)
    assert result.exit_code == 0
    assert np.load(npy).shape == (2, 4, 5)

    mat = str(tmpdir.join('results.mat'))
    runner.invoke(gradid.cli, ['export', '--campaign-dir', campaign_dir, mat],
                  catch_exceptions=False)
    assert os.path.exists(mat)

    result = runner.invoke(gradid.cli, ['export', '--campaign-dir',
                                        campaign_dir,
                                        str(tmpdir.join('results.xlsx'))])
    assert result.exit_code != 0


@pytest.mark.parametrize('runs', ['0', 'many'])
def test_cli_replicate_bad_runs(tmpdir, config_file, runs):
    result = CliRunner().invoke(gradid.cli, ['replicate', config_file,
                                             '--campaign-dir',
                                             str(tmpdir.join('c')),
                                             '--runs', runs])
    assert result.exit_code == 2


def test_cli_replicate_overwrite(tmpdir, config_dict):
    runner = CliRunner()
    campaign_dir = str(tmpdir.join('campaign'))
    config_dict['n_samples'] = 500
    config_file = write_config(tmpdir.join('small.txt'), config_dict)
    args = ['replicate', config_file, '--campaign-dir', campaign_dir,
            '--no-progress']

    runner.invoke(gradid.cli, args + ['--runs', '3'], catch_exceptions=False)
    # Asking for fewer runs keeps the stored replications
    result = runner.invoke(gradid.cli, args + ['--runs', '1'],
                           catch_exceptions=False)
    assert 'seeds: [0, 1, 2]' in result.output

    # --overwrite discards them and starts again from seed 0
    result = runner.invoke(gradid.cli, args + ['--runs', '1', '--overwrite'],
                           catch_exceptions=False)
    assert result.exit_code == 0
    assert 'seeds: []' in result.output
    assert gradid.CampaignManager.load(campaign_dir).db.get_seeds() == [0]

    # Another experiment needs --overwrite
    config_dict['n_samples'] = 600
    other_file = write_config(tmpdir.join('other.txt'), config_dict)
    result = runner.invoke(gradid.cli, ['replicate', other_file,
                                        '--campaign-dir', campaign_dir,
                                        '--runs', '1', '--no-progress'])
    assert result.exit_code == 2
    assert 'different experiment' in result.output
