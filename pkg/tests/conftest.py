import pytest
import shutil
import numpy as np
from gradid import (RandomStream, GaussianParams, GvmParams, ExperimentConfig,
                    CampaignManager)

# Sample size of the statistical tests, checked against a 4 SE band
N_SAMPLES = 200000


@pytest.fixture(scope='function')
def rng():
    return RandomStream(20240917)


@pytest.fixture(scope='function')
def gaussian_1d():
    return GaussianParams([0.3], [[1.0]])


@pytest.fixture(scope='function')
def gaussian_2d():
    return GaussianParams([0.5, -0.2], [[1.0, 0.3], [0.3, 0.8]])


@pytest.fixture(scope='function')
def mixture_2d():
    return GvmParams([0.1, -0.3], [0.4, 0.2], [[1.0, 0.2], [0.2, 0.6]])


@pytest.fixture(scope='function')
def config_dict():
    return {
        'family': 'gaussian',
        'dim': 1,
        'params': {'mu': [0.5], 'sigma': [[1.0]]},
        'h': {'name': 'quadratic', 'A': [[1.0]]},
        'estimators': ['bonnet', 'score', 'price', 'stein-first-order'],
        'n_samples': 20000,
        'seed': 1,
        'oracle': True,
    }


@pytest.fixture(scope='function')
def config(config_dict):
    return ExperimentConfig.from_dict(config_dict)


def write_config(path, d):
    """
    Write a configuration dictionary as a key: literal parameter file.
    """
    with open(str(path), 'w') as f:
        f.write("# Experiment configuration\n")
        for key, value in d.items():
            f.write("%s: %r\n" % (key, value))
    return str(path)


@pytest.fixture(scope='function')
def config_file(tmpdir, config_dict):
    return write_config(tmpdir.join('experiment.txt'), config_dict)


@pytest.fixture(scope='function')
def campaign_dir(tmpdir):
    return str(tmpdir.join('test_campaign'))


@pytest.fixture(scope='function')
def manager(config, campaign_dir):
    return CampaignManager.new(config, campaign_dir)


def assert_within_band(estimate, truth, n_se=4, slack=1e-8):
    """
    Check every coordinate of a GradEstimate against a reference value.
    """
    truth = np.asarray(truth, dtype=float)
    error = np.abs(estimate.estimate - truth)
    band = n_se * estimate.std_error + slack * np.maximum(1, np.abs(truth))
    assert np.all(error <= band), (
        "estimate %s, truth %s, std error %s" %
        (estimate.estimate, truth, estimate.std_error))


############################
# Clean up after each test #
############################

@pytest.fixture(autouse=True, scope='function')
def setup_and_cleanup(tmpdir):
    yield
    shutil.rmtree(str(tmpdir), ignore_errors=True)
