from gradid import ExperimentConfig
from gradid.errors import ConfigError
from gradid.experiment import (ResultRow, coordinates, estimate,
                               oracle_gradient, result_rows, row_passed,
                               variance_rows, z_score)
from gradid.estimators import GradEstimate
import numpy as np
import pytest


def _config(config_dict, **changes):
    config_dict.update(changes)
    return ExperimentConfig.from_dict(config_dict)


##############
# Validation #
##############

def test_valid_configurations(config_dict):
    _config(dict(config_dict))
    _config(dict(config_dict), family='student-t',
            params={'mu': [0.2], 'sigma': [[1.0]], 'beta': 3.0},
            estimators=['gvm-mu', 'gvm-sigma', 'gvm-sigma-marginalized'])
    _config(dict(config_dict), family='ef-bivariate', dim=2,
            params={'lambda': 1.5, 'coupling': 'coupled'},
            h={'name': 'log_sum_exp', 'weights': [-1.0, -1.0]},
            estimators=['implicit-bivariate'])
    # Gaussians accept the mixture estimators through the degenerate law
    _config(dict(config_dict), estimators=['bonnet', 'gvm-mu'])


@pytest.mark.parametrize('changes,message', [
    ({'family': 'cauchy'}, 'Unknown family'),
    ({'dim': 0}, 'dim'),
    ({'n_samples': 1}, 'n_samples'),
    ({'seed': -1}, 'seed'),
    ({'oracle': 'yes'}, 'oracle'),
    ({'estimators': []}, 'estimators'),
    ({'estimators': ['bonnet', 'bonnet']}, 'more than once'),
    ({'estimators': ['implicit']}, 'does not apply'),
    ({'estimators': ['reinforce']}, 'Unknown estimator'),
    ({'params': {'mu': [0.5]}}, 'Missing params'),
    ({'params': {'mu': [0.5], 'sigma': [[1.0]], 'nu': 1}}, 'Unknown params'),
    ({'params': {'mu': [0.5], 'sigma': [[-1.0]]}}, 'NotPositiveDefinite'),
    ({'params': {'mu': [0.5, 0.1], 'sigma': np.eye(2).tolist()}},
     'dimension'),
    ({'h': {'name': 'quadratic'}}, 'Missing h'),
    ({'h': {'name': 'cosine'}}, 'Unknown test function'),
    ({'h': {'name': 'quadratic', 'A': [[1.0, 2.0], [0.0, 1.0]]}},
     'AsymmetricA'),
    ({'h': {'name': 'abs_sum'}}, 'SmoothnessViolation'),
])
def test_invalid_configurations(config_dict, changes, message):
    with pytest.raises(ConfigError, match=message):
        _config(config_dict, **changes)


def test_family_specific_errors(config_dict):
    with pytest.raises(ConfigError, match='NonzeroAlpha'):
        _config(dict(config_dict), family='student-t',
                params={'mu': [0.0], 'sigma': [[1.0]], 'alpha': [0.5],
                        'beta': 3.0},
                estimators=['gvm-mu'])
    with pytest.raises(ConfigError, match='InvalidShape'):
        _config(dict(config_dict), family='nig',
                params={'mu': [0.0], 'sigma': [[1.0]], 'beta': -2.0},
                estimators=['gvm-mu'])
    with pytest.raises(ConfigError, match='DegenerateSkew'):
        _config(dict(config_dict), family='emg',
                params={'mu': [0.0], 'sigma': [[1.0]]},
                estimators=['gvm-mu'])
    with pytest.raises(ConfigError, match='coupling'):
        _config(dict(config_dict), family='ef-bivariate', dim=2,
                params={'lambda': 1.0, 'coupling': 'loose'},
                h={'name': 'log_sum_exp', 'weights': [-1.0, -1.0]},
                estimators=['implicit-bivariate'])
    with pytest.raises(ConfigError, match='Oracles'):
        _config(dict(config_dict), dim=3,
                params={'mu': [0.0] * 3, 'sigma': np.eye(3).tolist()},
                h={'name': 'abs_sum'}, estimators=['bonnet'])


def test_configuration_dictionaries(config, config_dict):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(config_dict, extra=1))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({k: v for k, v in config_dict.items()
                                    if k != 'seed'})

    assert ExperimentConfig.from_dict(config.to_dict()) == config
    other = config.with_seed(5)
    assert other.seed == 5 and other != config
    assert other.with_seed(config.seed) == config


def test_targets(config):
    assert config.targets() == ['mu', 'sigma']
    assert config.shared_targets() == ['mu', 'sigma']
    assert config.with_seed(3).estimator_config().rng.seed == 3


##############
# Evaluation #
##############

def test_estimate_and_oracle(config):
    result = estimate(config, 'bonnet')
    assert result.estimator_id == 'bonnet'
    assert result.n_samples == config.n_samples
    # 2 mu for h = z^2
    assert np.allclose(oracle_gradient(config, 'mu'), [1.0], atol=1e-8)
    assert np.allclose(oracle_gradient(config, 'sigma'), [[1.0]], atol=1e-8)

    with pytest.raises(ValueError):
        estimate(config, 'gvm-mu')


def test_estimates_are_deterministic(config):
    first, second = estimate(config, 'score'), estimate(config, 'score')
    assert np.array_equal(first.estimate, second.estimate)
    assert not np.array_equal(first.estimate,
                              estimate(config.with_seed(2),
                                       'score').estimate)


def test_mixture_alpha_oracle_on_gaussians(config_dict):
    config = _config(config_dict, h={'name': 'quadratic', 'A': [[0.0]],
                                     'b': [1.0]},
                     estimators=['gvm-alpha'])
    # alpha enters through the degenerate law, whose u vanishes
    assert np.allclose(oracle_gradient(config, 'alpha'), [0.0], atol=1e-8)


###############
# Result rows #
###############

def test_coordinates():
    assert coordinates('mu', [1.0, 2.0]) == [('0', 1.0), ('1', 2.0)]
    assert coordinates('lambda_0', [3.0]) == [('0', 3.0)]
    assert [c for c, _ in coordinates('sigma', np.eye(3))] == [
        '0,0', '0,1', '0,2', '1,1', '1,2', '2,2']


def test_result_rows():
    e = GradEstimate('sigma', np.array([[1.0, 0.5], [0.5, 2.0]]),
                     np.array([[0.1, 0.1], [0.1, 0.0]]), 100, 'price')
    rows = result_rows(e)
    assert len(rows) == 3
    assert all(r.oracle is None and r.z_score is None for r in rows)
    assert all(row_passed(r) for r in rows)

    rows = result_rows(e, np.array([[1.2, 0.5], [0.5, 2.0]]))
    assert np.isclose(rows[0].z_score, 2.0)
    assert rows[1].z_score == 0.0
    assert rows[2].z_score == 0.0
    assert all(row_passed(r) for r in rows)

    rows = result_rows(e, np.array([[1.5, 0.5], [0.5, 2.1]]))
    assert not row_passed(rows[0])
    assert rows[2].z_score == float('inf')
    assert not row_passed(rows[2])


def test_oracle_slack():
    row = ResultRow('price', 'sigma', '0,0', 1.0 + 1e-9, 0.0, 1.0, 1e-9,
                    z_score(1e-9, 0.0))
    assert row.z_score == float('inf')
    assert row_passed(row)


def test_variance_rows():
    e = GradEstimate('mu', np.array([0.1, 0.2]), np.array([0.01, 0.0]), 400,
                     'score')
    rows = variance_rows(e)
    assert [r.coord for r in rows] == ['0', '1']
    assert np.isclose(rows[0].variance, 400 * 0.01 ** 2)
    assert rows[1].variance == 0.0
