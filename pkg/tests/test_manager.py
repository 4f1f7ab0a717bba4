import gradid
from gradid.experiment import ExperimentConfig
import os
import pytest
import numpy as np


@pytest.fixture(scope='function')
def result():
    row = gradid.ResultRow('bonnet', 'mu', '0', 1.01, 0.01, 1.0, 0.01, 1.0)
    return {
        'seed': 7,
        'rows': [row._asdict()],
        'meta': {'elapsed_time': 0.5, 'id': 'a1b2'},
    }


##################################
# Campaign creation from scratch #
##################################


def test_campaign_creation(config, campaign_dir):
    manager = gradid.CampaignManager.new(config, campaign_dir)
    assert manager.runner_type == 'ExperimentRunner'
    with pytest.raises(ValueError):
        gradid.CampaignManager.new(config, campaign_dir + '-other',
                                   runner_type='GridRunner')


def test_new_campaign_reload(config, manager, campaign_dir, result):
    # Insert a result in the already available CampaignManager
    manager.db.insert_results([result])
    manager.db.write_to_disk()

    # The seed does not take part in the comparison
    new_campaign = gradid.CampaignManager.new(config.with_seed(99),
                                              campaign_dir, overwrite=False)

    # Result should still be there
    assert new_campaign.db.get_results()[0] == result


def test_new_campaign_reload_fail(config_dict, manager, campaign_dir):
    # A campaign for another experiment lives in the same directory
    config_dict['n_samples'] = 500
    with pytest.raises(ValueError):
        gradid.CampaignManager.new(ExperimentConfig.from_dict(config_dict),
                                   campaign_dir, overwrite=False)


def test_new_campaign_reload_overwrite(config, manager, campaign_dir,
                                       result):
    manager.db.insert_results([result])
    manager.db.write_to_disk()

    new_campaign = gradid.CampaignManager.new(config, campaign_dir,
                                              overwrite=True)

    # There should be no results
    assert len(new_campaign.db.get_results()) == 0
    assert gradid.CampaignManager.load(campaign_dir).db.get_seeds() == []


def test_new_campaign_overwrite_other_experiment(config_dict, manager,
                                                 campaign_dir, result):
    manager.db.insert_results([result])
    manager.db.write_to_disk()

    config_dict['n_samples'] = 500
    other = ExperimentConfig.from_dict(config_dict)
    new_campaign = gradid.CampaignManager.new(other, campaign_dir,
                                              overwrite=True)
    assert new_campaign.db.get_config() == other
    assert new_campaign.db.get_results() == []

    # User files are never deleted
    with open(os.path.join(campaign_dir, 'notes.txt'), 'w') as f:
        f.write("Precious content")
    config_dict['n_samples'] = 600
    with pytest.raises(ValueError):
        gradid.CampaignManager.new(ExperimentConfig.from_dict(config_dict),
                                   campaign_dir, overwrite=True)


def test_load_campaign(manager, config, campaign_dir):
    loaded_manager = gradid.CampaignManager.load(campaign_dir)
    assert loaded_manager.db.get_config() == config
    assert 'Runner type: ExperimentRunner' in str(loaded_manager)


########################
# Running replications #
########################

def test_run_missing_experiments(manager):
    manager.run_missing_experiments(3, show_progress=False)
    assert manager.db.get_seeds() == [0, 1, 2]

    # Nothing left to do
    assert manager.get_missing_seeds(3) == []
    manager.run_missing_experiments(2, show_progress=False)
    assert manager.db.get_seeds() == [0, 1, 2]

    manager.run_missing_experiments(4, show_progress=False)
    assert manager.db.get_seeds() == [0, 1, 2, 3]

    # Oracles were computed once and shared by every replication
    assert set(manager.oracles) == {'mu', 'sigma'}


def test_replications_match_single_runs(manager, config):
    manager.run_experiments([5], show_progress=False)
    expected = gradid.ExperimentRunner(config.with_seed(5)).run(
        show_progress=False)
    assert manager.get_rows(5) == expected

    with pytest.raises(ValueError):
        manager.get_rows(6)
    with pytest.raises(ValueError):
        manager.run_experiments([5], show_progress=False)


def test_parallel_campaigns(config, campaign_dir):
    manager = gradid.CampaignManager.new(config, campaign_dir,
                                         runner_type='ParallelRunner')
    manager.run_experiments([0], show_progress=False)
    expected = gradid.ExperimentRunner(config.with_seed(0)).run(
        show_progress=False)
    assert manager.get_rows(0) == expected


######################
# Result exportation #
######################

def test_get_results_as_numpy_array(manager):
    manager.run_missing_experiments(2, show_progress=False)
    results = manager.get_results_as_numpy_array()
    assert results.shape == (2, 4, 5)
    assert manager.get_row_labels() == [
        'bonnet:mu:0', 'score:mu:0', 'price:sigma:0,0',
        'stein-first-order:sigma:0,0']


def test_get_results_as_xarray(manager):
    manager.run_missing_experiments(2, show_progress=False)
    results = manager.get_results_as_xarray()
    assert list(results.dims) == ['seed', 'row', 'metric']
    assert list(results.coords['seed'].values) == [0, 1]
    # Price does not depend on the seed on quadratics
    price = results.sel(row='price:sigma:0,0', metric='estimate')
    assert np.allclose(price.values, 1.0, atol=1e-12)


def test_coverage(manager):
    manager.run_missing_experiments(3, show_progress=False)
    coverage = manager.coverage()
    assert coverage.sel(row='price:sigma:0,0') == 1.0
    assert np.all((coverage.values >= 0) & (coverage.values <= 1))


def test_coverage_without_oracles(config_dict, campaign_dir):
    config_dict['oracle'] = False
    manager = gradid.CampaignManager.new(
        ExperimentConfig.from_dict(config_dict), campaign_dir)
    manager.run_missing_experiments(1, show_progress=False)
    assert np.all(np.isnan(manager.coverage().values))
    assert np.all(np.isnan(manager.get_results_as_numpy_array()[:, :, 2:]))


def test_save_to_files(manager, tmpdir):
    manager.run_missing_experiments(2, show_progress=False)

    npy = str(tmpdir.join('results.npy'))
    manager.save_to_npy_file(npy)
    assert np.array_equal(np.load(npy), manager.get_results_as_numpy_array())

    mat = str(tmpdir.join('results.mat'))
    manager.save_to_mat_file(mat)
    assert os.path.exists(mat)
