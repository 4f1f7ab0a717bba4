import os
import time
import uuid
from datetime import datetime
from pathlib import Path

import numpy as np
import xarray as xr
from scipy.io import savemat
from tqdm import tqdm

from .database import DatabaseManager
from .experiment import ORACLE_TOL, ResultRow
from .parallelrunner import ParallelRunner
from .runner import ExperimentRunner

# Numeric ResultRow fields exported per row
METRICS = ['estimate', 'std_error', 'oracle', 'abs_error', 'z_score']

RUNNER_TYPES = {cls.__name__: cls for cls in [ExperimentRunner,
                                             ParallelRunner]}


class CampaignManager(object):
    """
    This class can be used as an interface to replicate an experiment over
    many seeds and access the results of the replications.

    The CampaignManager class wraps up a DatabaseManager, which stores the
    experiment configuration and one result entry per seed, and the type of
    runner used to evaluate every replication.
    """

    #######################################
    # Campaign initialization and loading #
    #######################################

    def __init__(self, campaign_db, runner_type='ExperimentRunner'):
        """
        Initialize the manager from a DatabaseManager.

        This method should never be used on its own, but only as a
        constructor from the new and load @classmethods.

        Args:
            campaign_db (DatabaseManager): the DatabaseManager object to
                associate to this campaign.
            runner_type (str): name of the runner class evaluating each seed,
                ExperimentRunner or ParallelRunner.
        """
        if runner_type not in RUNNER_TYPES:
            raise ValueError("Unknown runner type %s (available: %s)" %
                             (runner_type, ', '.join(sorted(RUNNER_TYPES))))
        self.db = campaign_db
        self.runner_type = runner_type
        # Oracles do not depend on the seed: share them across replications
        self.oracles = {}

    @classmethod
    def new(cls, config, campaign_dir, runner_type='ExperimentRunner',
            overwrite=False):
        """
        Create a new campaign replicating an experiment.

        If a campaign already exists in campaign_dir and it replicates the
        same experiment (seed excepted), it is loaded instead, and its stored
        replications are wiped if overwrite is True. A campaign for another
        experiment is only replaced when overwrite is True: the directory is
        then deleted and a new campaign is created in its place.

        Args:
            config (ExperimentConfig): the experiment to replicate.
            campaign_dir (str): path to the directory in which to save the
                campaign database.
            runner_type (str): ExperimentRunner or ParallelRunner.
            overwrite (bool): whether to discard what campaign_dir holds.
                The directory is deleted if and only if it only contains
                files created by gradid.
        """
        if runner_type not in RUNNER_TYPES:
            raise ValueError("Unknown runner type %s (available: %s)" %
                             (runner_type, ', '.join(sorted(RUNNER_TYPES))))
        campaign_dir = os.path.abspath(campaign_dir)

        if Path(campaign_dir).exists():
            try:
                manager = CampaignManager.load(campaign_dir, runner_type)
            except ValueError:
                # Not a campaign: DatabaseManager.new decides if it can go
                if not overwrite:
                    raise
                manager = None
            if manager is not None:
                stored = manager.db.get_config()
                if stored.with_seed(0) == config.with_seed(0):
                    if overwrite:
                        manager.db.wipe_results()
                    return manager
                if not overwrite:
                    raise ValueError("%s holds a campaign for a different "
                                     "experiment" % campaign_dir)
                manager.db.db.close()

        db = DatabaseManager.new(config=config, campaign_dir=campaign_dir,
                                 overwrite=overwrite)
        return cls(db, runner_type)

    @classmethod
    def load(cls, campaign_dir, runner_type='ExperimentRunner'):
        """
        Load an existing campaign.

        Args:
            campaign_dir (str): path to the campaign directory.
            runner_type (str): ExperimentRunner or ParallelRunner.
        """
        campaign_dir = os.path.abspath(campaign_dir)
        db = DatabaseManager.load(campaign_dir)
        return cls(db, runner_type)

    def create_runner(self, config):
        """
        Build a runner of the campaign's type for one replication.
        """
        runner = RUNNER_TYPES[self.runner_type](config)
        runner.oracles = self.oracles
        return runner

    #######################
    # Replication running #
    #######################

    def run_experiments(self, seeds, show_progress=True):
        """
        Run the experiment for every seed in seeds and store the results.

        Note: this function does not verify whether the seeds are already in
        the database; inserting a seed twice raises a ValueError.

        Args:
            seeds (list): seeds to run.
            show_progress (bool): whether or not to show a progress bar with
                percentage and expected remaining time.
        """
        if not seeds:
            return

        config = self.db.get_config()

        def results():
            for seed in seeds:
                start = time.time()
                rows = self.create_runner(config.with_seed(seed)).run(
                    show_progress=False)
                end = time.time()
                yield {
                    'seed': seed,
                    'rows': [r._asdict() for r in rows],
                    'meta': {'elapsed_time': end - start,
                             'id': str(uuid.uuid4())},
                }

        if show_progress:
            result_generator = tqdm(results(), total=len(seeds), unit='run',
                                    desc='Running replications')
        else:
            result_generator = results()

        # Results are saved as they come, so that they are kept even if
        # execution is interrupted
        results_batch = []
        last_save_time = datetime.now()

        for result in result_generator:
            results_batch += [result]
            if (len(results_batch) > 100 or
                    (datetime.now() - last_save_time).total_seconds() > 60):
                self.db.insert_results(results_batch)
                self.db.write_to_disk()
                results_batch = []
                last_save_time = datetime.now()

        self.db.insert_results(results_batch)
        self.db.write_to_disk()

    def get_missing_seeds(self, runs):
        """
        Return the lowest seeds still needed to reach runs replications.
        """
        needed = runs - len(self.db.get_seeds())
        next_seeds = self.db.get_next_seeds()
        return [next(next_seeds) for _ in range(max(0, needed))]

    def run_missing_experiments(self, runs, show_progress=True):
        """
        Make sure the campaign holds at least runs replications, running the
        missing ones with the lowest free seeds.
        """
        self.run_experiments(self.get_missing_seeds(runs), show_progress)

    #####################
    # Result management #
    #####################

    def get_row_labels(self):
        """
        Labels 'estimator_id:target:coord' of the rows of every replication.
        """
        results = self.db.get_results()
        if not results:
            return []
        return ["%s:%s:%s" % (r['estimator_id'], r['target'], r['coord'])
                for r in results[0]['rows']]

    def get_results_as_numpy_array(self):
        """
        Return the results as an array of shape (seeds, rows, metrics).
        Missing oracle fields are NaN.
        """
        return np.array([
            [[np.nan if row[m] is None else row[m] for m in METRICS]
             for row in result['rows']]
            for result in self.db.get_results()], dtype=float).reshape(
                len(self.db.get_seeds()), len(self.get_row_labels()),
                len(METRICS))

    def get_results_as_xarray(self):
        """
        Return the results as a DataArray with dimensions seed, row and
        metric.
        """
        return xr.DataArray(self.get_results_as_numpy_array(),
                            coords={'seed': self.db.get_seeds(),
                                    'row': self.get_row_labels(),
                                    'metric': METRICS},
                            dims=['seed', 'row', 'metric'])

    def save_to_npy_file(self, filename):
        """
        Save the (seed, row, metric) array to a numpy array file.
        """
        np.save(filename, self.get_results_as_numpy_array())

    def save_to_mat_file(self, filename):
        """
        Save the (seed, row, metric) array to a .mat file, together with the
        labels of its dimensions.
        """
        return savemat(
            filename,
            {'results': self.get_results_as_numpy_array(),
             'seeds': np.array(self.db.get_seeds(), dtype=float),
             'rows': np.array(self.get_row_labels()),
             'metrics': np.array(METRICS)})

    def coverage(self):
        """
        Fraction of seeds for which each row passes its oracle check, as a
        DataArray over rows. Rows without oracle are NaN.
        """
        results = self.get_results_as_xarray()
        error = results.sel(metric='abs_error')
        band = (4 * results.sel(metric='std_error') + ORACLE_TOL *
                np.maximum(1.0, abs(results.sel(metric='oracle'))))
        within = (error <= band).astype(float)
        return within.where(error.notnull()).mean('seed')

    def get_rows(self, seed):
        """
        The ResultRows stored for a seed.
        """
        results = self.db.get_results(seed=seed)
        if not results:
            raise ValueError("No result for seed %s" % seed)
        return [ResultRow(**row) for row in results[0]['rows']]

    #############
    # Utilities #
    #############

    def __str__(self):
        """
        Return a human-readable representation of the campaign.
        """
        return "--- Campaign info ---\n%s\nRunner type: %s\n-----------" % (
            self.db, self.runner_type)
