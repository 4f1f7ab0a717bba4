import glob
import itertools
import os
import shutil
from copy import deepcopy
from pathlib import Path
from pprint import pformat

from tinydb import TinyDB, where
from tinydb.middlewares import CachingMiddleware
from tinydb.storages import JSONStorage

from .experiment import ExperimentConfig, ResultRow


class DatabaseManager(object):
    """
    This serves as an interface with the replication campaign database.

    The database holds one configuration entry (the experiment whose seeds
    are being replicated) and one result entry per seed. A database can
    either be created from scratch or loaded, via the new and load
    @classmethods.
    """

    ##################
    # Initialization #
    ##################

    def __init__(self, db, campaign_dir):
        """
        Initialize the DatabaseManager with a TinyDB instance.

        This function assumes that the DB is already complete with a config
        entry, as created by the new and load classmethods, and should not be
        called directly. Use the CampaignManager.new() and
        CampaignManager.load() facilities instead.
        """
        self.campaign_dir = campaign_dir
        self.db = db

    @classmethod
    def new(cls, config, campaign_dir, overwrite=False):
        """
        Initialize a new class instance with a set configuration and filename.

        The created database has the same name of the campaign directory.

        Args:
            config (ExperimentConfig): the experiment replicated in this
                campaign. Its seed is ignored: the campaign picks seeds.
            campaign_dir (str): The path of the directory where to save the
                DB.
            overwrite (bool): Whether or not existing directories should be
                overwritten.
        """

        # We only accept absolute paths
        if not Path(campaign_dir).is_absolute():
            raise ValueError("Path is not absolute")

        # Make sure the directory does not exist already
        if Path(campaign_dir).exists() and not overwrite:
            raise FileExistsError("The specified directory already exists")
        elif Path(campaign_dir).exists() and overwrite:
            # Verify we are not deleting files belonging to the user
            campaign_dir_name = os.path.basename(campaign_dir)
            folder_contents = set(os.listdir(campaign_dir))
            allowed_files = set(
                ['%s.json' % campaign_dir_name] +
                # Allow hidden files (like .DS_STORE in macos)
                [os.path.basename(os.path.normpath(f)) for f in
                 glob.glob(os.path.join(campaign_dir, ".*"))])

            if not folder_contents.issubset(allowed_files):
                raise ValueError("The specified directory cannot be "
                                 "overwritten because it contains user "
                                 "files.")
            # This operation destroys data.
            shutil.rmtree(campaign_dir)

        os.makedirs(campaign_dir)
        tinydb = TinyDB(os.path.join(campaign_dir, "%s.json" %
                                     os.path.basename(campaign_dir)),
                        storage=CachingMiddleware(JSONStorage))

        tinydb.table('config').insert({'experiment': config.to_dict()})
        tinydb.storage.flush()

        return cls(tinydb, campaign_dir)

    @classmethod
    def load(cls, campaign_dir):
        """
        Initialize from an existing database.

        It is assumed that the database json file has the same name as its
        containing folder.

        Args:
            campaign_dir (str): The path to the campaign directory.
        """

        # We only accept absolute paths
        if not Path(campaign_dir).is_absolute():
            raise ValueError("Path is not absolute")

        # Verify file exists
        if not Path(campaign_dir).exists():
            raise ValueError("Directory does not exist")

        filename = "%s.json" % os.path.split(campaign_dir)[1]
        filepath = os.path.join(campaign_dir, filename)
        if not Path(filepath).exists():
            raise ValueError("Specified campaign directory seems corrupt")

        tinydb = TinyDB(filepath, storage=CachingMiddleware(JSONStorage))
        configs = tinydb.table('config').all()
        if len(configs) != 1 or set(configs[0].keys()) != {'experiment'}:
            tinydb.close()
            raise ValueError("Specified campaign directory seems corrupt")

        return cls(tinydb, campaign_dir)

    ###################
    # Database access #
    ###################

    def write_to_disk(self):
        self.db.storage.flush()

    def get_config(self):
        """
        Return the ExperimentConfig replicated by this campaign.
        """
        return ExperimentConfig.from_dict(
            dict(self.db.table('config').all()[0])['experiment'])

    def get_seeds(self):
        """
        Return the sorted seeds for which results are available.
        """
        return sorted(r['seed'] for r in self.get_results())

    def get_next_seeds(self):
        """
        Yield the lowest seeds that have no result yet.
        """
        yield from DatabaseManager.get_next_values(self.get_seeds())

    def insert_results(self, results):
        """
        Insert new results in the database.

        Every result is verified to have the following structure::

            {
                'seed': value1,
                'rows': [row1, row2, ...],
                'meta': {
                          'elapsed_time': value2,
                          'id': value3
                        }
            }

        where every row is a dictionary with the ResultRow fields.
        """
        seeds = [r.get('seed') for r in results]
        if len(set(seeds)) != len(seeds):
            raise ValueError("Results repeat a seed: %s" % seeds)
        for result in results:
            self.check_result(result)
        self.db.table('results').insert_multiple(deepcopy(results))

    def check_result(self, result):
        example_result = {
            'seed': 0,
            'rows': [],
            'meta': {k: '...' for k in ['elapsed_time', 'id']},
        }
        if not DatabaseManager.have_same_structure(result, example_result):
            raise ValueError(
                '%s:\nExpected: %s\nGot: %s' % (
                    "Result dictionary does not correspond to database "
                    "format",
                    pformat(example_result, depth=1),
                    pformat(result, depth=1)))
        if result['seed'] in self.get_seeds():
            raise ValueError("A result for seed %s already exists" %
                             result['seed'])
        for row in result['rows']:
            if set(row.keys()) != set(ResultRow._fields):
                raise ValueError("Row %s does not have the ResultRow fields"
                                 % row)

    def get_results(self, seed=None):
        """
        Return the results available in the database, optionally restricted
        to a seed or list of seeds, sorted by seed.
        """
        if seed is None:
            results = self.db.table('results').all()
        else:
            seeds = seed if isinstance(seed, list) else [seed]
            results = self.db.table('results').search(
                where('seed').one_of(seeds))
        return sorted([dict(r) for r in results], key=lambda r: r['seed'])

    def wipe_results(self):
        """
        Remove all results from the database. This cannot be undone.
        """
        self.db.drop_table('results')
        self.write_to_disk()

    #############
    # Utilities #
    #############

    def __str__(self):
        """
        Represent the database object as a human-readable string.
        """
        config = self.get_config()
        return "family: %s\nh: %s\nestimators: %s\nseeds: %s" % (
            config.family, config.h['name'], config.estimators,
            self.get_seeds())

    @staticmethod
    def get_next_values(values_list):
        """
        Given a list of integers, this method yields the lowest integers that
        do not appear in the list.

        >>> from itertools import islice
        >>> v = [0, 1, 3, 4]
        >>> list(islice(DatabaseManager.get_next_values(v), 3))
        [2, 5, 6]
        """
        yield from filter(lambda x: x not in values_list, itertools.count())

    @staticmethod
    def have_same_structure(d1, d2):
        """
        Given two dictionaries (possibly with other nested dictionaries as
        values), this function checks whether they have the same key structure.

        >>> d1 = {'a': 1, 'b': 2}
        >>> d2 = {'a': [], 'b': 3}
        >>> d3 = {'a': 4, 'c': 5}
        >>> DatabaseManager.have_same_structure(d1, d2)
        True
        >>> DatabaseManager.have_same_structure(d1, d3)
        False

        >>> d4 = {'a': {'c': 1}, 'b': 2}
        >>> d5 = {'a': {'c': 3}, 'b': 4}
        >>> d6 = {'a': {'c': 5, 'd': 6}, 'b': 7}
        >>> DatabaseManager.have_same_structure(d1, d4)
        False
        >>> DatabaseManager.have_same_structure(d4, d5)
        True
        >>> DatabaseManager.have_same_structure(d4, d6)
        False
        """
        # Keys of this level are the same
        if set(d1.keys()) != set(d2.keys()):
            return False

        # Check nested dictionaries
        for k in d1.keys():
            # If one of the values is a dictionary and the other is not
            if isinstance(d1[k], dict) != isinstance(d2[k], dict):
                return False
            # If both are dictionaries, recur
            elif isinstance(d1[k], dict) and isinstance(d2[k], dict):
                if not DatabaseManager.have_same_structure(d1[k], d2[k]):
                    return False

        return True
