from multiprocessing import Pool

from .experiment import ExperimentConfig, estimate
from .runner import ExperimentRunner

MAX_PARALLEL_PROCESSES = None  # If None, the number of CPUs is used


def launch_estimator(task):
    """
    Run a single estimator from a (configuration dictionary, estimator id)
    pair. Defined at module level so that worker processes can unpickle it.
    """
    config, estimator_id = task
    return estimate(ExperimentConfig.from_dict(config), estimator_id)


class ParallelRunner(ExperimentRunner):

    """
    A Runner which evaluates estimators in parallel on the current machine.

    Every estimator takes its draws from the configuration's stream only, and
    results are collected in submission order, so the output is identical to
    the one of ExperimentRunner.
    """
    def run_estimates(self, estimator_ids):
        """
        Run several estimators in parallel, yielding GradEstimates in the
        given order.

        Args:
            estimator_ids (list): ids of the estimators to run.
        """
        tasks = [(self.config.to_dict(), e) for e in estimator_ids]
        with Pool(processes=MAX_PARALLEL_PROCESSES) as pool:
            for result in pool.imap(launch_estimator, tasks):
                yield result
