import logging

from tqdm import tqdm

from . import oracle
from .errors import ConfigError, NotConverged
from .experiment import (ESTIMATORS, estimate, oracle_gradient, result_rows,
                         variance_rows)

logger = logging.getLogger(__name__)

# Largest standard error accepted for Price on quadratic integrands
EXACTNESS_TOL = 1e-12


class ExperimentRunner(object):
    """
    The class tasked with running the estimators of an experiment and
    comparing them with their oracles.

    Estimators are evaluated one after the other, in configuration order.
    Oracles are computed once per target and cached.
    """

    def __init__(self, config, spec=oracle.DEFAULT_SPEC):
        """
        Args:
            config (ExperimentConfig): the experiment to run.
            spec (QuadratureSpec): settings of the quadrature oracles.
        """
        self.config = config
        self.spec = spec
        self.oracles = {}

    #####################
    # Estimator running #
    #####################

    def run_estimates(self, estimator_ids):
        """
        Run several estimators, yielding GradEstimates in the given order.
        """
        for estimator_id in estimator_ids:
            yield estimate(self.config, estimator_id)

    def _progress(self, estimates, total, show_progress):
        if not show_progress:
            return estimates
        return tqdm(estimates, total=total, unit='estimator',
                    desc='Running estimators')

    def oracle(self, target):
        """
        Ground-truth gradient of a target, computed on first use.
        """
        if target not in self.oracles:
            try:
                self.oracles[target] = oracle_gradient(self.config, target,
                                                       self.spec)
            except NotConverged as e:
                logger.warning("Oracle for %s failed: %s", target, e)
                raise
        return self.oracles[target]

    def run(self, show_progress=True):
        """
        Run every estimator of the configuration.

        Returns:
            A list of ResultRows, one per estimator and coordinate, in
            configuration order. Oracle fields are filled when the
            configuration asks for oracles.
        """
        estimates = self._progress(self.run_estimates(self.config.estimators),
                                   len(self.config.estimators), show_progress)
        rows = []
        for e in estimates:
            truth = self.oracle(e.target) if self.config.oracle else None
            rows += result_rows(e, truth)
        return rows

    def compare_variance(self, show_progress=True):
        """
        Per-sample variances of the estimators that share a target with at
        least another estimator. All of them draw from the same stream.

        Raises:
            ConfigError: if no two estimators share a target.
        """
        shared = self.config.shared_targets()
        if not shared:
            raise ConfigError("compare-variance needs at least two "
                              "estimators with a common target")
        estimator_ids = [e for e in self.config.estimators
                         if ESTIMATORS[e].target in shared]
        estimates = self._progress(self.run_estimates(estimator_ids),
                                   len(estimator_ids), show_progress)
        rows = []
        for e in estimates:
            rows += variance_rows(e)
        return rows

    def exactness_violations(self, rows):
        """
        Rows where Price on a quadratic integrand has a standard error above
        EXACTNESS_TOL.
        """
        if self.config.h['name'] != 'quadratic':
            return []
        return [r for r in rows
                if r.estimator_id == 'price' and r.std_error > EXACTNESS_TOL]
