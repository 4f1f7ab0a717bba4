from .numerics import RandomStream
from .distributions import (GaussianParams, GvmParams, gaussian_sample,
                            gvm_sample, mixing_spec)
from .testfns import abs_sum, log_sum_exp, quadratic
from .estimators import EstimatorConfig, GradEstimate
from .oracle import QuadratureSpec
from .experiment import ExperimentConfig, ResultRow
from .runner import ExperimentRunner
from .parallelrunner import ParallelRunner
from .database import DatabaseManager
from .manager import CampaignManager
from . import (densities, ef, errors, estimators, experiment, oracle,
               parallelrunner, manager, utils)
from .cli import cli

__all__ = ('RandomStream', 'GaussianParams', 'GvmParams', 'gaussian_sample',
           'gvm_sample', 'mixing_spec', 'quadratic', 'abs_sum', 'log_sum_exp',
           'EstimatorConfig', 'GradEstimate', 'QuadratureSpec',
           'ExperimentConfig', 'ResultRow', 'ExperimentRunner',
           'ParallelRunner', 'DatabaseManager', 'CampaignManager', 'cli')

name = 'gradid'
