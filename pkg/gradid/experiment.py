"""
Experiment configurations and result rows.

An ExperimentConfig names a family of distributions with its parameters, an
integrand h, a list of estimators and the sampling settings. This module
validates it, builds the objects it describes, evaluates single estimators
and their oracles, and flattens estimates into ResultRow records.
"""
import collections
import copy
import logging

import numpy as np

from . import estimators, oracle, testfns
from .densities import gvm_logpdf, u_decomposition, v_decomposition
from .distributions import (DegenerateMixing, GaussianParams, GvmParams,
                            mixing_spec)
from .ef import BIVARIATE_COUPLINGS, Exponential, Gamma
from .errors import ConfigError
from .numerics import RandomStream

logger = logging.getLogger(__name__)

MIXTURE_FAMILIES = collections.OrderedDict([
    ('skew-gaussian', 'half-normal-abs'),
    ('emg', 'exponential-1'),
    ('student-t', 'inv-gamma'),
    ('nig', 'inv-gauss'),
])

EF_FAMILIES = ['ef-exponential', 'ef-gamma', 'ef-bivariate']

FAMILIES = ['gaussian'] + list(MIXTURE_FAMILIES) + EF_FAMILIES

TEST_FUNCTIONS = {
    'quadratic': (testfns.quadratic, {'A'}, {'b', 'c'}),
    'abs_sum': (testfns.abs_sum, set(), set()),
    'log_sum_exp': (testfns.log_sum_exp, {'weights'}, set()),
}

Estimator = collections.namedtuple('Estimator',
                                   ['target', 'kind', 'second_order'])

# kind: which families an estimator accepts
ESTIMATORS = collections.OrderedDict([
    ('score', Estimator('mu', 'gaussian', False)),
    ('bonnet', Estimator('mu', 'gaussian', False)),
    ('stein-first-order', Estimator('sigma', 'gaussian', False)),
    ('price', Estimator('sigma', 'gaussian', True)),
    ('gvm-mu', Estimator('mu', 'mixture', False)),
    ('gvm-alpha', Estimator('alpha', 'mixture', False)),
    ('gvm-alpha-marginalized', Estimator('alpha', 'mixture', False)),
    ('gvm-sigma', Estimator('sigma', 'mixture', True)),
    ('gvm-sigma-first-order', Estimator('sigma', 'mixture', False)),
    ('gvm-sigma-marginalized', Estimator('sigma', 'mixture', True)),
    ('implicit', Estimator('lambda_0', 'ef', False)),
    ('implicit-bivariate', Estimator('lambda_0', 'ef-bivariate', False)),
])

FAMILY_KINDS = dict(
    [('gaussian', ['gaussian', 'mixture'])] +
    [(f, ['mixture']) for f in MIXTURE_FAMILIES] +
    [('ef-exponential', ['ef']), ('ef-gamma', ['ef']),
     ('ef-bivariate', ['ef-bivariate'])])

REQUIRED_KEYS = ['family', 'dim', 'params', 'h', 'estimators', 'n_samples',
                 'seed', 'oracle']
OPTIONAL_KEYS = {'symmetrize_sigma': True}

FAMILY_PARAMS = dict(
    [('gaussian', ({'mu', 'sigma'}, set()))] +
    [(f, ({'mu', 'sigma'}, {'alpha'})) for f in ['skew-gaussian', 'emg']] +
    [(f, ({'mu', 'sigma', 'beta'}, {'alpha'})) for f in ['student-t',
                                                          'nig']] +
    [('ef-exponential', ({'lambda'}, set())),
     ('ef-gamma', ({'lambda'}, {'shape'})),
     ('ef-bivariate', ({'lambda'}, {'coupling'}))])

# Oracle slack added to the 4-SE band, relative to max(1, |oracle|)
ORACLE_TOL = 1e-8

ResultRow = collections.namedtuple(
    'ResultRow', ['estimator_id', 'target', 'coord', 'estimate', 'std_error',
                  'oracle', 'abs_error', 'z_score'])

VarianceRow = collections.namedtuple(
    'VarianceRow', ['estimator_id', 'target', 'coord', 'variance',
                    'std_error'])


def _check_keys(what, given, required, optional):
    missing = required - set(given)
    unknown = set(given) - required - set(optional)
    if missing:
        raise ConfigError("Missing %s key(s): %s" %
                          (what, ', '.join(sorted(missing))))
    if unknown:
        raise ConfigError("Unknown %s key(s): %s" %
                          (what, ', '.join(sorted(unknown))))


class ExperimentConfig(object):
    """
    A validated experiment description.

    Configurations are usually read from a parameter file, one
    key: literal pair per line::

        family: 'gaussian'
        dim: 1
        params: {'mu': [0.5], 'sigma': [[1.0]]}
        h: {'name': 'quadratic', 'A': [[1.0]]}
        estimators: ['bonnet', 'score', 'price', 'stein-first-order']
        n_samples: 200000
        seed: 1
        oracle: True

    Raises:
        ConfigError: on missing or unknown keys, malformed values,
            incompatible family/estimator/integrand combinations, and
            parameters rejected by the distribution constructors.
    """

    def __init__(self, family, dim, params, h, estimators, n_samples, seed,
                 oracle, symmetrize_sigma=True):
        self.family = family
        self.dim = dim
        self.params = copy.deepcopy(params)
        self.h = copy.deepcopy(h)
        self.estimators = list(estimators)
        self.n_samples = n_samples
        self.seed = seed
        self.oracle = oracle
        self.symmetrize_sigma = symmetrize_sigma
        self.validate()

    @classmethod
    def from_dict(cls, d):
        """
        Build a configuration from a dictionary with the exact field names.
        """
        if not isinstance(d, dict):
            raise ConfigError("Configuration must be a dictionary")
        _check_keys('configuration', d, set(REQUIRED_KEYS), OPTIONAL_KEYS)
        return cls(**d)

    @classmethod
    def from_file(cls, filename):
        """
        Read a configuration from a key: literal parameter file.
        """
        from .utils import import_parameters_from_file
        return cls.from_dict(import_parameters_from_file(filename))

    def to_dict(self):
        d = {k: copy.deepcopy(getattr(self, k)) for k in REQUIRED_KEYS}
        d['symmetrize_sigma'] = self.symmetrize_sigma
        return d

    def with_seed(self, seed):
        """
        A copy of this configuration with another seed.
        """
        d = self.to_dict()
        d['seed'] = seed
        return ExperimentConfig.from_dict(d)

    def __eq__(self, other):
        return (isinstance(other, ExperimentConfig) and
                self.to_dict() == other.to_dict())

    def __repr__(self):
        return "ExperimentConfig(%s)" % ', '.join(
            "%s=%r" % (k, v) for k, v in sorted(self.to_dict().items()))

    ##############
    # Validation #
    ##############

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError("Unknown family %s (available: %s)" %
                              (self.family, ', '.join(FAMILIES)))
        if (isinstance(self.dim, bool) or not isinstance(self.dim, int) or
                self.dim < 1):
            raise ConfigError("dim must be a positive integer")
        if self.family in ['ef-exponential', 'ef-gamma'] and self.dim != 1:
            raise ConfigError("%s has dim 1" % self.family)
        if self.family == 'ef-bivariate' and self.dim != 2:
            raise ConfigError("ef-bivariate has dim 2")
        if (isinstance(self.n_samples, bool) or
                not isinstance(self.n_samples, int) or self.n_samples < 2):
            raise ConfigError("n_samples must be an integer >= 2")
        if (isinstance(self.seed, bool) or not isinstance(self.seed, int) or
                not 0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if not isinstance(self.oracle, bool):
            raise ConfigError("oracle must be True or False")
        if not isinstance(self.symmetrize_sigma, bool):
            raise ConfigError("symmetrize_sigma must be True or False")
        if self.oracle and self.dim > 2:
            raise ConfigError("Oracles are only available for dim <= 2")

        if not isinstance(self.params, dict):
            raise ConfigError("params must be a dictionary")
        required, optional = FAMILY_PARAMS[self.family]
        _check_keys('params', self.params, required, optional)
        if not isinstance(self.h, dict) or 'name' not in self.h:
            raise ConfigError("h must be a dictionary with a name")
        if self.h['name'] not in TEST_FUNCTIONS:
            raise ConfigError("Unknown test function %s (available: %s)" %
                              (self.h['name'],
                               ', '.join(sorted(TEST_FUNCTIONS))))
        _, h_required, h_optional = TEST_FUNCTIONS[self.h['name']]
        _check_keys('h', self.h, h_required | {'name'}, h_optional)

        if not isinstance(self.estimators, list) or not self.estimators:
            raise ConfigError("estimators must be a non-empty list")
        for estimator_id in self.estimators:
            if estimator_id not in ESTIMATORS:
                raise ConfigError("Unknown estimator %s (available: %s)" %
                                  (estimator_id, ', '.join(ESTIMATORS)))
            if ESTIMATORS[estimator_id].kind not in FAMILY_KINDS[self.family]:
                raise ConfigError("Estimator %s does not apply to family %s" %
                                  (estimator_id, self.family))
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("Estimators are listed more than once")

        # Build everything once, turning constructor errors into ConfigError
        try:
            h = self.test_function()
            h.check_dim(self.dim)
            self.distribution()
            for estimator_id in self.estimators:
                if ESTIMATORS[estimator_id].second_order:
                    testfns.requires_hessian(h)
                if estimator_id.endswith('-marginalized'):
                    self.decomposition(estimator_id)
        except ConfigError:
            raise
        except (ValueError, ArithmeticError, TypeError) as e:
            raise ConfigError("%s: %s" % (type(e).__name__, e))

    ############
    # Builders #
    ############

    def test_function(self):
        builder, _, _ = TEST_FUNCTIONS[self.h['name']]
        kwargs = {k: v for k, v in self.h.items() if k != 'name'}
        if self.h['name'] == 'abs_sum':
            kwargs['dim'] = self.dim
        return builder(**kwargs)

    def distribution(self):
        """
        The distribution of the configuration: GaussianParams for the
        gaussian family, (GvmParams, MixingSpec) for mixtures, a
        UnivariateEf or a BivariateEfMixture for the exponential families.
        """
        p = self.params
        if self.family == 'gaussian':
            g = GaussianParams(p['mu'], p['sigma'])
        elif self.family in MIXTURE_FAMILIES:
            g = GvmParams(p['mu'], p.get('alpha'), p['sigma'])
            m = mixing_spec(MIXTURE_FAMILIES[self.family], p.get('beta'))
            # Density probe: rejects degenerate skews and skewed Student's t
            gvm_logpdf(g, m, g.mu[None, :])
            self._check_dim(g.dim)
            return g, m
        elif self.family == 'ef-exponential':
            return Exponential(p['lambda'])
        elif self.family == 'ef-gamma':
            return Gamma(p['lambda'], p.get('shape', 2.0))
        else:
            coupling = p.get('coupling', 'coupled')
            if coupling not in BIVARIATE_COUPLINGS:
                raise ConfigError("Unknown coupling %s (available: %s)" %
                                  (coupling,
                                   ', '.join(sorted(BIVARIATE_COUPLINGS))))
            return BIVARIATE_COUPLINGS[coupling](p['lambda'])
        self._check_dim(g.dim)
        return g

    def _check_dim(self, d):
        if d != self.dim:
            raise ConfigError("Parameters have dimension %s, dim is %s" %
                              (d, self.dim))

    def mixture(self):
        """
        (GvmParams, MixingSpec) of the configuration. The gaussian family is
        the mixture with the degenerate mixing law.
        """
        if self.family == 'gaussian':
            g = self.distribution()
            return GvmParams(g.mu, None, g.sigma), DegenerateMixing()
        return self.distribution()

    def decomposition(self, estimator_id):
        p, m = self.mixture()
        if ESTIMATORS[estimator_id].target == 'alpha':
            return u_decomposition(p, m)
        return v_decomposition(p, m)

    def estimator_config(self):
        return estimators.EstimatorConfig(self.n_samples,
                                          RandomStream(self.seed, 0),
                                          self.symmetrize_sigma)

    def targets(self):
        """
        Targets in order of first appearance among the estimators.
        """
        return list(collections.OrderedDict(
            (ESTIMATORS[e].target, None) for e in self.estimators))

    def shared_targets(self):
        """
        Targets addressed by at least two estimators.
        """
        counts = collections.Counter(ESTIMATORS[e].target
                                     for e in self.estimators)
        return [t for t in self.targets() if counts[t] >= 2]


##############
# Evaluation #
##############

def estimate(config, estimator_id):
    """
    Run one estimator of the configuration.

    Returns:
        A GradEstimate whose estimator_id is the configured id.
    """
    if estimator_id not in config.estimators:
        raise ValueError("Estimator %s is not part of the configuration" %
                         estimator_id)
    h = config.test_function()
    cfg = config.estimator_config()
    kind = ESTIMATORS[estimator_id].kind
    logger.info("Running %s on %s (N = %s)", estimator_id, config.family,
                config.n_samples)

    if kind == 'gaussian':
        p = config.distribution()
        result = {
            'score': estimators.score_grad_mu,
            'bonnet': estimators.bonnet_grad_mu,
            'stein-first-order': estimators.stein_first_order_sigma,
            'price': estimators.price_grad_sigma,
        }[estimator_id](p, h, cfg)
    elif kind == 'mixture':
        p, m = config.mixture()
        if estimator_id == 'gvm-mu':
            result = estimators.gvm_grad_mu(p, m, h, cfg)
        elif estimator_id == 'gvm-alpha':
            result = estimators.gvm_grad_alpha(p, m, h, cfg)
        elif estimator_id == 'gvm-alpha-marginalized':
            result = estimators.gvm_grad_alpha_marginalized(
                p, config.decomposition(estimator_id), h, cfg)
        elif estimator_id == 'gvm-sigma':
            result = estimators.gvm_grad_sigma(p, m, h, cfg)
        elif estimator_id == 'gvm-sigma-first-order':
            result = estimators.gvm_grad_sigma(p, m, h, cfg,
                                               mode='first-order')
        else:
            result = estimators.gvm_grad_sigma_marginalized(
                p, config.decomposition(estimator_id), h, cfg)
    elif kind == 'ef':
        result = estimators.implicit_grad_1d(config.distribution(), 0, h, cfg)
    else:
        result = estimators.implicit_grad_bivariate(config.distribution(), 0,
                                                    h, cfg)
    return result._replace(estimator_id=estimator_id)


def oracle_gradient(config, target, spec=oracle.DEFAULT_SPEC):
    """
    Quadrature and finite-difference ground truth of a target.

    Raises:
        NotConverged: if the quadrature or the finite differences do not
            reach the tolerance of spec.
    """
    h = config.test_function()
    if config.family in ['ef-exponential', 'ef-gamma']:
        params = config.distribution()

        def expect(d):
            return oracle.expect_ef(d, h, spec)
    elif config.family == 'ef-bivariate':
        params = config.distribution()

        def expect(m):
            return oracle.expect_ef_bivariate(m, h, spec)
    elif config.family == 'gaussian' and target != 'alpha':
        params = config.distribution()

        def expect(g):
            return oracle.expect_gaussian(g, h, spec)
    else:
        params, m = config.mixture()

        def expect(g):
            return oracle.expect_gvm(g, m, h, spec)

    logger.info("Computing the %s oracle for %s", target, config.family)
    return oracle.fd_target_gradient(expect, params, target, spec=spec)


###############
# Result rows #
###############

def coordinates(target, value):
    """
    Flatten a target value into (label, entry) pairs: 'k' for vectors,
    'j,k' over the upper triangle for sigma.

    >>> coordinates('sigma', [[1.0, 2.0], [2.0, 3.0]])
    [('0,0', 1.0), ('0,1', 2.0), ('1,1', 3.0)]
    """
    value = np.asarray(value, dtype=float)
    if target == 'sigma':
        d = value.shape[0]
        return [("%d,%d" % (j, k), float(value[j, k]))
                for j in range(d) for k in range(j, d)]
    return [("%d" % k, float(x)) for k, x in enumerate(value.ravel())]


def z_score(abs_error, std_error):
    if std_error > 0:
        return abs_error / std_error
    return 0.0 if abs_error == 0 else float('inf')


def result_rows(estimate, oracle_value=None):
    """
    One ResultRow per coordinate of an estimate, compared with the oracle
    when one is given.
    """
    rows = []
    oracles = (coordinates(estimate.target, oracle_value)
               if oracle_value is not None else None)
    for k, ((coord, value), (_, se)) in enumerate(zip(
            coordinates(estimate.target, estimate.estimate),
            coordinates(estimate.target, estimate.std_error))):
        if oracles is None:
            rows.append(ResultRow(estimate.estimator_id, estimate.target,
                                  coord, value, se, None, None, None))
            continue
        truth = oracles[k][1]
        error = abs(value - truth)
        rows.append(ResultRow(estimate.estimator_id, estimate.target, coord,
                              value, se, truth, error, z_score(error, se)))
    return rows


def row_passed(row):
    """
    A row passes when it has no oracle, or when its error is within four
    standard errors plus the oracle tolerance.
    """
    if row.oracle is None:
        return True
    return row.abs_error <= 4 * row.std_error + ORACLE_TOL * max(
        1.0, abs(row.oracle))


def variance_rows(estimate):
    """
    Per-sample variances (N SE^2) of every coordinate of an estimate.
    """
    return [VarianceRow(estimate.estimator_id, estimate.target, coord,
                        estimate.n_samples * se ** 2, se)
            for coord, se in coordinates(estimate.target, estimate.std_error)]
