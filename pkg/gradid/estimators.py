"""
Monte-Carlo gradient estimators.

Every estimator draws its samples from the RandomStream in its
EstimatorConfig, builds one term per sample and returns the mean of the
terms together with their per-coordinate standard error. Estimators that
share a stream share their draws, so identities can be compared sample by
sample.
"""
import collections

import numpy as np

from . import numerics
from .densities import u_decomposition, v_decomposition
from .distributions import gaussian_sample, gvm_sample
from .ef import bivariate_velocities, implicit_velocity_1d
from .errors import MissingSampler
from .testfns import requires_hessian

GradEstimate = collections.namedtuple(
    'GradEstimate',
    ['target', 'estimate', 'std_error', 'n_samples', 'estimator_id'])
GradEstimate.__doc__ = """
Gradient estimate of E[h] with respect to one parameter.

Attributes:
    target (str): 'mu', 'alpha', 'sigma' or 'lambda_i'.
    estimate (np.ndarray): vector, or symmetric matrix for 'sigma'.
    std_error (np.ndarray): per-coordinate standard error, same shape.
    n_samples (int): number of draws (per component for the marginalized
        estimators).
    estimator_id (str): name of the estimator that produced it.
"""


class EstimatorConfig(collections.namedtuple(
        'EstimatorConfig',
        ['n_samples', 'rng', 'symmetrize_sigma', 'marginalized'])):
    """
    Sample size, random stream and switches shared by the estimators.

    Attributes:
        n_samples (int): number of draws, at least 2.
        rng (RandomStream): stream the draws are taken from.
        symmetrize_sigma (bool): replace every per-sample sigma term M with
            (M + M^T) / 2.
        marginalized (bool): make gvm_grad_alpha and gvm_grad_sigma use the
            weight decompositions instead of the joint (w, z) draws.
    """
    __slots__ = ()

    def __new__(cls, n_samples, rng, symmetrize_sigma=True,
                marginalized=False):
        if int(n_samples) != n_samples or n_samples < 2:
            raise ValueError("n_samples must be an integer >= 2, got %s" %
                             n_samples)
        return super().__new__(cls, int(n_samples), rng,
                               bool(symmetrize_sigma), bool(marginalized))


def _summarize(terms, target, estimator_id):
    """
    Collapse per-sample terms (first axis) into a GradEstimate.
    """
    n = terms.shape[0]
    return GradEstimate(target, terms.mean(axis=0),
                        terms.std(axis=0, ddof=1) / np.sqrt(n), n,
                        estimator_id)


def _combine(estimates, target, estimator_id):
    """
    Sum independent estimates, adding their variances.
    """
    return GradEstimate(
        target, sum(e.estimate for e in estimates),
        np.sqrt(sum(e.std_error ** 2 for e in estimates)),
        estimates[0].n_samples, estimator_id)


def _symmetric_part(terms, symmetrize):
    if symmetrize:
        return 0.5 * (terms + np.swapaxes(terms, -1, -2))
    return terms


def _first_order_sigma_terms(sigma, residual, grad, symmetrize):
    """
    Per-sample terms (1/2) sigma^-1 r grad^T.
    """
    whitened = numerics.solve_spd(sigma, residual.T).T
    terms = 0.5 * whitened[:, :, None] * grad[:, None, :]
    return _symmetric_part(terms, symmetrize)


def _hessian_sigma_terms(h, z, scale=None):
    """
    Per-sample terms (1/2) scale H(z), scale defaulting to 1.
    """
    hessian = h.hessian(z)
    if scale is None:
        return 0.5 * hessian
    return (0.5 * scale)[:, None, None] * hessian


#############
# Gaussians #
#############

def score_grad_mu(p, h, cfg):
    """
    Score-function estimator of grad_mu E[h]: mean of
    sigma^-1 (z - mu) h(z).
    """
    h.check_dim(p.dim)
    z, _ = gaussian_sample(p, cfg.rng, cfg.n_samples)
    score = numerics.solve_spd(p.sigma, (z - p.mu).T).T
    return _summarize(h.value(z)[:, None] * score, 'mu', 'score')


def bonnet_grad_mu(p, h, cfg):
    """
    Reparameterization estimator of grad_mu E[h]: mean of grad h(z). Valid
    for locally absolutely continuous h.
    """
    h.check_dim(p.dim)
    z, _ = gaussian_sample(p, cfg.rng, cfg.n_samples)
    return _summarize(h.grad(z), 'mu', 'bonnet')


def stein_first_order_sigma(p, h, cfg):
    """
    First-order estimator of grad_sigma E[h]: mean of
    (1/2) sigma^-1 (z - mu) grad h(z)^T.
    """
    h.check_dim(p.dim)
    z, _ = gaussian_sample(p, cfg.rng, cfg.n_samples)
    terms = _first_order_sigma_terms(p.sigma, z - p.mu, h.grad(z),
                                     cfg.symmetrize_sigma)
    return _summarize(terms, 'sigma', 'stein-first-order')


def price_grad_sigma(p, h, cfg):
    """
    Second-order estimator of grad_sigma E[h]: mean of (1/2) H(z).

    Raises:
        SmoothnessViolation: if h has no Hessian.
    """
    h.check_dim(p.dim)
    requires_hessian(h)
    z, _ = gaussian_sample(p, cfg.rng, cfg.n_samples)
    return _summarize(_hessian_sigma_terms(h, z), 'sigma', 'price')


############
# Mixtures #
############

def gvm_grad_mu(p, m, h, cfg):
    """
    grad_mu E[h] for a Gaussian variance-mean mixture: mean of grad h(z)
    over joint draws.
    """
    h.check_dim(p.dim)
    joint, _ = gvm_sample(p, m, cfg.rng, cfg.n_samples)
    return _summarize(h.grad(joint.z), 'mu', 'gvm-mu')


def gvm_grad_alpha(p, m, h, cfg):
    """
    grad_alpha E[h]: mean of u(w) grad h(z) over joint draws, or the
    decomposition form when cfg.marginalized is set.
    """
    if cfg.marginalized:
        return gvm_grad_alpha_marginalized(p, u_decomposition(p, m), h, cfg)
    h.check_dim(p.dim)
    joint, _ = gvm_sample(p, m, cfg.rng, cfg.n_samples)
    return _summarize(m.u(joint.w)[:, None] * h.grad(joint.z), 'alpha',
                      'gvm-alpha')


def _marginalized(dec, terms_fn, cfg):
    """
    One estimate per decomposition component, each from its own substream.
    """
    estimates = []
    for j, component in enumerate(dec):
        if component.sampler is None:
            raise MissingSampler("Component %s of the %s decomposition "
                                 "cannot be sampled" % (j, dec.kind))
        z, _ = component.sampler(cfg.rng.spawn(j), cfg.n_samples)
        estimates.append(_summarize(terms_fn(component.weight(z), z), None,
                                    None))
    return estimates


def gvm_grad_alpha_marginalized(p, dec, h, cfg):
    """
    grad_alpha E[h] = sum_j E_qhat_j[u_j(z) grad h(z)], with N draws from
    every qhat_j.

    Raises:
        MissingSampler: if a component has no sampler.
    """
    h.check_dim(p.dim)
    if dec.kind != 'u':
        raise ValueError("The alpha gradient needs a u decomposition")
    estimates = _marginalized(
        dec, lambda weight, z: weight[:, None] * h.grad(z), cfg)
    return _combine(estimates, 'alpha', 'gvm-alpha-marginalized')


def gvm_grad_sigma(p, m, h, cfg, mode='hessian'):
    """
    grad_sigma E[h] for a Gaussian variance-mean mixture.

    Args:
        mode (str): 'hessian' for the mean of (1/2) v(w) H(z), or
            'first-order' for the mean of
            (1/2) sigma^-1 (z - mu - u(w) alpha) grad h(z)^T.

    Raises:
        SmoothnessViolation: in hessian mode, if h has no Hessian.
    """
    if mode not in ['hessian', 'first-order']:
        raise ValueError("Unknown mode %s" % mode)
    if cfg.marginalized and mode == 'hessian':
        return gvm_grad_sigma_marginalized(p, v_decomposition(p, m), h, cfg)
    h.check_dim(p.dim)
    if mode == 'hessian':
        requires_hessian(h)
        joint, _ = gvm_sample(p, m, cfg.rng, cfg.n_samples)
        return _summarize(_hessian_sigma_terms(h, joint.z, m.v(joint.w)),
                          'sigma', 'gvm-sigma')

    joint, _ = gvm_sample(p, m, cfg.rng, cfg.n_samples)
    residual = joint.z - p.mu - m.u(joint.w)[:, None] * p.alpha
    terms = _first_order_sigma_terms(p.sigma, residual, h.grad(joint.z),
                                     cfg.symmetrize_sigma)
    return _summarize(terms, 'sigma', 'gvm-sigma-first-order')


def gvm_grad_sigma_marginalized(p, dec, h, cfg):
    """
    grad_sigma E[h] = (1/2) sum_j E_qhat_j[v_j(z) H(z)], with N draws from
    every qhat_j.

    Raises:
        SmoothnessViolation, MissingSampler.
    """
    h.check_dim(p.dim)
    requires_hessian(h)
    if dec.kind != 'v':
        raise ValueError("The sigma gradient needs a v decomposition")
    estimates = _marginalized(
        dec, lambda weight, z: _hessian_sigma_terms(h, z, weight), cfg)
    return _combine(estimates, 'sigma', 'gvm-sigma-marginalized')


###############################
# Implicit reparameterization #
###############################

def implicit_grad_1d(d, i, h, cfg):
    """
    grad_lambda_i E[h] = -E[f_i(z) h'(z)] for a univariate
    exponential-family distribution.

    Raises:
        OutOfSupport: if a draw lands on the boundary of the support.
    """
    h.check_dim(1)
    z, _ = d.sample(cfg.rng, cfg.n_samples)
    velocity = implicit_velocity_1d(d, i, z)
    terms = -velocity[:, None] * h.grad(z[:, None])
    return _summarize(terms, 'lambda_%d' % i, 'implicit')


def implicit_grad_bivariate(m, i, h, cfg):
    """
    grad_lambda_i E[h] = -E[f_i1(z) dh/dz1 + f_i2(z) dh/dz2] for a
    bivariate mixture with a triangular CDF map.

    Raises:
        SingularTriangle: if a diagonal density of the CDF Jacobian
            underflows at a draw.
    """
    h.check_dim(2)
    z, _ = m.sample(cfg.rng, cfg.n_samples)
    velocities = bivariate_velocities(m, i, z)
    terms = -np.sum(velocities * h.grad(z), axis=-1)
    return _summarize(terms[:, None], 'lambda_%d' % i, 'implicit-bivariate')
