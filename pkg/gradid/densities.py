"""
Closed-form marginal densities q(z | mu, alpha, sigma) of the Gaussian
variance-mean mixtures, and their weight decompositions.

A weight decomposition rewrites the w-marginalized weighted joint
int u(w) q(w, z) dw (or the same with v) as sum_j u_j(z) qhat_j(z), where
each qhat_j is a normalized density that can be sampled. The marginalized
estimators only need draws of z from the qhat_j.

All densities are evaluated in log space, for points stacked along the
leading axes of z.
"""
import collections

import numpy as np
from scipy.special import gammaln

from . import numerics
from .distributions import (GaussianParams, DegenerateMixing,
                            ExponentialMixing, HalfNormalMixing,
                            InverseGammaMixing, InverseGaussianMixing,
                            gaussian_logpdf, gaussian_sample, gvm_sample,
                            mahalanobis)
from .errors import DegenerateSkew, InvalidShape, NonzeroAlpha

Component = collections.namedtuple('Component',
                                   ['weight', 'logpdf', 'sampler'])


class WeightDecomposition(object):
    """
    A finite list of (weight function, base density) pairs.

    Attributes:
        kind (str): 'u' or 'v', the mixing weight that was marginalized.
        components (list): Component tuples. weight maps points to weights,
            logpdf evaluates the base density and sampler(rng, size) draws
            from it (None if no sampler exists).
    """

    def __init__(self, kind, components):
        if kind not in ['u', 'v']:
            raise ValueError("Decomposition kind must be 'u' or 'v'")
        self.kind = kind
        self.components = list(components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def evaluate(self, z):
        """
        Return sum_j weight_j(z) qhat_j(z).
        """
        return sum(c.weight(z) * np.exp(c.logpdf(z)) for c in self.components)


##################
# Shared helpers #
##################

def _projections(p, z):
    """
    Return (s, a, q): s = (z-mu)^T sigma^-1 alpha,
    a = alpha^T sigma^-1 alpha and q = (z-mu)^T sigma^-1 (z-mu).
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != p.dim:
        raise ValueError("Point has dimension %s, distribution has %s" %
                         (z.shape[-1], p.dim))
    sigma_inv_alpha = numerics.solve_spd(p.sigma, p.alpha)
    residual = z - p.mu
    return (residual @ sigma_inv_alpha, float(p.alpha @ sigma_inv_alpha),
            mahalanobis(p.sigma, residual))


def _constant(value):
    def weight(z):
        return np.full(np.asarray(z).shape[:-1], value)
    return weight


def _gaussian_sampler(g):
    def sampler(rng, size):
        return gaussian_sample(g, rng, size)
    return sampler


def _mixture_sampler(p, m):
    def sampler(rng, size):
        joint, rng = gvm_sample(p, m, rng, size)
        return joint.z, rng
    return sampler


def _gaussian_component(p, weight):
    g = p.gaussian()
    return Component(weight, lambda z: gaussian_logpdf(g, z),
                     _gaussian_sampler(g))


#################
# Skew Gaussian #
#################

def skew_gaussian_logpdf(p, z):
    """
    Log-density of the skew Gaussian,
    q(z) = 2 Phi(s / sqrt(1 + a)) N(z | mu, sigma + alpha alpha^T).
    """
    s, a, _ = _projections(p, z)
    spread = GaussianParams(p.mu, p.sigma + np.outer(p.alpha, p.alpha))
    return (np.log(2) + numerics.norm_logcdf(s / np.sqrt(1 + a)) +
            gaussian_logpdf(spread, z))


def skew_u_decomposition(p):
    """
    int |w| q(w, z) dw = u1 N(z | mu, sigma) + u2(z) q(z) with
    u1 = sqrt(2/pi) / (1 + a) and u2(z) = s(z) / (1 + a).
    """
    _, a, _ = _projections(p, p.mu)

    def u2(z):
        s, _, _ = _projections(p, z)
        return s / (1 + a)

    return WeightDecomposition('u', [
        _gaussian_component(p, _constant(np.sqrt(2 / np.pi) / (1 + a))),
        Component(u2, lambda z: skew_gaussian_logpdf(p, z),
                  _mixture_sampler(p, HalfNormalMixing()))])


###################################
# Exponentially modified Gaussian #
###################################

def _skew_norm(p):
    _, a, _ = _projections(p, p.mu)
    if not a > 0:
        raise DegenerateSkew("The exponentially modified Gaussian needs "
                             "alpha^T sigma^-1 alpha > 0")
    return a


def emg_logpdf(p, z):
    """
    Log-density of the exponentially modified Gaussian,
    q(z) = sqrt(2 pi) det(2 pi sigma)^(-1/2) a^(-1/2) Phi((s - 1)/sqrt(a))
    exp(((s - 1)^2 / a - q) / 2).

    Raises:
        DegenerateSkew: if alpha^T sigma^-1 alpha = 0.
    """
    a = _skew_norm(p)
    s, _, q = _projections(p, z)
    return (0.5 * np.log(2 * np.pi) -
            0.5 * (p.dim * np.log(2 * np.pi) +
                   numerics.log_det_spd(p.sigma)) -
            0.5 * np.log(a) +
            numerics.norm_logcdf((s - 1) / np.sqrt(a)) +
            0.5 * ((s - 1) ** 2 / a - q))


def emg_u_decomposition(p):
    """
    int w q(w, z) dw = u1 N(z | mu, sigma) + u2(z) q(z) with u1 = 1/a and
    u2(z) = (s(z) - 1)/a.
    """
    a = _skew_norm(p)

    def u2(z):
        s, _, _ = _projections(p, z)
        return (s - 1) / a

    return WeightDecomposition('u', [
        _gaussian_component(p, _constant(1 / a)),
        Component(u2, lambda z: emg_logpdf(p, z),
                  _mixture_sampler(p, ExponentialMixing()))])


###############
# Student's t #
###############

def _check_student(p, beta):
    if not beta > 1:
        raise InvalidShape("Student's t mixing requires beta > 1, got %s" %
                           beta)
    if np.any(p.alpha != 0):
        raise NonzeroAlpha("Student's t is symmetric: alpha must be 0")


def student_t_logpdf(p, beta, z):
    """
    Log-density of the multivariate Student's t with 2 beta degrees of
    freedom and scale matrix sigma,
    q(z) = det(pi sigma)^(-1/2) Gamma(beta + d/2) / Gamma(beta)
    (2 beta)^(-d/2) (1 + q / (2 beta))^(-beta - d/2).
    """
    _check_student(p, beta)
    _, _, q = _projections(p, z)
    d = p.dim
    return (-0.5 * (d * np.log(np.pi) + numerics.log_det_spd(p.sigma)) +
            gammaln(beta + d / 2) - gammaln(beta) -
            0.5 * d * np.log(2 * beta) -
            (beta + d / 2) * np.log1p(q / (2 * beta)))


def student_v_decomposition(p, beta):
    """
    int w q(w, z) dw = v1(z) q(z) with
    v1(z) = beta / (beta + d/2 - 1) (1 + q(z) / (2 beta)).
    """
    _check_student(p, beta)
    d = p.dim

    def v1(z):
        _, _, q = _projections(p, z)
        return beta / (beta + d / 2 - 1) * (1 + q / (2 * beta))

    return WeightDecomposition('v', [
        Component(v1, lambda z: student_t_logpdf(p, beta, z),
                  _mixture_sampler(p, InverseGammaMixing(beta)))])


###########################
# Normal inverse-Gaussian #
###########################

def _check_nig(beta):
    if not beta > 0:
        raise InvalidShape("Normal inverse-Gaussian mixing requires "
                           "beta > 0, got %s" % beta)


def _nig_arguments(p, beta, z):
    s, a, q = _projections(p, z)
    outer, inner = a + beta, q + beta
    return s, outer, inner, np.sqrt(outer * inner)


def nig_logpdf(p, beta, z):
    """
    Log-density of the normal inverse-Gaussian,
    q(z) = beta^(1/2) (2 pi)^(-(d+1)/2) det(sigma)^(-1/2) exp(s + beta)
    2 K_{(d+1)/2}(r) ((q + beta) / (a + beta))^(-(d+1)/4)
    with r = sqrt((a + beta)(q + beta)).
    """
    _check_nig(beta)
    d = p.dim
    s, outer, inner, r = _nig_arguments(p, beta, z)
    return (0.5 * np.log(beta) - 0.5 * (d + 1) * np.log(2 * np.pi) -
            0.5 * numerics.log_det_spd(p.sigma) + s + beta + np.log(2) +
            numerics.log_bessel_k((d + 1) / 2, r) -
            0.25 * (d + 1) * (np.log(inner) - np.log(outer)))


def nig_v_decomposition(p, beta):
    """
    int w q(w, z) dw = v1(z) q(z) with
    v1(z) = sqrt((q + beta) / (a + beta)) K_{(d-1)/2}(r) / K_{(d+1)/2}(r).
    """
    _check_nig(beta)
    d = p.dim

    def v1(z):
        _, outer, inner, r = _nig_arguments(p, beta, z)
        return np.sqrt(inner / outer) * np.exp(
            numerics.log_bessel_k((d - 1) / 2, r) -
            numerics.log_bessel_k((d + 1) / 2, r))

    return WeightDecomposition('v', [
        Component(v1, lambda z: nig_logpdf(p, beta, z),
                  _mixture_sampler(p, InverseGaussianMixing(beta)))])


############
# Dispatch #
############

def gvm_logpdf(p, m, z):
    """
    Log-density of the mixture with mixing law m.
    """
    if isinstance(m, HalfNormalMixing):
        return skew_gaussian_logpdf(p, z)
    elif isinstance(m, ExponentialMixing):
        return emg_logpdf(p, z)
    elif isinstance(m, InverseGammaMixing):
        return student_t_logpdf(p, m.beta, z)
    elif isinstance(m, InverseGaussianMixing):
        return nig_logpdf(p, m.beta, z)
    elif isinstance(m, DegenerateMixing):
        return gaussian_logpdf(p.gaussian(), z)
    raise ValueError("No closed-form density for mixing law %s" % m)


def u_decomposition(p, m):
    """
    Decomposition of int u(w) q(w, z) dw for the mixture with mixing law m.
    """
    if isinstance(m, HalfNormalMixing):
        return skew_u_decomposition(p)
    elif isinstance(m, ExponentialMixing):
        return emg_u_decomposition(p)
    elif isinstance(m, InverseGaussianMixing):
        # u = v for the normal inverse-Gaussian
        return WeightDecomposition('u', nig_v_decomposition(p, m.beta))
    elif isinstance(m, InverseGammaMixing):
        _check_student(p, m.beta)
        return WeightDecomposition('u', [
            Component(_constant(0.0), lambda z: student_t_logpdf(p, m.beta, z),
                      _mixture_sampler(p, m))])
    elif isinstance(m, DegenerateMixing):
        return WeightDecomposition('u', [_gaussian_component(
            p, _constant(0.0))])
    raise ValueError("No u decomposition for mixing law %s" % m)


def v_decomposition(p, m):
    """
    Decomposition of int v(w) q(w, z) dw for the mixture with mixing law m.
    """
    if isinstance(m, InverseGammaMixing):
        return student_v_decomposition(p, m.beta)
    elif isinstance(m, InverseGaussianMixing):
        return nig_v_decomposition(p, m.beta)
    elif isinstance(m, (HalfNormalMixing, ExponentialMixing)):
        # v = 1: the only component is the marginal itself
        return WeightDecomposition('v', [
            Component(_constant(1.0), lambda z: gvm_logpdf(p, m, z),
                      _mixture_sampler(p, m))])
    elif isinstance(m, DegenerateMixing):
        return WeightDecomposition('v', [_gaussian_component(
            p, _constant(1.0))])
    raise ValueError("No v decomposition for mixing law %s" % m)


def probe_points(p, m, count=20):
    """
    Probe points on a lattice covering +-3 standard deviations of the
    marginal of z, for d in {1, 2}.
    """
    mean_u, var_u, mean_v = m.moments()
    mean = p.mu + mean_u * p.alpha
    cov = mean_v * p.sigma + var_u * np.outer(p.alpha, p.alpha)
    if p.dim == 1:
        lattice = np.linspace(-3, 3, count)[:, None]
    elif p.dim == 2:
        rows = 5
        cols = int(np.ceil(count / rows))
        grid = np.meshgrid(np.linspace(-3, 3, rows), np.linspace(-3, 3, cols))
        lattice = np.stack([g.ravel() for g in grid], axis=-1)[:count]
    else:
        raise ValueError("Probe lattices are only defined for d <= 2")
    return mean + lattice @ numerics.cholesky(cov).T
