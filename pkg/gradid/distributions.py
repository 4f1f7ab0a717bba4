"""
Parameter records, samplers and log-densities for multivariate Gaussians and
Gaussian variance-mean mixtures.

A Gaussian variance-mean mixture draws a mixing variable w from q(w) and then
z | w ~ N(mu + u(w) alpha, v(w) Sigma). The four mixing laws used in the
package (plus a degenerate one, which turns the mixture back into a plain
Gaussian) are MixingSpec subclasses.
"""
import collections

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from . import numerics
from .errors import InvalidShape

# Substream label used for the mixing draws of gvm_sample
MIXING_STREAM = 1

# Range of log w covered by the inverse-gamma quadrature
LOG_W_LIMIT = 300

JointSample = collections.namedtuple('JointSample', ['w', 'z'])

MixingMoments = collections.namedtuple('MixingMoments',
                                       ['mean_u', 'var_u', 'mean_v'])


def _as_vector(x, name):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise ValueError("%s must be a non-empty vector, got shape %s" %
                         (name, x.shape))
    if not np.all(np.isfinite(x)):
        raise ValueError("%s has non-finite entries" % name)
    return x


#####################
# Parameter records #
#####################

class GaussianParams(collections.namedtuple('GaussianParams',
                                            ['mu', 'sigma'])):
    """
    Location mu and covariance sigma of N(mu, sigma).
    """
    __slots__ = ()

    def __new__(cls, mu, sigma):
        mu = _as_vector(mu, 'mu')
        sigma = numerics.as_spd(sigma)
        if sigma.shape != (mu.size, mu.size):
            raise ValueError("mu has dimension %s but sigma is %sx%s" %
                             ((mu.size,) + sigma.shape))
        numerics.cholesky(sigma)
        return super().__new__(cls, mu, sigma)

    @property
    def dim(self):
        return self.mu.size

    def cholesky(self):
        return numerics.cholesky(self.sigma)


class GvmParams(collections.namedtuple('GvmParams',
                                       ['mu', 'alpha', 'sigma'])):
    """
    Location mu, skew alpha and scale matrix sigma of a Gaussian
    variance-mean mixture.
    """
    __slots__ = ()

    def __new__(cls, mu, alpha=None, sigma=None):
        mu = _as_vector(mu, 'mu')
        alpha = (np.zeros_like(mu) if alpha is None
                 else _as_vector(alpha, 'alpha'))
        sigma = numerics.as_spd(np.eye(mu.size) if sigma is None else sigma)
        if alpha.size != mu.size or sigma.shape != (mu.size, mu.size):
            raise ValueError("mu, alpha and sigma must share dimension: "
                             "got %s, %s and %sx%s" %
                             ((mu.size, alpha.size) + sigma.shape))
        numerics.cholesky(sigma)
        return super().__new__(cls, mu, alpha, sigma)

    @property
    def dim(self):
        return self.mu.size

    def cholesky(self):
        return numerics.cholesky(self.sigma)

    def gaussian(self):
        """
        The N(mu, sigma) component of the mixture.
        """
        return GaussianParams(self.mu, self.sigma)


#############
# Gaussians #
#############

def gaussian_sample(p, rng, size=None):
    """
    Draw z = mu + L eps with eps standard normal.

    Args:
        p (GaussianParams): parameters of the Gaussian.
        rng (RandomStream): position in the random stream.
        size (int): number of draws. If None, a single vector is returned.

    Returns:
        The draws, with shape (size, d) or (d,), and the next RandomStream.
    """
    n = 1 if size is None else size
    eps, rng = rng.draw('standard_normal', (n, p.dim))
    z = p.mu + eps @ p.cholesky().T
    return (z[0] if size is None else z), rng


def mahalanobis(sigma, residual):
    """
    Squared Mahalanobis norms r^T sigma^-1 r of the rows of residual.
    """
    residual = np.asarray(residual, dtype=float)
    flat = residual.reshape(-1, residual.shape[-1])
    whitened = solve_triangular(numerics.cholesky(sigma), flat.T, lower=True)
    return np.sum(whitened ** 2, axis=0).reshape(residual.shape[:-1])


def gaussian_logpdf(p, z):
    """
    Log-density of N(mu, sigma) at z. z can hold several points along its
    leading axes.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != p.dim:
        raise ValueError("Point has dimension %s, distribution has %s" %
                         (z.shape[-1], p.dim))
    return -0.5 * (p.dim * np.log(2 * np.pi) +
                   numerics.log_det_spd(p.sigma) +
                   mahalanobis(p.sigma, z - p.mu))


###############
# Mixing laws #
###############

class MixingSpec(object):
    """
    A mixing law q(w) with its weight functions u(w) and v(w).

    Subclasses provide the sampler, the log-density used by the mixing
    quadrature, and the moments (E[u], Var[u], E[v]) when they are finite.
    """

    name = None

    def __init__(self, beta=None):
        self.beta = beta

    def u(self, w):
        raise NotImplementedError

    def v(self, w):
        raise NotImplementedError

    def logpdf(self, w):
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    def moments(self):
        """
        Return MixingMoments, or None when they are not finite.
        """
        return None

    def quadrature(self, points):
        """
        Nodes w and weights (density included) for E[f(w)] on (0, inf).
        """
        w, weights = numerics.half_line_nodes(points)
        return w, weights * np.exp(self.logpdf(w))

    def __eq__(self, other):
        return (type(self) is type(other) and self.beta == other.beta)

    def __hash__(self):
        return hash((self.name, self.beta))

    def __repr__(self):
        if self.beta is None:
            return "%s()" % type(self).__name__
        return "%s(beta=%r)" % (type(self).__name__, self.beta)


class HalfNormalMixing(MixingSpec):
    """
    w ~ N(0, 1), u(w) = |w|, v(w) = 1 (skew Gaussian).

    The quadrature folds the normal onto (0, inf), where u(w) = w.
    """

    name = 'half-normal-abs'

    def u(self, w):
        return np.abs(w)

    def v(self, w):
        return np.ones_like(np.asarray(w, dtype=float))

    def logpdf(self, w):
        return -0.5 * np.log(2 * np.pi) - 0.5 * np.asarray(w) ** 2

    def sample(self, rng, size=None):
        return rng.draw('standard_normal', size)

    def moments(self):
        return MixingMoments(np.sqrt(2 / np.pi), 1 - 2 / np.pi, 1.0)

    def quadrature(self, points):
        w, weights = numerics.half_line_nodes(points)
        return w, 2 * weights * np.exp(self.logpdf(w))


class ExponentialMixing(MixingSpec):
    """
    w ~ Exp(1), u(w) = w, v(w) = 1 (exponentially modified Gaussian).
    """

    name = 'exponential-1'

    def u(self, w):
        return np.asarray(w, dtype=float)

    def v(self, w):
        return np.ones_like(np.asarray(w, dtype=float))

    def logpdf(self, w):
        return -np.asarray(w, dtype=float)

    def sample(self, rng, size=None):
        return rng.draw('standard_exponential', size)

    def moments(self):
        return MixingMoments(1.0, 1.0, 1.0)


class InverseGammaMixing(MixingSpec):
    """
    w ~ IG(beta, beta), u(w) = 0, v(w) = w (Student's t with 2 beta degrees
    of freedom). Requires beta > 1 so that E[w] is finite.
    """

    name = 'inv-gamma'

    def __init__(self, beta):
        if not beta > 1:
            raise InvalidShape("Inverse-gamma mixing requires beta > 1, "
                               "got %s" % beta)
        super().__init__(float(beta))

    def u(self, w):
        return np.zeros_like(np.asarray(w, dtype=float))

    def v(self, w):
        return np.asarray(w, dtype=float)

    def logpdf(self, w):
        b = self.beta
        w = np.asarray(w, dtype=float)
        return b * np.log(b) - gammaln(b) - (b + 1) * np.log(w) - b / w

    def sample(self, rng, size=None):
        g, rng = rng.draw('standard_gamma', self.beta, size)
        return self.beta / g, rng

    def moments(self):
        return MixingMoments(0.0, 0.0, self.beta / (self.beta - 1))

    def quadrature(self, points):
        """
        The rule runs in s = log w, where the density decays like
        exp(-beta e^-s) below the mode s = 0 and like exp(-beta s) above it.
        Both sides are mapped half lines, cut at |s| = LOG_W_LIMIT.
        """
        below, below_weights = numerics.half_line_nodes(points // 2)
        above, above_weights = numerics.half_line_nodes(
            points // 2, max(1.0, 1 / (self.beta - 1)))
        s = np.concatenate([-below, above])
        weights = np.concatenate([below_weights, above_weights])
        keep = np.abs(s) < LOG_W_LIMIT
        w = np.exp(s[keep])
        return w, weights[keep] * np.exp(self.logpdf(w) + s[keep])


class InverseGaussianMixing(MixingSpec):
    """
    w ~ InvGauss(1, beta), u(w) = v(w) = w (normal inverse-Gaussian).

    Sampling transforms a chi-square draw and picks one of the two roots with
    a uniform draw.
    """

    name = 'inv-gauss'

    def __init__(self, beta):
        if not beta > 0:
            raise InvalidShape("Inverse-Gaussian mixing requires beta > 0, "
                               "got %s" % beta)
        super().__init__(float(beta))

    def u(self, w):
        return np.asarray(w, dtype=float)

    def v(self, w):
        return np.asarray(w, dtype=float)

    def logpdf(self, w):
        b = self.beta
        w = np.asarray(w, dtype=float)
        return (0.5 * np.log(b / (2 * np.pi)) - 1.5 * np.log(w) -
                0.5 * b * (w + 1 / w) + b)

    def sample(self, rng, size=None):
        b = self.beta
        nu, rng = rng.draw('standard_normal', size)
        uniform, rng = rng.draw('random', size)
        y = nu ** 2
        x = 1 + y / (2 * b) - np.sqrt(4 * b * y + y ** 2) / (2 * b)
        return np.where(uniform <= 1 / (1 + x), x, 1 / x), rng

    def moments(self):
        return MixingMoments(1.0, 1 / self.beta, 1.0)


class DegenerateMixing(MixingSpec):
    """
    Point mass w = 1 with u = 0 and v = 1: the mixture is N(mu, sigma).
    """

    name = 'degenerate'

    def u(self, w):
        return np.zeros_like(np.asarray(w, dtype=float))

    def v(self, w):
        return np.ones_like(np.asarray(w, dtype=float))

    def logpdf(self, w):
        return np.where(np.asarray(w) == 1, 0.0, -np.inf)

    def sample(self, rng, size=None):
        return (1.0 if size is None else np.ones(size)), rng

    def moments(self):
        return MixingMoments(0.0, 0.0, 1.0)

    def quadrature(self, points):
        return np.ones(1), np.ones(1)


MIXING_LAWS = {cls.name: cls for cls in [HalfNormalMixing, ExponentialMixing,
                                         InverseGammaMixing,
                                         InverseGaussianMixing,
                                         DegenerateMixing]}


def mixing_spec(name, beta=None):
    """
    Build a MixingSpec from its name.
    """
    if name not in MIXING_LAWS:
        raise ValueError("Unknown mixing law %s (available: %s)" %
                         (name, sorted(MIXING_LAWS)))
    if name in ['inv-gamma', 'inv-gauss']:
        return MIXING_LAWS[name](beta)
    return MIXING_LAWS[name]()


def mixing_sample(m, rng, size=None):
    """
    Draw the mixing variable w from q(w).

    Returns:
        The draws and the next RandomStream.
    """
    return m.sample(rng, size)


def gvm_sample(p, m, rng, size=None):
    """
    Draw (w, z) from the joint q(w, z) = N(z | mu + u(w) alpha, v(w) sigma)
    q(w).

    The standard normal draws come from rng itself, the mixing draws from a
    substream, so that a degenerate mixing law reproduces gaussian_sample
    draw for draw.

    Returns:
        A JointSample and the next RandomStream.
    """
    n = 1 if size is None else size
    w, _ = m.sample(rng.spawn(MIXING_STREAM), n)
    eps, rng = rng.draw('standard_normal', (n, p.dim))
    u = m.u(w)[:, None]
    scale = np.sqrt(m.v(w))[:, None]
    z = (p.mu + u * p.alpha) + scale * (eps @ p.cholesky().T)
    if size is None:
        return JointSample(w[0], z[0]), rng
    return JointSample(w, z), rng
