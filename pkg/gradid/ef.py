"""
Univariate exponential-family distributions with differentiable CDFs, and
bivariate mixtures of them with a lower-triangular CDF map.

The implicit reparameterization gradient needs, for a parameter lambda_i,
the velocity f_i(z) = d psi(z, lambda) / d lambda_i / q(z | lambda), where
psi is the CDF. Every distribution here supplies psi and its parameter
derivative in closed form.
"""
import numpy as np
from scipy.special import gammainc, gammaln, ndtr

from .distributions import GaussianParams, gaussian_sample
from .errors import OutOfSupport, SingularTriangle

# Densities below this value make the velocities meaningless
UNDERFLOW = 1e-300


def _check_support(z, lower, upper):
    z = np.asarray(z, dtype=float)
    if np.any(~((z > lower) & (z < upper))):
        raise OutOfSupport("Point outside the open support (%s, %s)" %
                           (lower, upper))
    return z


def _check_index(params, i):
    if not 0 <= i < len(params):
        raise IndexError("Parameter index %s out of range for %s "
                         "parameter(s)" % (i, len(params)))


########################
# Univariate instances #
########################

class UnivariateEf(object):
    """
    A univariate exponential-family distribution on the open interval
    support = (lower, upper), which does not depend on the parameters.

    Subclasses implement pdf, cdf, dcdf_dparam, dpdf_dz and sample, and give
    a center and scale used to place quadrature nodes.
    """

    support = (-np.inf, np.inf)

    def __init__(self, params):
        self.params = tuple(float(x) for x in np.atleast_1d(params))

    def with_params(self, params):
        """
        A copy of this distribution with new parameters.
        """
        raise NotImplementedError

    def logpdf(self, z):
        return np.log(self.pdf(z))

    def pdf(self, z):
        raise NotImplementedError

    def cdf(self, z):
        raise NotImplementedError

    def dcdf_dparam(self, z, i):
        raise NotImplementedError

    def dpdf_dz(self, z):
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    @property
    def center(self):
        return 0.0

    @property
    def scale(self):
        return 1.0

    def in_support(self, z):
        z = np.asarray(z, dtype=float)
        return (z > self.support[0]) & (z < self.support[1])

    def __repr__(self):
        return "%s%s" % (type(self).__name__, self.params)


class Exponential(UnivariateEf):
    """
    Exponential distribution with rate lambda on (0, inf).
    """

    support = (0.0, np.inf)

    def __init__(self, rate):
        super().__init__(rate)
        if not self.rate > 0:
            raise ValueError("Exponential rate must be positive")

    @property
    def rate(self):
        return self.params[0]

    def with_params(self, params):
        return Exponential(params[0])

    def pdf(self, z):
        return self.rate * np.exp(-self.rate * np.asarray(z, dtype=float))

    def logpdf(self, z):
        return np.log(self.rate) - self.rate * np.asarray(z, dtype=float)

    def cdf(self, z):
        return -np.expm1(-self.rate * np.asarray(z, dtype=float))

    def dcdf_dparam(self, z, i):
        _check_index(self.params, i)
        z = np.asarray(z, dtype=float)
        return z * np.exp(-self.rate * z)

    def dpdf_dz(self, z):
        return -self.rate * self.pdf(z)

    def sample(self, rng, size=None):
        e, rng = rng.draw('standard_exponential', size)
        return e / self.rate, rng

    @property
    def scale(self):
        return 1 / self.rate


class Gaussian(UnivariateEf):
    """
    Gaussian with learnable mean and fixed variance.

    Samples are drawn through gaussian_sample, so that they coincide with the
    draws of a one-dimensional GaussianParams on the same stream.
    """

    def __init__(self, mean, variance=1.0):
        super().__init__(mean)
        if not variance > 0:
            raise ValueError("Gaussian variance must be positive")
        self.variance = float(variance)

    @property
    def mean(self):
        return self.params[0]

    def with_params(self, params):
        return Gaussian(params[0], self.variance)

    def gaussian(self):
        return GaussianParams([self.mean], [[self.variance]])

    def _standardize(self, z):
        return (np.asarray(z, dtype=float) - self.mean) / np.sqrt(
            self.variance)

    def pdf(self, z):
        return np.exp(self.logpdf(z))

    def logpdf(self, z):
        return (-0.5 * np.log(2 * np.pi * self.variance) -
                0.5 * self._standardize(z) ** 2)

    def cdf(self, z):
        return ndtr(self._standardize(z))

    def dcdf_dparam(self, z, i):
        _check_index(self.params, i)
        return -self.pdf(z)

    def dpdf_dz(self, z):
        return -self._standardize(z) / np.sqrt(self.variance) * self.pdf(z)

    def sample(self, rng, size=None):
        z, rng = gaussian_sample(self.gaussian(), rng,
                                 1 if size is None else size)
        return (z[0, 0] if size is None else z[:, 0]), rng

    @property
    def center(self):
        return self.mean

    @property
    def scale(self):
        return np.sqrt(self.variance)


class Gamma(UnivariateEf):
    """
    Gamma distribution with fixed shape and learnable rate lambda.

    By scale invariance d psi / d lambda = z q(z) / lambda.
    """

    support = (0.0, np.inf)

    def __init__(self, rate, shape=2.0):
        super().__init__(rate)
        if not self.rate > 0 or not shape > 0:
            raise ValueError("Gamma rate and shape must be positive")
        self.shape = float(shape)

    @property
    def rate(self):
        return self.params[0]

    def with_params(self, params):
        return Gamma(params[0], self.shape)

    def pdf(self, z):
        return np.exp(self.logpdf(z))

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        return (self.shape * np.log(self.rate) +
                (self.shape - 1) * np.log(z) - self.rate * z -
                gammaln(self.shape))

    def cdf(self, z):
        return gammainc(self.shape, self.rate * np.asarray(z, dtype=float))

    def dcdf_dparam(self, z, i):
        _check_index(self.params, i)
        return np.asarray(z, dtype=float) * self.pdf(z) / self.rate

    def dpdf_dz(self, z):
        z = np.asarray(z, dtype=float)
        return self.pdf(z) * ((self.shape - 1) / z - self.rate)

    def sample(self, rng, size=None):
        g, rng = rng.draw('standard_gamma', self.shape, size)
        return g / self.rate, rng

    @property
    def scale(self):
        return self.shape / self.rate


def implicit_velocity_1d(d, i, z):
    """
    Velocity f_i(z) = d psi(z, lambda) / d lambda_i / q(z | lambda).

    Raises:
        OutOfSupport: if z is not strictly inside the support.
    """
    z = _check_support(z, *d.support)
    return d.dcdf_dparam(z, i) / d.pdf(z)


def boundary_condition_profile(d, h, i=None, exponents=range(1, 9)):
    """
    Evaluate |g(z) q(z | lambda)| next to both ends of the support, at
    distance delta = 10^-k for every k in exponents (or at -1/delta and
    1/delta for infinite ends), where g = h or, when a parameter index i is
    given, g = h f_i.

    Returns:
        Two arrays (lower end, upper end), one entry per exponent.
    """
    lower, upper = d.support
    deltas = 10.0 ** -np.asarray(list(exponents), dtype=float)
    ends = []
    for bound, sign in [(lower, 1), (upper, -1)]:
        if np.isfinite(bound):
            z = bound + sign * deltas
        else:
            z = -sign / deltas
        if i is None:
            product = h.value(z[:, None]) * d.pdf(z)
        else:
            product = h.value(z[:, None]) * d.dcdf_dparam(z, i)
        ends.append(np.abs(product))
    return tuple(ends)


######################
# Bivariate mixtures #
######################

class BivariateEfMixture(object):
    """
    q(z1, z2 | lambda) = q(z1 | lambda) q(z2 | z1, lambda).

    The CDF map Psi(z) = (psi1(z1), psi2(z1, z2)) is lower triangular, so its
    Jacobian in z has diagonal (q(z1), q(z2 | z1)) and a single off-diagonal
    entry d psi2 / d z1.
    """

    def __init__(self, params):
        self.params = tuple(float(x) for x in np.atleast_1d(params))

    @property
    def marginal(self):
        raise NotImplementedError

    def with_params(self, params):
        raise NotImplementedError

    def conditional_pdf(self, z1, z2):
        raise NotImplementedError

    def conditional_cdf(self, z1, z2):
        raise NotImplementedError

    def dcdf2_dz1(self, z1, z2):
        raise NotImplementedError

    def dcdf2_dparam(self, z1, z2, i):
        raise NotImplementedError

    def conditional_scale(self, z1):
        return np.ones_like(np.asarray(z1, dtype=float))

    def conditional_support(self):
        return (-np.inf, np.inf)

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        return self.marginal.pdf(z[..., 0]) * self.conditional_pdf(
            z[..., 0], z[..., 1])

    def sample(self, rng, size=None):
        raise NotImplementedError

    def __repr__(self):
        return "%s%s" % (type(self).__name__, self.params)


class ExponentialChain(BivariateEfMixture):
    """
    z1 ~ Exp(lambda), z2 | z1 ~ Exp(r(z1, lambda)).

    Subclasses give the conditional rate r and its partial derivatives.
    """

    @property
    def marginal(self):
        return Exponential(self.params[0])

    def with_params(self, params):
        return type(self)(params[0])

    def rate(self, z1):
        raise NotImplementedError

    def drate_dz1(self, z1):
        raise NotImplementedError

    def drate_dparam(self, z1, i):
        raise NotImplementedError

    def conditional_support(self):
        return (0.0, np.inf)

    def conditional_pdf(self, z1, z2):
        r = self.rate(z1)
        return r * np.exp(-r * np.asarray(z2, dtype=float))

    def conditional_cdf(self, z1, z2):
        return -np.expm1(-self.rate(z1) * np.asarray(z2, dtype=float))

    def dcdf2_dz1(self, z1, z2):
        z2 = np.asarray(z2, dtype=float)
        return z2 * np.exp(-self.rate(z1) * z2) * self.drate_dz1(z1)

    def dcdf2_dparam(self, z1, z2, i):
        _check_index(self.params, i)
        z2 = np.asarray(z2, dtype=float)
        return z2 * np.exp(-self.rate(z1) * z2) * self.drate_dparam(z1, i)

    def conditional_scale(self, z1):
        return 1 / self.rate(z1)

    def sample(self, rng, size=None):
        z1, rng = self.marginal.sample(rng, size)
        e, rng = rng.draw('standard_exponential', size)
        return np.stack([z1, e / self.rate(z1)], axis=-1), rng


class IndependentExponentials(ExponentialChain):
    """
    z2 | z1 ~ Exp(lambda), independent of z1.
    """

    def rate(self, z1):
        return np.full(np.shape(z1), self.params[0])

    def drate_dz1(self, z1):
        return np.zeros(np.shape(z1))

    def drate_dparam(self, z1, i):
        return np.ones(np.shape(z1))


class CoupledExponentials(ExponentialChain):
    """
    z2 | z1 ~ Exp(lambda z1).
    """

    def rate(self, z1):
        return self.params[0] * np.asarray(z1, dtype=float)

    def drate_dz1(self, z1):
        return np.full(np.shape(z1), self.params[0])

    def drate_dparam(self, z1, i):
        return np.asarray(z1, dtype=float)


class ShiftedExponentials(ExponentialChain):
    """
    z2 | z1 ~ Exp(z1 + lambda).
    """

    def rate(self, z1):
        return np.asarray(z1, dtype=float) + self.params[0]

    def drate_dz1(self, z1):
        return np.ones(np.shape(z1))

    def drate_dparam(self, z1, i):
        return np.ones(np.shape(z1))


BIVARIATE_COUPLINGS = {
    'coupled': CoupledExponentials,
    'independent': IndependentExponentials,
    'shifted': ShiftedExponentials,
}


def bivariate_velocities(m, i, z):
    """
    Velocities (f_i1, f_i2) solving grad_z Psi f = d Psi / d lambda_i by
    forward substitution:
    f_i1 = d psi1 / d lambda_i / q(z1) and
    f_i2 = (d psi2 / d lambda_i - f_i1 d psi2 / d z1) / q(z2 | z1).

    Raises:
        OutOfSupport: if a coordinate leaves its support.
        SingularTriangle: if a diagonal density underflows.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2:
        raise ValueError("Bivariate velocities need points of length 2")
    z1 = _check_support(z[..., 0], *m.marginal.support)
    z2 = _check_support(z[..., 1], *m.conditional_support())

    q1 = m.marginal.pdf(z1)
    q2 = m.conditional_pdf(z1, z2)
    if np.any(q1 < UNDERFLOW) or np.any(q2 < UNDERFLOW):
        raise SingularTriangle("Density underflow on the diagonal of the "
                               "CDF Jacobian")

    f1 = m.marginal.dcdf_dparam(z1, i) / q1
    f2 = (m.dcdf2_dparam(z1, z2, i) - f1 * m.dcdf2_dz1(z1, z2)) / q2
    return np.stack([f1, f2], axis=-1)


def cdf_jacobian(m, z):
    """
    The lower-triangular Jacobian grad_z Psi at a single point z.
    """
    z1, z2 = float(z[0]), float(z[1])
    return np.array([[m.marginal.pdf(z1), 0.0],
                     [m.dcdf2_dz1(z1, z2), m.conditional_pdf(z1, z2)]])


def cdf_param_gradient(m, z, i):
    """
    d Psi / d lambda_i at a single point z.
    """
    z1, z2 = float(z[0]), float(z[1])
    return np.array([m.marginal.dcdf_dparam(z1, i),
                     m.dcdf2_dparam(z1, z2, i)])
