"""
Integrands h(z) with hand-coded derivatives.

All evaluators are vectorized: z has shape (..., d), value returns shape
(...), grad (..., d) and hessian (..., d, d).
"""
import numpy as np
from scipy.special import logsumexp, softmax

from .errors import AsymmetricA, SmoothnessViolation

# Smoothness classes, weakest first
SMOOTHNESS_CLASSES = ('locally-AC', 'C1-grad-AC', 'C2')


class TestFunction(object):
    """
    An integrand h(z) exposing value, almost-everywhere gradient and, when
    available, Hessian.

    Attributes:
        dim (int): dimension of z, or None if h accepts any dimension.
        smoothness (str): one of SMOOTHNESS_CLASSES.
        kinks (tuple): hyperplanes z_k = value, as (k, value) pairs, where
            the gradient is not defined. (None, value) stands for every
            coordinate.
        ridges (tuple): hyperplanes normal^T z = offset, as (normal, offset)
            pairs, across which h is smooth but bends like softplus(normal^T z
            - offset).
    """

    __test__ = False

    name = None
    smoothness = 'C2'
    kinks = ()
    ridges = ()
    has_hessian = True

    def __init__(self, dim=None):
        self.dim = dim

    def value(self, z):
        raise NotImplementedError

    def grad(self, z):
        raise NotImplementedError

    def hessian(self, z):
        raise SmoothnessViolation("%s has no Hessian (smoothness class %s)" %
                                  (self.name, self.smoothness))

    def undefined(self, z):
        """
        Boolean mask of the points lying on the non-differentiability set.
        """
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1], dtype=bool)

    def kinks_on_axis(self, k):
        """
        Positions of the kinks crossing coordinate axis k.
        """
        return sorted(value for axis, value in self.kinks
                      if axis is None or axis == k)

    def check_dim(self, d):
        if self.dim is not None and self.dim != d:
            raise ValueError("%s has dimension %s, distribution has %s" %
                             (self.name, self.dim, d))

    def __repr__(self):
        return "%s(dim=%s)" % (type(self).__name__, self.dim)


class Quadratic(TestFunction):
    """
    h(z) = z^T A z + b^T z + c.
    """

    name = 'quadratic'

    def __init__(self, A, b=None, c=0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise AsymmetricA("A must be a square matrix, got shape %s" %
                              (A.shape,))
        if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1, np.max(
                np.abs(A)))):
            raise AsymmetricA("A must be symmetric")
        b = np.zeros(A.shape[0]) if b is None else np.atleast_1d(
            np.asarray(b, dtype=float))
        if b.shape != (A.shape[0],):
            raise ValueError("b has shape %s, A is %sx%s" %
                             ((b.shape,) + A.shape))
        super().__init__(A.shape[0])
        self.A, self.b, self.c = A, b, float(c)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        return np.einsum('...i,ij,...j->...', z, self.A, z) + z @ self.b + \
            self.c

    def grad(self, z):
        z = np.asarray(z, dtype=float)
        return 2 * z @ self.A + self.b

    def hessian(self, z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(2 * self.A, z.shape[:-1] + self.A.shape).copy()

    def __repr__(self):
        return "Quadratic(A=%s, b=%s, c=%s)" % (self.A.tolist(),
                                                self.b.tolist(), self.c)


class AbsSum(TestFunction):
    """
    h(z) = sum_k |z_k|: locally absolutely continuous only.

    The gradient on a coordinate hyperplane is 0 by convention and flagged by
    undefined().
    """

    name = 'abs_sum'
    smoothness = 'locally-AC'
    kinks = ((None, 0.0),)
    has_hessian = False

    def value(self, z):
        return np.sum(np.abs(z), axis=-1)

    def grad(self, z):
        return np.sign(z).astype(float)

    def undefined(self, z):
        return np.any(np.asarray(z) == 0, axis=-1)


class LogSumExp(TestFunction):
    """
    h(z) = log sum_k exp(w_k z_k), smooth with bounded derivatives.

    In two dimensions h = w_2 z_2 + softplus(w_1 z_1 - w_2 z_2), which is
    declared as a ridge.
    """

    name = 'log_sum_exp'

    def __init__(self, weights):
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if weights.ndim != 1 or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be a finite vector")
        super().__init__(weights.size)
        self.weights = weights
        if weights.size == 2 and np.any(weights != 0):
            self.ridges = ((np.array([weights[0], -weights[1]]), 0.0),)

    def value(self, z):
        return logsumexp(self.weights * np.asarray(z, dtype=float), axis=-1)

    def grad(self, z):
        return self.weights * softmax(
            self.weights * np.asarray(z, dtype=float), axis=-1)

    def hessian(self, z):
        g = self.grad(z)
        diagonal = self.weights * g
        return (diagonal[..., :, None] * np.eye(self.dim) -
                g[..., :, None] * g[..., None, :])

    def __repr__(self):
        return "LogSumExp(weights=%s)" % self.weights.tolist()


def quadratic(A, b=None, c=0.0):
    """
    Build h(z) = z^T A z + b^T z + c.

    Raises:
        AsymmetricA: if A is not symmetric.
    """
    return Quadratic(A, b, c)


def abs_sum(dim=None):
    """
    Build h(z) = sum_k |z_k|.
    """
    return AbsSum(dim)


def log_sum_exp(weights):
    """
    Build h(z) = log sum_k exp(w_k z_k).
    """
    return LogSumExp(weights)


def requires_hessian(h):
    """
    Raise SmoothnessViolation unless h supports second-order identities.
    """
    if not h.has_hessian or h.smoothness == 'locally-AC':
        raise SmoothnessViolation(
            "%s is only %s: second-order identities need a function with "
            "an absolutely continuous gradient and a Hessian" %
            (h.name, h.smoothness))
