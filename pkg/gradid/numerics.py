"""
Linear algebra, special functions, quadrature rules and random streams.

Everything in here is a thin, validated layer over numpy and scipy: the rest
of the package only talks to these functions, so that error types and
accuracy guarantees are the same everywhere.
"""
import collections
from math import factorial

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.linalg import cho_solve
from scipy.special import k0, k1, kve, log_ndtr, ndtr

from .errors import DomainError, NotPositiveDefinite

# Bessel K orders reachable by the NIG density up to d = 5
SUPPORTED_ORDERS = (0, 0.5, 1, 1.5, 2, 2.5, 3)

SYMMETRY_TOLERANCE = 1e-12

# Nodes per Gauss-Legendre panel in the composite rules
PANEL_ORDER = 16

# Half-width, in scales, of the rule for Gaussian-tailed integrands
TAIL_WIDTH = 12

# Doublings of the graded rule, enough to reach TAIL_WIDTH from 1e-6
GRADED_PANELS = 26


##################
# Linear algebra #
##################

def as_spd(m):
    """
    Convert m to a float matrix and verify it is symmetric to within 1e-12
    relative. Positive definiteness is checked by cholesky.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotPositiveDefinite("Matrix is not square: shape %s" %
                                  (m.shape,))
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite("Matrix has non-finite entries")
    scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOLERANCE * scale:
        raise NotPositiveDefinite("Matrix is not symmetric")
    return m


def cholesky(m):
    """
    Return the lower-triangular factor L with L L^T = m.

    Args:
        m (array): a symmetric positive definite matrix.

    Raises:
        NotPositiveDefinite: if m is not symmetric or a pivot is not
            positive.
    """
    m = as_spd(m)
    try:
        factor = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Cholesky factorization failed: "
                                  "matrix is not positive definite")
    if not np.all(np.diag(factor) > 0):
        raise NotPositiveDefinite("Cholesky factorization has a "
                                  "non-positive pivot")
    return factor


def solve_spd(m, b):
    """
    Solve m x = b for a symmetric positive definite m.

    b can be a vector or a matrix whose columns are right hand sides.
    """
    factor = cholesky(m)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor.shape[0]:
        raise ValueError("Dimension mismatch: matrix is %sx%s, rhs has %s rows"
                         % (factor.shape + (b.shape[0],)))
    return cho_solve((factor, True), b)


def log_det_spd(m):
    """
    Log-determinant of a symmetric positive definite matrix.
    """
    return 2 * np.sum(np.log(np.diag(cholesky(m))))


#####################
# Special functions #
#####################

def norm_cdf(x):
    """
    Standard normal CDF.
    """
    return ndtr(x)


def norm_logcdf(x):
    """
    Logarithm of the standard normal CDF, accurate in the lower tail.
    """
    return log_ndtr(x)


def _check_bessel_arguments(order, x):
    if order not in SUPPORTED_ORDERS:
        raise DomainError("Unsupported Bessel K order %s (supported: %s)" %
                          (order, SUPPORTED_ORDERS))
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("Bessel K requires x > 0")
    return x


def bessel_k(order, x):
    """
    Modified Bessel function of the second kind K_order(x).

    Half-integer orders use the terminating closed form
    K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_k (n+k)!/(k!(n-k)!) (2x)^{-k},
    K_0 and K_1 come from scipy and higher integer orders from the upward
    recurrence K_{n+1} = K_{n-1} + (2n/x) K_n.

    Raises:
        DomainError: for x <= 0 or an order outside SUPPORTED_ORDERS.
    """
    x = _check_bessel_arguments(order, x)

    if order != int(order):
        n = int(order - 0.5)
        total = np.zeros_like(x)
        for k in range(n + 1):
            coefficient = (factorial(n + k) /
                           (factorial(k) * factorial(n - k)))
            total = total + coefficient * (2 * x) ** (-k)
        return np.sqrt(np.pi / (2 * x)) * np.exp(-x) * total

    previous, current = k0(x), k1(x)
    if order == 0:
        return previous
    for n in range(1, int(order)):
        previous, current = current, previous + (2 * n / x) * current
    return current


def log_bessel_k(order, x):
    """
    log K_order(x), computed from the exponentially scaled K so that large
    arguments do not underflow.
    """
    x = _check_bessel_arguments(order, x)
    return np.log(kve(order, x)) - x


####################
# Quadrature rules #
####################

def gauss_hermite_nodes(n):
    """
    Nodes and weights of the n-point Gauss-Hermite rule for the weight
    e^{-t^2} on the real line.

    >>> nodes, weights = gauss_hermite_nodes(4)
    >>> round(float(weights.sum()) ** 2, 12)
    3.14159265359
    """
    if not 1 <= n <= 200:
        raise ValueError("Gauss-Hermite rules are available for "
                         "1 <= n <= 200, got %s" % n)
    return hermgauss(n)


def interval_nodes(lower, upper, points):
    """
    Composite Gauss-Legendre rule on the finite interval [lower, upper],
    with points rounded up to a whole number of panels.
    """
    panels = max(1, int(np.ceil(points / PANEL_ORDER)))
    x, w = leggauss(PANEL_ORDER)
    edges = np.linspace(lower, upper, panels + 1)
    half_widths = (edges[1:] - edges[:-1])[:, None] / 2
    midpoints = (edges[1:] + edges[:-1])[:, None] / 2
    return ((midpoints + half_widths * x).ravel(),
            (half_widths * w).ravel())


def half_line_nodes(points, scale=1.0):
    """
    Nodes and weights for integrals over (0, inf).

    The half line is mapped onto (0, 1) with w = scale * t / (1 - t) and the
    composite Gauss-Legendre rule is applied in t, so the Jacobian
    scale / (1 - t)^2 is folded into the weights.
    """
    t, wt = interval_nodes(0.0, 1.0, points)
    return scale * t / (1 - t), wt * scale / (1 - t) ** 2


def real_line_nodes(points, center=0.0, scale=1.0, breakpoints=()):
    """
    Nodes and weights for integrals over the real line of functions with
    Gaussian tails of the given center and scale.

    The line is cut at TAIL_WIDTH scales on both sides of the center (and of
    the outermost breakpoints), and split at the breakpoints so that
    integrands with kinks are smooth on every piece.
    """
    cuts = sorted(set(float(b) for b in breakpoints)) or [float(center)]
    lower = min(cuts[0], center) - TAIL_WIDTH * scale
    upper = max(cuts[-1], center) + TAIL_WIDTH * scale
    edges = [lower] + cuts + [upper]
    pieces = [interval_nodes(a, b, points)
              for a, b in zip(edges[:-1], edges[1:])]
    return (np.concatenate([x for x, _ in pieces]),
            np.concatenate([w for _, w in pieces]))


def graded_line_nodes(points, center, width):
    """
    Nodes and weights for integrals over [-TAIL_WIDTH, TAIL_WIDTH] of
    functions that bend over a length `width` around `center`.

    The pieces double in length away from the center, starting from width,
    and each gets points nodes.

    >>> x, w = graded_line_nodes(16, 0.3, 0.01)
    >>> round(float(w.sum()), 10)
    24.0
    """
    offsets = width * 2.0 ** np.arange(GRADED_PANELS)
    edges = np.unique(np.clip(
        np.concatenate([[-TAIL_WIDTH, center, TAIL_WIDTH],
                        center - offsets, center + offsets]),
        -TAIL_WIDTH, TAIL_WIDTH))
    pieces = [interval_nodes(a, b, points)
              for a, b in zip(edges[:-1], edges[1:])]
    return (np.concatenate([x for x, _ in pieces]),
            np.concatenate([w for _, w in pieces]))


##################
# Random streams #
##################

_UINT64 = 2 ** 64


class RandomStream(collections.namedtuple('RandomStream',
                                          ['seed', 'stream_id', 'block'])):
    """
    Immutable token addressing a position in a counter-based random stream.

    The Philox bit generator is keyed by (seed, stream_id) and its counter is
    set to block, so the draws only depend on the token and never on the
    order in which tokens are used. Drawing returns the sample together with
    the token that follows it.
    """
    __slots__ = ()

    def __new__(cls, seed, stream_id=0, block=0):
        for name, value in [('seed', seed), ('stream_id', stream_id),
                            ('block', block)]:
            if int(value) != value or not 0 <= int(value) < _UINT64:
                raise ValueError("%s must be an integer in [0, 2**64), got %s"
                                 % (name, value))
        return super().__new__(cls, int(seed), int(stream_id), int(block))

    def _bit_generator(self):
        return np.random.Philox(
            key=np.array([self.seed, self.stream_id], dtype=np.uint64),
            counter=np.array([self.block, 0, 0, 0], dtype=np.uint64))

    def draw(self, method, *args, **kwargs):
        """
        Call a numpy Generator method at this position of the stream.

        Example:
            >>> stream = RandomStream(42)
            >>> x, stream = stream.draw('standard_normal', 3)

        Returns:
            The values produced by the method and the next token.
        """
        bit_generator = self._bit_generator()
        values = getattr(np.random.Generator(bit_generator), method)(
            *args, **kwargs)
        used = int(bit_generator.state['state']['counter'][0])
        return values, self._replace(block=(used + 1) % _UINT64)

    def spawn(self, label):
        """
        Derive an independent stream from this token and an integer label.
        """
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(self.stream_id, self.block, int(label)))
        stream_id = int(sequence.generate_state(1, dtype=np.uint64)[0])
        return RandomStream(self.seed, stream_id, 0)
