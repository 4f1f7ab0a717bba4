"""
Deterministic ground truth for the estimators.

Expectations are computed by quadrature (tensor rules in z for d <= 2,
graded towards the ridge of the integrand when the ridge is narrow, and a
mapped Gauss-Legendre rule in the mixing variable) and parameter gradients
by central finite differences of those expectations. Every result is checked
by refining the rule and comparing, and NotConverged is raised when the
refinement moves the result by more than the target tolerance.
"""
import collections
import logging

import numpy as np
from scipy.linalg import solve_triangular

from . import numerics
from .distributions import GaussianParams, GvmParams, gaussian_logpdf
from .ef import BivariateEfMixture, UnivariateEf
from .errors import MissingMoments, NotConverged, NotPositiveDefinite, NotSpd

logger = logging.getLogger(__name__)

SCHEMES = ('gauss-hermite-tensor', 'mapped-gauss-legendre')

MAX_HERMITE_POINTS = 200

# Narrowest ridge resolved by the smooth rule, in standard deviations
MIN_RIDGE_WIDTH = 1e-6


class QuadratureSpec(collections.namedtuple(
        'QuadratureSpec',
        ['scheme', 'points_per_axis', 'mixing_points', 'target_tol'])):
    """
    Settings of the quadrature oracle.

    Attributes:
        scheme (str): one of SCHEMES, or None to use the mapped rule for
            integrands with kinks and Gauss-Hermite otherwise.
        points_per_axis (int): nodes per axis of the z rule (at least 8).
        mixing_points (int): nodes of the mixing-variable rule.
        target_tol (float): refinement tolerance (at least 1e-10).
    """
    __slots__ = ()

    def __new__(cls, scheme=None, points_per_axis=32, mixing_points=400,
                target_tol=1e-9):
        if scheme is not None and scheme not in SCHEMES:
            raise ValueError("Unknown quadrature scheme %s" % scheme)
        if points_per_axis < 8:
            raise ValueError("points_per_axis must be at least 8")
        if mixing_points < 1:
            raise ValueError("mixing_points must be positive")
        if not target_tol >= 1e-10:
            raise ValueError("target_tol must be at least 1e-10")
        return super().__new__(cls, scheme, int(points_per_axis),
                               int(mixing_points), float(target_tol))


DEFAULT_SPEC = QuadratureSpec()


def _check_refinement(coarse, fine, tol, what):
    discrepancy = abs(fine - coarse)
    logger.debug("%s: coarse %.17g, fine %.17g", what, coarse, fine)
    if discrepancy > tol * max(1.0, abs(fine)):
        raise NotConverged("%s did not converge: refinement changed the "
                           "result by %.3g (tolerance %.3g)" %
                           (what, discrepancy, tol))


#########################
# Gaussian expectations #
#########################

def _scheme_for(h, spec):
    if spec.scheme is not None:
        return spec.scheme
    return 'mapped-gauss-legendre' if h.kinks else 'gauss-hermite-tensor'


def _tensor(axis_rules):
    """
    Tensor product of per-axis (nodes, weights) rules.
    """
    grids = np.meshgrid(*[nodes for nodes, _ in axis_rules], indexing='ij')
    weight_grids = np.meshgrid(*[w for _, w in axis_rules], indexing='ij')
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in weight_grids], axis=-1),
                      axis=-1)
    return nodes, weights


def _hermite_rule(d, points):
    """
    Standardized Gauss-Hermite tensor rule: E[f(eps)] for eps ~ N(0, I) is
    sum weights * f(nodes).
    """
    t, w = numerics.gauss_hermite_nodes(min(points, MAX_HERMITE_POINTS))
    nodes, weights = _tensor([(np.sqrt(2) * t, w)] * d)
    return nodes, weights / np.pi ** (d / 2)


def _ridge_rule(crossing, width, points):
    """
    Standardized two-dimensional rule with panels graded towards
    eps_1 = crossing on the first axis and Gauss-Hermite on the second.
    """
    t, wt = numerics.graded_line_nodes(max(numerics.PANEL_ORDER, points // 2),
                                       crossing, width)
    s, ws = numerics.gauss_hermite_nodes(min(points, MAX_HERMITE_POINTS))
    return _tensor([(t, wt * np.exp(-t ** 2 / 2) / np.sqrt(2 * np.pi)),
                    (np.sqrt(2) * s, ws / np.sqrt(np.pi))])


def _smooth_factor(sigma, h):
    """
    Factor B with B B^T = sigma for the smooth rule. When h has a ridge, B is
    the Cholesky factor in the frame of its normal, so that normal^T B =
    (spread, 0) and only the first standardized coordinate crosses it.
    """
    if not h.ridges:
        return numerics.cholesky(sigma)
    if len(h.ridges) > 1 or len(sigma) != 2:
        raise ValueError("Quadrature resolves a single ridge in two "
                         "dimensions")
    normal = h.ridges[0][0]
    unit = normal / np.linalg.norm(normal)
    rotation = np.array([unit, [-unit[1], unit[0]]])
    rotated = rotation @ sigma @ rotation.T
    return rotation.T @ numerics.cholesky((rotated + rotated.T) / 2)


def _smooth_expectation(h, mean, factor, rule, points):
    """
    E[h(mean + factor eps)] for eps ~ N(0, I) with the standardized Hermite
    rule, or with _ridge_rule when the ridge of h is narrower than one
    standard deviation across it.
    """
    standard, weights = rule
    if h.ridges:
        normal, offset = h.ridges[0]
        spread = float(normal @ factor[:, 0])
        crossing = (offset - float(normal @ mean)) / spread
        if spread > 1 and abs(crossing) < numerics.TAIL_WIDTH:
            standard, weights = _ridge_rule(
                crossing, max(1 / spread, MIN_RIDGE_WIDTH), points)
    return float(weights @ h.value(mean + standard @ factor.T))


def _gaussian_rule(p, h, points):
    """
    Nodes and weights of the mapped rule, with
    E_N(mu, sigma)[f] = sum weights * f(nodes).
    """
    axis_rules = [numerics.real_line_nodes(
        points, center=p.mu[k], scale=np.sqrt(p.sigma[k, k]),
        breakpoints=h.kinks_on_axis(k)) for k in range(p.dim)]
    nodes, weights = _tensor(axis_rules)
    return nodes, weights * np.exp(gaussian_logpdf(p, nodes))


def _gaussian_expectation(p, h, scheme, points):
    if p.dim > 2:
        raise ValueError("Quadrature oracles are limited to d <= 2")
    if scheme == 'gauss-hermite-tensor':
        return _smooth_expectation(h, p.mu, _smooth_factor(p.sigma, h),
                                   _hermite_rule(p.dim, points), points)
    nodes, weights = _gaussian_rule(p, h, points)
    return float(weights @ h.value(nodes))


def expect_gaussian(p, h, spec=DEFAULT_SPEC):
    """
    E_N(mu, sigma)[h] by quadrature, checked by doubling the points per axis.

    Raises:
        NotConverged: if the refinement changes the result by more than
            spec.target_tol.
    """
    h.check_dim(p.dim)
    scheme = _scheme_for(h, spec)
    coarse = _gaussian_expectation(p, h, scheme, spec.points_per_axis)
    fine = _gaussian_expectation(p, h, scheme, 2 * spec.points_per_axis)
    _check_refinement(coarse, fine, spec.target_tol,
                      "Gaussian expectation (%s)" % scheme)
    return fine


########################
# Mixture expectations #
########################

def _gvm_expectation(p, m, h, scheme, points, mixing_points):
    w, mixing_weights = m.quadrature(mixing_points)
    keep = mixing_weights > 0
    w, mixing_weights = w[keep], mixing_weights[keep]
    u, v = m.u(w), m.v(w)

    if scheme == 'gauss-hermite-tensor':
        rule = _hermite_rule(p.dim, points)
        factor = _smooth_factor(p.sigma, h)
        values = np.array([
            _smooth_expectation(h, p.mu + ui * p.alpha, np.sqrt(vi) * factor,
                                rule, points)
            for ui, vi in zip(u, v)])
    else:
        values = np.array([
            _gaussian_expectation(
                GaussianParams(p.mu + ui * p.alpha, vi * p.sigma), h, scheme,
                points)
            for ui, vi in zip(u, v)])
    return float(mixing_weights @ values)


def expect_gvm(p, m, h, spec=DEFAULT_SPEC):
    """
    E_q(z)[h] for the mixture z | w ~ N(mu + u(w) alpha, v(w) sigma),
    w ~ q(w), as a nested quadrature over w and z.

    The z rule is refined first at the base mixing rule, then the mixing rule
    is refined at the fine z rule; both refinements must stay below
    spec.target_tol.
    """
    h.check_dim(p.dim)
    if p.dim > 2:
        raise ValueError("Quadrature oracles are limited to d <= 2")
    scheme = _scheme_for(h, spec)
    points, mixing = spec.points_per_axis, spec.mixing_points

    base = _gvm_expectation(p, m, h, scheme, points, mixing)
    fine_z = _gvm_expectation(p, m, h, scheme, 2 * points, mixing)
    _check_refinement(base, fine_z, spec.target_tol,
                      "Mixture expectation in z (%s)" % m.name)
    fine = _gvm_expectation(p, m, h, scheme, 2 * points, 2 * mixing)
    _check_refinement(fine_z, fine, spec.target_tol,
                      "Mixture expectation in w (%s)" % m.name)
    return fine


def _mixture_marginal(p, m, z, weight, mixing_points):
    w, mixing_weights = m.quadrature(mixing_points)
    u, v = m.u(w), m.v(w)
    if weight == 'u':
        mixing_weights = mixing_weights * u
    elif weight == 'v':
        mixing_weights = mixing_weights * v

    d = p.dim
    residual = (z[None, :, :] - p.mu - u[:, None, None] * p.alpha)
    whitened = solve_triangular(p.cholesky(), residual.reshape(-1, d).T,
                                lower=True)
    q = np.sum(whitened ** 2, axis=0).reshape(residual.shape[:-1])
    log_conditional = -0.5 * (d * np.log(2 * np.pi) +
                              d * np.log(v)[:, None] +
                              numerics.log_det_spd(p.sigma) +
                              q / v[:, None])
    return mixing_weights @ np.exp(log_conditional)


def mixture_marginal(p, m, z, weight=None, spec=DEFAULT_SPEC):
    """
    int weight(w) N(z | mu + u(w) alpha, v(w) sigma) q(w) dw by quadrature
    in w, at every point z (stacked along the first axis).

    Args:
        weight (str): None for the marginal density itself, 'u' or 'v' for
            the weighted integrals of the weight decompositions.

    Raises:
        NotConverged: if doubling the mixing points changes any value by more
            than spec.target_tol relative.
    """
    if weight not in [None, 'u', 'v']:
        raise ValueError("weight must be None, 'u' or 'v'")
    z = np.atleast_2d(np.asarray(z, dtype=float))
    coarse = _mixture_marginal(p, m, z, weight, spec.mixing_points)
    fine = _mixture_marginal(p, m, z, weight, 2 * spec.mixing_points)
    scale = np.maximum(np.abs(fine), np.finfo(float).tiny)
    discrepancy = np.max(np.abs(fine - coarse) / scale)
    if discrepancy > spec.target_tol:
        raise NotConverged("Mixture marginal did not converge: relative "
                           "refinement %.3g (tolerance %.3g)" %
                           (discrepancy, spec.target_tol))
    return fine


###################################
# Exponential-family expectations #
###################################

def _graded_rule(lower, points, scale, breakpoints=()):
    """
    Nodes and weights on (lower, inf) for a density of scale `scale` against
    an integrand varying on a unit scale: geometric panels from
    1e-3 min(1, scale) to 50 max(1, scale) above lower, split at the
    breakpoints, then a half line.
    """
    start, stop = 1e-3 * min(1.0, scale), 50 * max(1.0, scale)
    count = int(np.ceil(np.log2(stop / start))) + 1
    edges = sorted(set([lower] + list(lower + np.geomspace(start, stop, count))
                       + [b for b in breakpoints if b > lower]))
    pieces = [numerics.interval_nodes(a, b, points)
              for a, b in zip(edges[:-1], edges[1:])]
    w, ww = numerics.half_line_nodes(points, scale)
    pieces.append((edges[-1] + w, ww))
    return (np.concatenate([x for x, _ in pieces]),
            np.concatenate([wx for _, wx in pieces]))


def _support_rule(lower, upper, points, center, scale, breakpoints=()):
    """
    Nodes and weights for integrals over (lower, upper), split at the
    breakpoints that fall inside.
    """
    if not np.isfinite(lower) and not np.isfinite(upper):
        return numerics.real_line_nodes(points, center, scale, breakpoints)
    if not np.isfinite(upper):
        return _graded_rule(lower, points, scale, breakpoints)
    raise ValueError("Unsupported support (%s, %s)" % (lower, upper))


def _ef_expectation(d, h, points):
    nodes, weights = _support_rule(d.support[0], d.support[1], points,
                                   d.center, d.scale, h.kinks_on_axis(0))
    return float((weights * d.pdf(nodes)) @ h.value(nodes[:, None]))


def expect_ef(d, h, spec=DEFAULT_SPEC):
    """
    E_q(z | lambda)[h] for a univariate exponential-family distribution.
    """
    h.check_dim(1)
    coarse = _ef_expectation(d, h, spec.points_per_axis)
    fine = _ef_expectation(d, h, 2 * spec.points_per_axis)
    _check_refinement(coarse, fine, spec.target_tol,
                      "Exponential-family expectation")
    return fine


def _ef_bivariate_expectation(m, h, points):
    marginal = m.marginal
    z1, w1 = _support_rule(marginal.support[0], marginal.support[1], points,
                           marginal.center, marginal.scale)
    lower = m.conditional_support()[0]
    if not np.isfinite(lower):
        raise ValueError("Bivariate oracles need a conditional support "
                         "bounded from below")
    total = 0.0
    for x1, weight, scale in zip(z1, w1 * marginal.pdf(z1),
                                 m.conditional_scale(z1)):
        z2, w2 = _graded_rule(lower, points, float(scale))
        z = np.stack([np.full_like(z2, x1), z2], axis=-1)
        total += weight * ((w2 * m.conditional_pdf(x1, z2)) @ h.value(z))
    return float(total)


def expect_ef_bivariate(m, h, spec=DEFAULT_SPEC):
    """
    E_q(z1, z2 | lambda)[h] by nested quadrature. At each z1 node the inner
    rule in z2 is graded between the unit scale and the conditional scale.
    """
    h.check_dim(2)
    coarse = _ef_bivariate_expectation(m, h, spec.points_per_axis)
    fine = _ef_bivariate_expectation(m, h, 2 * spec.points_per_axis)
    _check_refinement(coarse, fine, spec.target_tol,
                      "Bivariate exponential-family expectation")
    return fine


######################
# Finite differences #
######################

def _parameter_value(params, param):
    name = param[0]
    if name == 'lambda':
        return params.params[param[1]]
    if name == 'sigma':
        return params.sigma[param[1], param[2]]
    return getattr(params, name)[param[1]]


def perturb(params, param, delta):
    """
    Return a copy of params with the selected entry moved by delta.

    Args:
        params: GaussianParams, GvmParams, UnivariateEf or
            BivariateEfMixture.
        param (tuple): ('mu', k), ('alpha', k), ('sigma', j, k) or
            ('lambda', i). Off-diagonal sigma entries move together with
            their symmetric partner.

    Raises:
        NotSpd: if the perturbed covariance is not positive definite.
    """
    name = param[0]
    if name == 'lambda':
        if not isinstance(params, (UnivariateEf, BivariateEfMixture)):
            raise ValueError("lambda perturbations need an exponential-"
                             "family distribution")
        values = list(params.params)
        values[param[1]] += delta
        return params.with_params(values)

    if not isinstance(params, (GaussianParams, GvmParams)):
        raise ValueError("Cannot perturb %s of %r" % (name, params))
    fields = params._asdict()
    if name not in fields:
        raise ValueError("%s has no parameter %s" %
                         (type(params).__name__, name))
    value = np.array(fields[name], dtype=float)
    if name == 'sigma':
        j, k = param[1], param[2]
        value[j, k] += delta
        if j != k:
            value[k, j] += delta
    else:
        value[param[1]] += delta
    fields[name] = value
    try:
        return type(params)(**fields)
    except NotPositiveDefinite as e:
        raise NotSpd("Perturbation %s by %g breaks positive definiteness: %s"
                     % (param, delta, e))


def fd_param_gradient(expect_fn, params, param, eps=None, spec=DEFAULT_SPEC):
    """
    Central finite difference of expect_fn(params) in one parameter entry.

    The difference (E(theta + eps) - E(theta - eps)) / (2 eps m), with
    multiplicity m = 2 for off-diagonal sigma entries, is computed at eps
    and eps/2; the two must agree within 10 target_tol and their Richardson
    extrapolation is returned.

    Args:
        expect_fn (function): maps a parameter record to an expectation.
        params: the parameter record at which to differentiate.
        param (tuple): selector, see perturb.
        eps (float): step; defaults to 1e-4 max(1, |theta|).

    Raises:
        NotSpd, NotConverged.
    """
    if eps is None:
        eps = 1e-4 * max(1.0, abs(_parameter_value(params, param)))
    multiplicity = 2 if param[0] == 'sigma' and param[1] != param[2] else 1

    def central(step):
        plus = expect_fn(perturb(params, param, step))
        minus = expect_fn(perturb(params, param, -step))
        return (plus - minus) / (2 * step * multiplicity)

    coarse, fine = central(eps), central(eps / 2)
    logger.debug("Finite difference in %s: eps %.3g -> %.17g, "
                 "eps/2 -> %.17g", param, eps, coarse, fine)
    if abs(coarse - fine) > 10 * spec.target_tol * max(1.0, abs(fine)):
        raise NotConverged("Finite difference in %s did not converge: "
                           "%.17g at eps, %.17g at eps/2" %
                           (param, coarse, fine))
    return (4 * fine - coarse) / 3


def fd_target_gradient(expect_fn, params, target, eps=None,
                       spec=DEFAULT_SPEC):
    """
    Finite-difference gradient of a whole target: a vector for 'mu' and
    'alpha', a symmetric matrix for 'sigma' and a length-one vector for
    'lambda_i'.
    """
    if target.startswith('lambda_'):
        i = int(target.split('_')[1])
        return np.array([fd_param_gradient(expect_fn, params, ('lambda', i),
                                           eps, spec)])
    d = params.mu.size
    if target in ['mu', 'alpha']:
        return np.array([fd_param_gradient(expect_fn, params, (target, k),
                                           eps, spec) for k in range(d)])
    if target == 'sigma':
        gradient = np.zeros((d, d))
        for j in range(d):
            for k in range(j, d):
                gradient[j, k] = gradient[k, j] = fd_param_gradient(
                    expect_fn, params, ('sigma', j, k), eps, spec)
        return gradient
    raise ValueError("Unknown target %s" % target)


def fd_function_gradient(fn, z, eps=1e-6):
    """
    Central differences of fn in every coordinate of z, stacked on a new
    last axis. fn(z) of shape (...,) gives (..., d); a gradient of shape
    (..., d) gives its Jacobian (..., d, d).
    """
    z = np.asarray(z, dtype=float)
    columns = []
    for k in range(z.shape[-1]):
        step = np.zeros(z.shape[-1])
        step[k] = eps
        columns.append((np.asarray(fn(z + step)) -
                        np.asarray(fn(z - step))) / (2 * eps))
    return np.stack(columns, axis=-1)


################
# Closed forms #
################

def closed_form_quadratic_expect(p, A, b=None, c=0.0, mixing=None):
    """
    E[z^T A z + b^T z + c] in closed form.

    For a Gaussian this is tr(A sigma) + mu^T A mu + b^T mu + c. For a
    mixture (p a GvmParams and mixing its MixingSpec) the mean is
    mu + E[u] alpha and the covariance E[v] sigma + Var[u] alpha alpha^T.

    Raises:
        MissingMoments: if the mixing law has no finite moments.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(p.mu.size) if b is None else np.atleast_1d(
        np.asarray(b, dtype=float))
    if mixing is None:
        mean, cov = p.mu, p.sigma
    else:
        moments = mixing.moments()
        if moments is None:
            raise MissingMoments("Mixing law %s declares no finite moments" %
                                 mixing.name)
        mean = p.mu + moments.mean_u * p.alpha
        cov = (moments.mean_v * p.sigma +
               moments.var_u * np.outer(p.alpha, p.alpha))
    return float(np.trace(A @ cov) + mean @ A @ mean + b @ mean + c)
