from gradid import GaussianParams, GvmParams, RandomStream, mixing_spec
from gradid.distributions import (DegenerateMixing, gaussian_logpdf,
                                  gaussian_sample, gvm_sample, mixing_sample)
from gradid.errors import InvalidShape, NotPositiveDefinite
import numpy as np
import pytest
from scipy.stats import multivariate_normal


#####################
# Parameter records #
#####################

def test_parameter_validation():
    GaussianParams([0.0, 1.0], np.eye(2))
    with pytest.raises(NotPositiveDefinite):
        GaussianParams([0.0, 1.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        GaussianParams([0.0, 1.0], np.eye(3))
    with pytest.raises(ValueError):
        GaussianParams([np.nan], [[1.0]])

    p = GvmParams([0.0, 1.0])
    assert np.array_equal(p.alpha, np.zeros(2))
    assert np.array_equal(p.sigma, np.eye(2))
    with pytest.raises(ValueError):
        GvmParams([0.0, 1.0], [1.0], np.eye(2))


def test_mixing_spec_validation():
    with pytest.raises(InvalidShape):
        mixing_spec('inv-gamma', 1.0)
    with pytest.raises(InvalidShape):
        mixing_spec('inv-gauss', 0.0)
    with pytest.raises(ValueError):
        mixing_spec('cauchy')
    assert mixing_spec('inv-gamma', 3) == mixing_spec('inv-gamma', 3.0)
    assert mixing_spec('inv-gamma', 3) != mixing_spec('inv-gauss', 3)


#############
# Gaussians #
#############

def test_gaussian_logpdf(gaussian_2d):
    z = np.array([[0.0, 0.0], [1.0, -1.0], [2.5, 0.4]])
    expected = multivariate_normal(gaussian_2d.mu,
                                   gaussian_2d.sigma).logpdf(z)
    assert np.allclose(gaussian_logpdf(gaussian_2d, z), expected)


def test_gaussian_sample_moments(gaussian_2d, rng):
    z, next_rng = gaussian_sample(gaussian_2d, rng, 100000)
    assert z.shape == (100000, 2)
    assert next_rng != rng
    assert np.allclose(z.mean(axis=0), gaussian_2d.mu, atol=0.02)
    assert np.allclose(np.cov(z.T), gaussian_2d.sigma, atol=0.02)

    single, _ = gaussian_sample(gaussian_2d, rng)
    assert single.shape == (2,)
    assert np.array_equal(single, z[0])


###############
# Mixing laws #
###############

@pytest.mark.parametrize('name,beta', [('half-normal-abs', None),
                                       ('exponential-1', None),
                                       ('inv-gamma', 3.0),
                                       ('inv-gauss', 2.0)])
def test_mixing_moments(name, beta, rng):
    m = mixing_spec(name, beta)
    w, _ = mixing_sample(m, rng, 200000)
    moments = m.moments()
    u, v = m.u(w), m.v(w)
    assert abs(u.mean() - moments.mean_u) < 4 * u.std() / np.sqrt(w.size)
    assert abs(v.mean() - moments.mean_v) < 4 * v.std() / np.sqrt(w.size)

    # The quadrature integrates the density and the weights
    nodes, weights = m.quadrature(400)
    assert np.isclose(weights.sum(), 1.0, rtol=1e-8)
    assert np.isclose(weights @ m.u(nodes), moments.mean_u, rtol=1e-8,
                      atol=1e-12)
    assert np.isclose(weights @ m.v(nodes), moments.mean_v, rtol=1e-8)


def test_inverse_gaussian_sampler_variance(rng):
    m = mixing_spec('inv-gauss', 2.0)
    w, _ = mixing_sample(m, rng, 200000)
    assert np.all(w > 0)
    assert abs(w.var() - 0.5) < 0.02


############
# Mixtures #
############

def test_gvm_sample_moments(mixture_2d, rng):
    m = mixing_spec('exponential-1')
    joint, _ = gvm_sample(mixture_2d, m, rng, 200000)
    assert joint.w.shape == (200000,)
    assert joint.z.shape == (200000, 2)
    # Mean mu + alpha, covariance sigma + alpha alpha^T
    assert np.allclose(joint.z.mean(axis=0), mixture_2d.mu + mixture_2d.alpha,
                       atol=0.01)
    assert np.allclose(np.cov(joint.z.T), mixture_2d.sigma +
                       np.outer(mixture_2d.alpha, mixture_2d.alpha),
                       atol=0.02)


def test_degenerate_mixing_reproduces_gaussian_draws(gaussian_2d):
    stream = RandomStream(99, 3, 17)
    p = GvmParams(gaussian_2d.mu, None, gaussian_2d.sigma)
    joint, after_joint = gvm_sample(p, DegenerateMixing(), stream, 1000)
    z, after_z = gaussian_sample(gaussian_2d, stream, 1000)
    assert np.array_equal(joint.z, z)
    assert after_joint == after_z
