from gradid import GvmParams, mixing_spec
from gradid.densities import (emg_logpdf, gvm_logpdf, nig_logpdf, probe_points,
                              skew_gaussian_logpdf, student_t_logpdf,
                              student_v_decomposition, u_decomposition,
                              v_decomposition)
from gradid.errors import DegenerateSkew, InvalidShape, NonzeroAlpha
from gradid.oracle import QuadratureSpec, mixture_marginal
import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

SPEC = QuadratureSpec(mixing_points=800, target_tol=1e-6)

MIXTURES = [
    ('half-normal-abs', None, [0.4, 0.2]),
    ('exponential-1', None, [0.4, 0.2]),
    ('inv-gamma', 3.0, [0.0, 0.0]),
    ('inv-gauss', 2.0, [0.4, 0.2]),
]


def _params(alpha):
    return GvmParams([0.1, -0.3], alpha, [[1.0, 0.2], [0.2, 0.6]])


#########################
# Closed-form marginals #
#########################

@pytest.mark.parametrize('name,beta,alpha', MIXTURES)
def test_marginal_matches_mixing_quadrature(name, beta, alpha):
    p, m = _params(alpha), mixing_spec(name, beta)
    z = probe_points(p, m, 20)
    assert np.allclose(np.exp(gvm_logpdf(p, m, z)),
                       mixture_marginal(p, m, z, spec=SPEC), rtol=1e-5)


def test_univariate_marginals_match_scipy():
    z = np.linspace(-3, 4, 15)[:, None]

    # Student's t with 2 beta degrees of freedom
    p = GvmParams([0.5], [0.0], [[2.0]])
    expected = stats.t(df=6, loc=0.5, scale=np.sqrt(2.0)).logpdf(z[:, 0])
    assert np.allclose(student_t_logpdf(p, 3.0, z), expected)

    # Skew normal with shape alpha / sqrt(sigma) and scale sqrt(sigma +
    # alpha^2)
    p = GvmParams([0.5], [1.5], [[1.0]])
    expected = stats.skewnorm(a=1.5, loc=0.5,
                              scale=np.sqrt(1 + 1.5 ** 2)).logpdf(z[:, 0])
    assert np.allclose(skew_gaussian_logpdf(p, z), expected)

    # Exponentially modified Gaussian with rate 1 / alpha
    p = GvmParams([0.5], [2.0], [[1.0]])
    expected = stats.exponnorm(K=2.0, loc=0.5).logpdf(z[:, 0])
    assert np.allclose(emg_logpdf(p, z), expected)


#########################
# Weight decompositions #
#########################

@pytest.mark.parametrize('name,beta,alpha', MIXTURES)
@pytest.mark.parametrize('kind', ['u', 'v'])
def test_decomposition_matches_mixing_quadrature(name, beta, alpha, kind):
    p, m = _params(alpha), mixing_spec(name, beta)
    dec = u_decomposition(p, m) if kind == 'u' else v_decomposition(p, m)
    assert dec.kind == kind
    z = probe_points(p, m, 20)
    expected = mixture_marginal(p, m, z, weight=kind, spec=SPEC)
    assert np.allclose(dec.evaluate(z), expected, rtol=1e-5, atol=1e-14)


def test_student_weight_at_the_mode():
    # beta / (beta + d/2 - 1) at z = mu
    p = GvmParams([0.7], [0.0], [[1.3]])
    v1 = student_v_decomposition(p, 2.0).components[0].weight
    assert np.isclose(v1(p.mu[None, :])[0], 4 / 3)


def test_nig_density_is_finite_far_out():
    p = _params([0.4, 0.2])
    z = np.array([[40.0, -35.0], [200.0, 150.0]])
    assert np.all(np.isfinite(nig_logpdf(p, 2.0, z)))


def test_decomposition_samplers(rng):
    p, m = _params([0.4, 0.2]), mixing_spec('half-normal-abs')
    for component in u_decomposition(p, m):
        z, _ = component.sampler(rng, 10)
        assert z.shape == (10, 2)


##########
# Errors #
##########

def test_density_errors():
    with pytest.raises(DegenerateSkew):
        emg_logpdf(_params([0.0, 0.0]), np.zeros((1, 2)))
    with pytest.raises(NonzeroAlpha):
        student_t_logpdf(_params([0.4, 0.0]), 3.0, np.zeros((1, 2)))
    with pytest.raises(InvalidShape):
        student_t_logpdf(_params([0.0, 0.0]), 1.0, np.zeros((1, 2)))
    with pytest.raises(InvalidShape):
        nig_logpdf(_params([0.0, 0.0]), -1.0, np.zeros((1, 2)))


@pytest.mark.parametrize('name,beta,alpha', [
    ('half-normal-abs', None, [1.2]),
    ('exponential-1', None, [0.8]),
    ('inv-gamma', 2.5, [0.0]),
    ('inv-gauss', 1.5, [0.6]),
])
def test_univariate_marginals_integrate_to_one(name, beta, alpha):
    p, m = GvmParams([0.3], alpha, [[0.7]]), mixing_spec(name, beta)
    total, _ = quad(lambda x: np.exp(gvm_logpdf(p, m, np.array([[x]])))[0],
                    -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    assert np.isclose(total, 1.0, rtol=0, atol=1e-6)
