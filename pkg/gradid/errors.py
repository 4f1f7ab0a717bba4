"""
Exceptions raised by gradid.

Every class derives from the closest builtin, so callers that only care about
the broad category can keep catching ValueError or ArithmeticError.
"""


class NotPositiveDefinite(ValueError):
    """
    A matrix that should be symmetric positive definite is not.
    """


class NotSpd(NotPositiveDefinite):
    """
    A finite-difference perturbation of a covariance left the SPD cone.
    """


class DomainError(ValueError):
    """
    A special function was evaluated outside of its supported domain.
    """


class InvalidShape(ValueError):
    """
    A shape parameter (beta) is outside of its admissible range.
    """


class NonzeroAlpha(ValueError):
    """
    A symmetric family was given a nonzero skew vector.
    """


class DegenerateSkew(ValueError):
    """
    The skew vector has zero Mahalanobis norm where the formula divides by it.
    """


class OutOfSupport(ValueError):
    """
    A point lies outside the open support of a distribution.
    """


class SingularTriangle(ArithmeticError):
    """
    A diagonal entry of the triangular CDF Jacobian underflowed.
    """


class AsymmetricA(ValueError):
    """
    The matrix of a quadratic form is not symmetric.
    """


class SmoothnessViolation(ValueError):
    """
    A second-order identity was applied to a function without a Hessian.
    """


class MissingSampler(ValueError):
    """
    A decomposition component has no sampler.
    """


class MissingMoments(ValueError):
    """
    A mixing law does not declare the moments a closed form needs.
    """


class NotConverged(ArithmeticError):
    """
    A quadrature or finite-difference refinement check failed.
    """


class ConfigError(ValueError):
    """
    An experiment configuration is malformed or inconsistent.
    """
