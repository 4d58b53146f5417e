"""Generalized Rankin-Cohen bracket polynomials on Euclidean Jordan algebras.

Exact construction of the bracket polynomial family via a Rodrigues-type
formula, together with symbolic and numerical verification of the identities
the family satisfies (covariance, interval orthogonality, Laplace-transform
factorization, tube-domain group covariance).
"""

from .algebra import get_algebra, ALGEBRA_NAMES

__version__ = "0.1.0"

SCHEMA = "rc-lab/1"

__all__ = ["get_algebra", "ALGEBRA_NAMES", "SCHEMA", "__version__"]
