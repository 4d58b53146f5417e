"""Shared numeric helpers for the test suite."""

import numpy as np

from rclab.algebra import iota


def fd_jacobian_det(algebra, z, v, eps=1e-5):
    """Central-difference Jacobian determinant of the polar chart."""
    n = algebra.n
    w0 = np.array([float(c) for c in z.coords] + [float(c) for c in v.coords])

    def f(w):
        a, b = iota(algebra.element(tuple(w[:n])),
                    algebra.element(tuple(w[n:])), check=False)
        return np.array([float(c) for c in a.coords + b.coords])

    J = np.zeros((2 * n, 2 * n))
    for i in range(2 * n):
        wp, wm = w0.copy(), w0.copy()
        wp[i] += eps
        wm[i] -= eps
        J[:, i] = (f(wp) - f(wm)) / (2 * eps)
    return float(np.linalg.det(J))
