"""Shared test utilities: independent SPD generators.

These deliberately do not use spdmeans.harness, so tests of the kernel
and the means have their own source of matrices.
"""

import numpy as np

from spdmeans import SpdMatrix


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) >= 0.0, 1.0, -1.0)


def random_spd(rng, n, cond=100.0):
    """SPD draw with eigenvalues log-uniform in [1/sqrt(cond), sqrt(cond)]."""
    q = random_orthogonal(rng, n)
    lam = cond ** rng.uniform(-0.5, 0.5, n)
    return SpdMatrix((q * lam) @ q.T)


def rel_err(actual, expected):
    """Relative max-norm distance between two arrays."""
    denom = max(np.abs(actual).max(), np.abs(expected).max())
    if denom == 0.0:
        return 0.0
    return float(np.abs(actual - expected).max() / denom)
