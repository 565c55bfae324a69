"""Shared fixtures and helpers.

BLAS threading is pinned to one thread before numpy loads so the
complexity-scaling measurements in the acceptance suite are stable.
"""

import os

for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_matrix(rng, n_rows, n_cols):
    """A random valid prediction matrix (flat Dirichlet rows)."""
    return rng.dirichlet(np.ones(n_cols), size=n_rows)


def interior_matrix(rng, n_rows, n_cols, margin=0.01):
    """Random matrix mixed towards uniform so entries stay in [1e-4, 1-1e-4]."""
    return (1.0 - margin) * random_matrix(rng, n_rows, n_cols) + margin / n_cols


def fd_gradient(func, mat, step=1e-6):
    """Central finite differences of a scalar function of a matrix."""
    grad = np.zeros_like(mat)
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            plus = mat.copy()
            plus[i, j] += step
            minus = mat.copy()
            minus[i, j] -= step
            grad[i, j] = (func(plus) - func(minus)) / (2.0 * step)
    return grad
