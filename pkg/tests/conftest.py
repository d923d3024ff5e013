import itertools

import numpy as np
import pytest


def det_laplace(a):
    """Determinant by cofactor expansion along the first row (small d only)."""
    a = [list(map(float, row)) for row in a]
    d = len(a)
    if d == 1:
        return a[0][0]
    if d == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = 0.0
    for j in range(d):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        total += (-1) ** j * a[0][j] * det_laplace(minor)
    return total


def cofactor_inverse(a):
    """Inverse via the adjugate: inv[j, i] = (-1)^(i+j) det(minor_ij) / det(a)."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    det = det_laplace(a)
    inv = np.empty((d, d))
    for i, j in itertools.product(range(d), range(d)):
        minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
        cof = (-1) ** (i + j) * (det_laplace(minor) if d > 1 else 1.0)
        inv[j, i] = cof / det
    return inv


def random_spd(rng, d):
    g = rng.standard_normal((d, d))
    return g @ g.T + d * np.eye(d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
