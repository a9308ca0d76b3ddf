"""Shared instance generators for the test suite."""

import numpy as np
import pytest

from latgibbs import Basis


def random_basis(rng, n, min_det=1e-3):
    """Random Gaussian basis, resampled away from near-singularity."""
    while True:
        m = rng.standard_normal((n, n))
        if abs(np.linalg.det(m)) > min_det:
            return Basis(m)


def skewed_basis_2d(rng, skew_lo=1.5, skew_hi=4.0):
    """A 2D basis with strongly correlated columns: (1, 0) and (s, 1) up to
    a random rotation and scale."""
    s = rng.uniform(skew_lo, skew_hi) * rng.choice([-1.0, 1.0])
    theta = rng.uniform(0, 2 * np.pi)
    rot = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    scale = rng.uniform(0.7, 1.4)
    return Basis(scale * rot @ np.array([[1.0, s], [0.0, 1.0]]))


def empirical_tv(coords, pmf):
    """TV distance between empirical samples (T, n) and an exact pmf dict;
    mass outside the pmf's support counts in full."""
    t = len(coords)
    counts = {}
    for row in np.asarray(coords).tolist():
        key = tuple(int(v) for v in row)
        counts[key] = counts.get(key, 0) + 1
    tv = 0.5 * sum(abs(counts.get(k, 0) / t - p) for k, p in pmf.items())
    tv += 0.5 * sum(c / t for k, c in counts.items() if k not in pmf)
    return tv


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
