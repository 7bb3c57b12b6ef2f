"""Aberth-Ehrlich root finder against the numpy eigenvalue oracle."""

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from thetacover.errors import InvalidArgumentError
from thetacover.roots import aberth_roots


def match_sets(a, b, tol):
    a = sorted(a, key=lambda z: (z.real, z.imag))
    b = sorted(b, key=lambda z: (z.real, z.imag))
    return max(abs(x - y) for x, y in zip(a, b)) <= tol


def test_linear():
    roots = aberth_roots([3.0, 2.0])
    assert abs(roots[0] + 1.5) <= 1e-15


def test_quadratic():
    # (x - 1)(x - 2j) = x^2 - (1 + 2j) x + 2j
    roots = aberth_roots([2j, -(1 + 2j), 1.0])
    assert match_sets(roots, [1.0, 2j], 1e-10)


@pytest.mark.parametrize("seed", range(40))
def test_random_against_numpy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    true = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
    coeffs = P.polyfromroots(true)
    roots = aberth_roots(coeffs)
    want = np.roots(coeffs[::-1])
    assert match_sets(roots, want, 1e-8)
    assert match_sets(roots, true, 1e-8)


def test_clustered_roots():
    true = [1.0, 1.0 + 1e-4, -0.5j]
    coeffs = P.polyfromroots(np.asarray(true, dtype=complex))
    roots = aberth_roots(coeffs)
    assert match_sets(roots, true, 1e-6)


def test_large_degree():
    rng = np.random.default_rng(99)
    true = rng.uniform(-1, 1, 32) + 1j * rng.uniform(-1, 1, 32)
    coeffs = P.polyfromroots(true)
    roots = aberth_roots(coeffs)
    assert match_sets(roots, true, 1e-7)


def test_bad_input():
    with pytest.raises(InvalidArgumentError):
        aberth_roots([1.0])
    with pytest.raises(InvalidArgumentError):
        aberth_roots([1.0, 2.0, 0.0])
