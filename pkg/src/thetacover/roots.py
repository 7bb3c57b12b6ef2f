"""Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

Coefficients are in ascending order, c[0] + c[1] x + ... + c[n] x^n.
Degrees up to 64 are expected; the iteration has cubic local convergence
and uses a seeded perturbation restart when it stagnates.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, RootFindingError

_RESTARTS = 6


def _horner_pair(coeffs, x):
    """p(x) and p'(x) by a joint Horner scheme."""
    p = np.zeros_like(x)
    dp = np.zeros_like(x)
    for c in coeffs[::-1]:
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _initial_guesses(coeffs, rng):
    n = len(coeffs) - 1
    center = -coeffs[-2] / (n * coeffs[-1]) if n > 0 else 0.0
    # radius from the value at the centroid; falls back to a Cauchy bound
    pc, _ = _horner_pair(coeffs, np.asarray([center], dtype=complex))
    radius = (abs(pc[0]) / abs(coeffs[-1])) ** (1.0 / n)
    if not np.isfinite(radius) or radius == 0.0:
        radius = 1.0 + max(abs(c) for c in coeffs[:-1]) / abs(coeffs[-1])
    angles = 2.0 * np.pi * (np.arange(n) + 0.37) / n + rng.uniform(0, 0.2)
    return center + radius * np.exp(1j * angles)


def aberth_roots(coeffs, tol: float = 1e-12, max_iter: int = 200,
                 seed: int = 1729) -> np.ndarray:
    """All complex roots of the polynomial with the given coefficients."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1 or len(coeffs) < 2:
        raise InvalidArgumentError("need a polynomial of degree >= 1")
    if coeffs[-1] == 0:
        raise InvalidArgumentError("leading coefficient must be nonzero")
    n = len(coeffs) - 1
    if n == 1:
        return np.asarray([-coeffs[0] / coeffs[1]])

    rng = np.random.default_rng(seed)
    best = None
    for restart in range(_RESTARTS):
        roots = _initial_guesses(coeffs, rng)
        if restart:
            roots = roots * (1.0 + 0.1 * restart) + \
                rng.normal(scale=0.1 * restart, size=n) * 1j
        prev_step = np.inf
        stagnant = 0
        for _ in range(max_iter):
            p, dp = _horner_pair(coeffs, roots)
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(dp != 0, p / dp, 0.0)
                diff = roots[:, None] - roots[None, :]
                np.fill_diagonal(diff, np.inf)  # drops the self-term
                sums = np.sum(1.0 / diff, axis=1)
                corr = w / (1.0 - w * sums)
            corr = np.where(np.isfinite(corr), corr, w)
            roots = roots - corr
            step = float(np.max(np.abs(corr)))
            if step <= tol * float(np.max(1.0 + np.abs(roots))):
                return roots
            if step >= 0.5 * prev_step:
                stagnant += 1
                if stagnant > 30:
                    break
            else:
                stagnant = 0
            prev_step = step
        resid = float(np.max(np.abs(_horner_pair(coeffs, roots)[0])))
        if best is None or resid < best[0]:
            best = (resid, roots)
    raise RootFindingError(
        "Aberth iteration did not converge",
        diagnostics={"degree": n, "best_residual": best[0]})
