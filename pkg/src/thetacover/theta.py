"""Jacobi theta function theta_1 for purely imaginary lattice modulus.

Everything here works on the lattice Z + iT*Z with T > 0 and the nome
q = exp(-pi*T).  The series convention is

    theta1(x) = 2 q^(1/4) * sum_{n>=0} (-1)^n q^(n(n+1)) sin((2n+1) pi x),

the unique odd theta function of this lattice.  Translation laws used for
argument reduction:

    theta1(x + 1)  = -theta1(x)
    theta1(x + iT) = -exp(pi*T - 2 pi i x) * theta1(x)

iterated to

    theta1(x + n1 + n2*iT)
        = (-1)^(n1+n2) * exp(pi*T*n2^2 - 2 pi i n2 x) * theta1(x).

All evaluators accept scalars or numpy arrays of complex values and are
pure functions, safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError, PoleProximityError

# Distance to the lattice below which theta1 returns an exact zero.
LATTICE_ZERO_TOL = 1e-14
# Distance to the lattice below which the logarithmic derivative refuses
# to evaluate (simple pole there).
LATTICE_POLE_TOL = 1e-12

_MAX_TERMS = 512


@dataclass(frozen=True)
class ThetaParams:
    """Lattice modulus T > 0 together with the cached nome q = exp(-pi*T)."""

    T: float
    q: float = field(init=False)

    def __post_init__(self):
        T = self.T
        if not isinstance(T, (int, float)) or isinstance(T, bool):
            raise InvalidArgumentError(f"T must be a positive real, got {T!r}")
        T = float(T)
        if not math.isfinite(T) or T <= 0.0:
            raise InvalidArgumentError(f"T must be positive and finite, got {T}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "q", math.exp(-math.pi * T))


@dataclass(frozen=True)
class ReducedArgument:
    """Representative x0 with Re in [0,1), Im in [0,T), plus the exact factor
    relating theta1 at the original and reduced argument:

        theta1(x0 + n1 + n2*iT) = multiplier * theta1(x0).
    """

    x0: complex
    n1: int
    n2: int
    multiplier: complex


def _as_complex_array(x):
    arr = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("non-finite argument")
    return arr


def _reduce_centered(arr, T):
    """Shift into Re in [-1/2,1/2), Im in [-T/2,T/2); returns (w, n1, n2).

    The centered rectangle keeps |Im w| <= T/2 so the series below has no
    cancellation against its own quasi-periodic growth, and puts the single
    lattice point of the cell at w = 0.
    """
    n1 = np.floor(arr.real + 0.5)
    n2 = np.floor(arr.imag / T + 0.5)
    w = arr - n1 - 1j * (T * n2)
    return w, n1, n2


def _multiplier(w, n1, n2, T):
    parity = 1.0 - 2.0 * ((n1 + n2) % 2.0)
    return parity * np.exp(math.pi * T * n2**2 - 2j * math.pi * n2 * w)


def _series_sum(w, params, want_derivative=False):
    """Partial sums of the defining series (and optionally its derivative),
    without the common prefactor 2 q^(1/4).

    Terms are added until the bound q^(n(n+1)) cosh((2n+1) pi Im w) for the
    next term drops below 1e-16 times the running magnitude floor of the
    partial sum, so the truncation error is certified relative to the result.
    """
    q = params.q
    im = np.abs(w.imag)
    s = np.zeros_like(w)
    d = np.zeros_like(w) if want_derivative else None
    floor_mag = np.full(w.shape, np.inf)
    lattice = np.abs(w) <= LATTICE_ZERO_TOL
    for n in range(_MAX_TERMS):
        c = (-1.0) ** n * q ** (n * (n + 1))
        k = (2 * n + 1) * math.pi
        s = s + c * np.sin(k * w)
        if want_derivative:
            d = d + c * k * np.cos(k * w)
        mag = np.abs(s)
        floor_mag = np.minimum(floor_mag, np.where(mag > 0, mag, np.inf))
        nxt = q ** ((n + 1) * (n + 2)) * np.cosh((2 * n + 3) * math.pi * im)
        if want_derivative:
            nxt = nxt * (2 * n + 3) * math.pi
        done = nxt <= 1e-16 * np.where(np.isfinite(floor_mag), floor_mag, 1.0)
        if n >= 1 and np.all(done | lattice):
            break
    return (s, d) if want_derivative else s


def reduce_argument(x, params: ThetaParams) -> ReducedArgument:
    """Reduce x modulo the lattice to Re in [0,1), Im in [0,T)."""
    arr = _as_complex_array(x)
    if arr.shape != ():
        raise InvalidArgumentError("reduce_argument takes a single point")
    x = complex(arr)
    T = params.T
    n1 = math.floor(x.real)
    n2 = math.floor(x.imag / T)
    re, im = x.real - n1, x.imag - n2 * T
    if re >= 1.0:  # rounding at the seam
        re -= 1.0
        n1 += 1
    if im >= T:
        im -= T
        n2 += 1
    x0 = complex(re, im)
    parity = -1.0 if (n1 + n2) % 2 else 1.0
    multiplier = parity * np.exp(math.pi * T * n2**2 - 2j * math.pi * n2 * x0)
    return ReducedArgument(x0=x0, n1=n1, n2=n2, multiplier=complex(multiplier))


def theta1(x, params: ThetaParams):
    """Evaluate theta1(x).  Exact zero within LATTICE_ZERO_TOL of the lattice."""
    arr = _as_complex_array(x)
    scalar = arr.shape == ()
    arr = np.atleast_1d(arr)
    T = params.T
    w, n1, n2 = _reduce_centered(arr, T)
    mult = _multiplier(w, n1, n2, T)
    s = _series_sum(w, params)
    val = 2.0 * params.q**0.25 * mult * s
    val = np.where(np.abs(w) <= LATTICE_ZERO_TOL, 0.0 + 0.0j, val)
    return complex(val[0]) if scalar else val.reshape(np.shape(x))


def theta1_logderiv(x, params: ThetaParams):
    """theta1'(x)/theta1(x).  Raises PoleProximityError near lattice points."""
    arr = _as_complex_array(x)
    scalar = arr.shape == ()
    arr = np.atleast_1d(arr)
    w, _, n2 = _reduce_centered(arr, params.T)
    if np.any(np.abs(w) <= LATTICE_POLE_TOL):
        raise PoleProximityError("argument within 1e-12 of a lattice point")
    s, d = _series_sum(w, params, want_derivative=True)
    val = d / s - 2j * math.pi * n2
    return complex(val[0]) if scalar else val.reshape(np.shape(x))


@lru_cache(maxsize=64)
def _deflation_coeffs(T: float):
    """Odd Taylor coefficients of theta1'/theta1(w) - 1/w around w = 0.

    With theta1(w) = a1 w (1 + b2 w^2 + b4 w^4 + b6 w^6 + ...) one gets

        theta1'/theta1(w) - 1/w = c1 w + c3 w^3 + c5 w^5 + O(w^7),
        c1 = 2 b2, c3 = 4 (b4 - b2^2/2), c5 = 6 (b6 - b2 b4 + b2^3/3).
    """
    q = math.exp(-math.pi * T)
    S = [0.0, 0.0, 0.0, 0.0]  # sum (-1)^n q^(n(n+1)) ((2n+1)pi)^j, j=1,3,5,7
    for n in range(_MAX_TERMS):
        c = (-1.0) ** n * q ** (n * (n + 1))
        k = (2 * n + 1) * math.pi
        for j in range(4):
            S[j] += c * k ** (2 * j + 1)
        if abs(c) < 1e-22 and n >= 2:
            break
    a1 = S[0]
    b2 = -S[1] / 6.0 / a1
    b4 = S[2] / 120.0 / a1
    b6 = -S[3] / 5040.0 / a1
    c1 = 2.0 * b2
    c3 = 4.0 * (b4 - b2**2 / 2.0)
    c5 = 6.0 * (b6 - b2 * b4 + b2**3 / 3.0)
    return c1, c3, c5


def theta1_logderiv_deflated(x, params: ThetaParams):
    """theta1'/theta1(x) minus its simple pole 1/(x - L) at the nearest
    lattice point L.  Finite and smooth across lattice points; used for
    principal-value quadrature.
    """
    arr = _as_complex_array(x)
    scalar = arr.shape == ()
    arr = np.atleast_1d(arr)
    w, _, n2 = _reduce_centered(arr, params.T)
    small = np.abs(w) < 0.01
    out = np.empty_like(w)
    if np.any(small):
        c1, c3, c5 = _deflation_coeffs(params.T)
        ws = w[small]
        out[small] = ws * (c1 + ws**2 * (c3 + ws**2 * c5))
    if np.any(~small):
        wb = w[~small]
        s, d = _series_sum(wb, params, want_derivative=True)
        out[~small] = d / s - 1.0 / wb
    out = out - 2j * math.pi * n2
    return complex(out[0]) if scalar else out.reshape(np.shape(x))
