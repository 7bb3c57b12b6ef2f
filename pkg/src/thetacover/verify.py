"""Numerical verification: contour quadrature, winding numbers, boundary
properties, and the torus reciprocity identities.

Cycles on the annulus double (the torus C / (Z + iT Z)) are realized by
polygonal contours:

* vertical loops {Re x = c}, one lattice period long, realize the oval
  cycles;
* horizontal loops, one unit long, realize the cross cycle.

The canonical orientations used by the identity checks are calibrated so
that, for a valid half-plane cover of index m, the horizontal period of
d(log h) equals +2 pi i m: the oval cycle runs downward along Re x = 1/2
and the horizontal cycle runs in the -Re direction along a line below all
divisor points.

Integrals with a simple pole on the contour are principal values: the
singular part res/(x - s) is removed analytically from the integrand and
its symmetric-limit contribution res*log((L - t)/t) is added back in
closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .covering import (CoveringMap, EtaDifferential, VARIANT_BLASCHKE,
                       VARIANT_DISC, VARIANT_HALFPLANE, VARIANT_RATIONAL,
                       _raw_parts, eval_eta, eval_eta_deflated,
                       evaluate_many, normalize_eta)
from .divisor import SurfaceSpec, canonical_im, oval_index
from .errors import ContourError, InvalidArgumentError, QuadratureError

ENDPOINT_TOL = 1e-12
ONLINE_TOL = 1e-9          # pole counts as lying on a segment
NEAR_TOL = 1e-3            # auto-offset clearance target
PANEL_CAP = 2 ** 14
PV_RES_DIGITS = 1e-7       # |period/(2 pi i) - n| accepted as the integer n

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class Contour:
    """Directed polygonal contour; consecutive segments share endpoints."""

    segments: tuple
    samples_per_segment: int = 8

    def __post_init__(self):
        segs = tuple((complex(a), complex(b)) for a, b in self.segments)
        if not segs:
            raise ContourError("empty contour")
        for (_, b), (a2, _) in zip(segs, segs[1:]):
            if abs(b - a2) > ENDPOINT_TOL:
                raise ContourError("consecutive segments do not share endpoints")
        object.__setattr__(self, "segments", segs)

    @property
    def closed(self) -> bool:
        return abs(self.segments[0][0] - self.segments[-1][1]) <= ENDPOINT_TOL


def segment_contour(a, b) -> Contour:
    return Contour(segments=((a, b),))


def polyline_contour(points) -> Contour:
    pts = [complex(p) for p in points]
    return Contour(segments=tuple(zip(pts[:-1], pts[1:])))


def circle_contour(center, radius, n: int = 64) -> Contour:
    """Closed polygon winding once counterclockwise around center."""
    center = complex(center)
    pts = [center + radius * cmath.exp(2j * math.pi * k / n)
           for k in range(n)]
    pts.append(pts[0])
    return polyline_contour(pts)


def vertical_loop(re, T, base_im=0.0, upward: bool = True) -> Contour:
    a = complex(re, base_im)
    b = a + (1j * T if upward else -1j * T)
    return segment_contour(a, b)


def horizontal_loop(im, base_re=0.0, leftward: bool = False) -> Contour:
    a = complex(base_re, im)
    b = a + (-1.0 if leftward else 1.0)
    return segment_contour(a, b)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured_error: float
    tolerance: float
    passed: bool
    details: str = ""


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "checks": [
                {"name": c.name, "measured_error": c.measured_error,
                 "tolerance": c.tolerance, "pass": c.passed,
                 "details": c.details}
                for c in self.checks
            ],
        }


def _check(name, measured, tol, details="") -> CheckResult:
    measured = float(measured)
    return CheckResult(name=name, measured_error=measured, tolerance=float(tol),
                       passed=bool(measured <= tol), details=details)


# ---------------------------------------------------------------------------
# quadrature

def _panel(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    vals = f(mid + half * _GL_NODES)
    return half * np.sum(vals * _GL_WEIGHTS)


def _adaptive(f, lo, hi, tol, budget):
    coarse = _panel(f, lo, hi)
    budget[0] += 1

    def rec(lo, hi, coarse, tol, depth):
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        budget[0] += 2
        if budget[0] > PANEL_CAP:
            raise QuadratureError(
                "panel cap exceeded",
                worst_panel=(lo, hi, abs(left + right - coarse)))
        err = abs(left + right - coarse)
        if err <= tol:
            return left + right
        if depth >= 40:
            raise QuadratureError("refinement limit reached",
                                  worst_panel=(lo, hi, err))
        return (rec(lo, mid, left, 0.5 * tol, depth + 1)
                + rec(mid, hi, right, 0.5 * tol, depth + 1))

    return rec(lo, hi, coarse, tol, 0)


def _pole_copies_near_segment(pos, a, b, T):
    """Lattice translates of pos relevant to the segment [a, b]."""
    mid = 0.5 * (a + b)
    m0 = round((mid - pos).real)
    n0 = round((mid - pos).imag / T)
    out = []
    reach = abs(b - a) + 1.0
    for dm in (-2, -1, 0, 1, 2):
        for dn in (-2, -1, 0, 1, 2):
            s = pos + (m0 + dm) + 1j * T * (n0 + dn)
            if abs(s - mid) <= reach:
                out.append(s)
    return out


def period_integral(d: EtaDifferential, contour: Contour,
                    tol: float = 1e-10) -> complex:
    """Integral of the differential along the contour, Gauss-Legendre panels
    with adaptive bisection; poles on the contour are treated as symmetric
    principal values."""
    T = d.surface.T
    poles = d.poles_with_residues()
    budget = [0]
    total = 0.0 + 0.0j
    for a, b in contour.segments:
        length = abs(b - a)
        if length == 0.0:
            continue
        direction = (b - a) / length

        online = []   # (t_k, residue, (pair_index, kind, s))
        near = []
        for pos, res, i, kind in poles:
            for s in _pole_copies_near_segment(pos, a, b, T):
                rel = (s - a) / direction
                t_k, perp = rel.real, abs(rel.imag)
                if perp <= ONLINE_TOL and -ONLINE_TOL <= t_k <= length + ONLINE_TOL:
                    if t_k <= ONLINE_TOL or t_k >= length - ONLINE_TOL:
                        raise ContourError("pole at a contour endpoint")
                    online.append((t_k, res, (i, kind, s)))
                elif perp < NEAR_TOL and -NEAR_TOL <= t_k <= length + NEAR_TOL:
                    near.append(((s - a) / direction).imag)

        shift = 0.0 + 0.0j
        if near and not online:
            # offset perpendicular to the segment, away from the poles,
            # when they all lie on one side
            if all(v > 0 for v in near):
                shift = -1j * direction * (NEAR_TOL - min(near))
            elif all(v < 0 for v in near):
                shift = 1j * direction * (NEAR_TOL + max(near))
        a_eff = a + shift

        if online:
            defl = tuple(key for _, _, key in online)

            def f(ts, a_eff=a_eff, direction=direction, defl=defl,
                  online=online):
                xs = a_eff + ts * direction
                vals = eval_eta_deflated(d, xs, defl) * direction
                return vals

            val = _adaptive(f, 0.0, length, tol, budget)
            for t_k, res, _ in online:
                val += res * math.log((length - t_k) / t_k)
        else:

            def f(ts, a_eff=a_eff, direction=direction):
                return eval_eta(d, a_eff + ts * direction,
                                proximity_tol=1e-9) * direction

            val = _adaptive(f, 0.0, length, tol, budget)
        total += val
    return complex(total)


# ---------------------------------------------------------------------------
# canonical cycles

def _wrap_gap_midpoint(values, T):
    """Midpoint of the cyclic gap between max(values) and min(values) + T,
    i.e. a height 'below all' of the given Im coordinates."""
    if not values:
        return 0.37 * T, 0.5 * T
    vals = sorted(canonical_im(v, T) for v in values)
    lo, hi = vals[0], vals[-1]
    gap = T - (hi - lo)
    return (hi + 0.5 * gap) % T, 0.5 * gap


def _largest_gap_midpoint(values, period):
    """Midpoint of the widest cyclic gap of values modulo period."""
    if not values:
        return 0.25 * period, 0.5 * period
    vals = sorted(v % period for v in values)
    best_gap, best_mid = -1.0, 0.0
    n = len(vals)
    for i in range(n):
        a = vals[i]
        b = vals[(i + 1) % n] + (period if i == n - 1 else 0.0)
        if b - a > best_gap:
            best_gap, best_mid = b - a, (0.5 * (a + b)) % period
    return best_mid, 0.5 * best_gap


def fundamental_cycles(d: EtaDifferential) -> tuple:
    """Canonical (vertical, horizontal) cycles avoiding the poles of d,
    oriented so valid covers give +2 pi i Z periods and the horizontal
    period of a half-plane cover equals +2 pi i m."""
    T = d.surface.T
    pts = [pos for pos, _, _, _ in d.poles_with_residues()]
    re_line, _ = _largest_gap_midpoint([p.real for p in pts], 1.0)
    im_base, _ = _wrap_gap_midpoint([p.imag for p in pts], T)
    vertical = vertical_loop(re_line, T, base_im=im_base, upward=True)
    horizontal = horizontal_loop(im_base, base_re=re_line, leftward=True)
    return vertical, horizontal


def raw_periods(d: EtaDifferential) -> tuple:
    """(horizontal, vertical) periods over x -> x+1 and x -> x+iT loops
    shifted to avoid the poles; used by the normalization solve."""
    T = d.surface.T
    pts = [pos for pos, _, _, _ in d.poles_with_residues()]
    re_line, _ = _largest_gap_midpoint([p.real for p in pts], 1.0)
    im_base, _ = _wrap_gap_midpoint([p.imag for p in pts], T)
    horizontal = period_integral(d, horizontal_loop(im_base, base_re=re_line))
    vertical = period_integral(d, vertical_loop(re_line, T, base_im=im_base))
    return horizontal, vertical


def fundamental_periods(d: EtaDifferential) -> tuple:
    """(vertical, horizontal) periods over the canonical cycles."""
    vertical, horizontal = fundamental_cycles(d)
    return period_integral(d, vertical), period_integral(d, horizontal)


def nearest_period_multiple(value: complex, tol: float = PV_RES_DIGITS):
    """The integer n with value = 2 pi i n, or None outside tolerance."""
    ratio = value / (2j * math.pi)
    n = round(ratio.real)
    if abs(ratio - n) <= tol:
        return int(n)
    return None


# ---------------------------------------------------------------------------
# winding numbers

def winding_number(f, contour: Contour) -> int:
    """Argument-principle winding of f along a closed contour, accumulating
    phase increments with adaptive subdivision below pi/2 per step.

    The contour must close in the plane or, for loops that close on the
    quotient torus only, the image curve must: f(start) = f(end).  f must
    accept numpy arrays of points and may not vanish or blow up on the
    contour."""
    if not contour.closed:
        a0 = contour.segments[0][0]
        b1 = contour.segments[-1][1]
        fa, fb = np.asarray(f(np.asarray([a0, b1])), dtype=complex)
        if abs(fa - fb) > 1e-6 * (1.0 + abs(fa)):
            raise InvalidArgumentError("winding numbers need a closed contour "
                                       "or a closed image curve")
    total = 0.0
    for a, b in contour.segments:
        n = max(contour.samples_per_segment, 8)
        ts = np.linspace(0.0, 1.0, n + 1)
        pts = a + (b - a) * ts
        vals = np.asarray(f(pts), dtype=complex)
        if np.any(~np.isfinite(vals)) or np.any(vals == 0):
            raise ContourError("contour hits a zero or pole of the map")
        total += _march(f, pts, vals)
    w = total / (2.0 * math.pi)
    if abs(w - round(w)) > 0.05:
        raise ContourError(f"winding did not close up to an integer: {w}")
    return int(round(w))


def _march(f, pts, vals):
    total = 0.0
    for i in range(len(pts) - 1):
        total += _phase_step(f, pts[i], pts[i + 1], vals[i], vals[i + 1], 0)
    return total


def _phase_step(f, a, b, fa, fb, depth):
    step = cmath.phase(fb / fa)
    if abs(step) < 0.5 * math.pi:
        return step
    if depth >= 48:
        raise ContourError("step-size underflow near a zero or pole")
    mid = 0.5 * (a + b)
    fm = complex(np.asarray(f(np.asarray([mid])), dtype=complex)[0])
    if fm == 0 or not cmath.isfinite(fm):
        raise ContourError("contour hits a zero or pole of the map")
    return (_phase_step(f, a, mid, fa, fm, depth + 1)
            + _phase_step(f, mid, b, fm, fb, depth + 1))


def oval_contour(s: SurfaceSpec, oval: int, samples: int = 8) -> Contour:
    """Boundary oval as a closed cycle with the boundary orientation of the
    strip (oval 0 downward, oval 1 upward)."""
    if s.kind != "annulus":
        raise InvalidArgumentError("ovals of the strip need an annulus")
    if oval == 0:
        c = vertical_loop(0.0, s.T, base_im=0.0, upward=False)
    elif oval == 1:
        c = vertical_loop(0.5, s.T, base_im=0.0, upward=True)
    else:
        raise InvalidArgumentError("oval index must be 0 or 1")
    return Contour(segments=c.segments, samples_per_segment=samples)


def _mobius_to_disc_parts(cover: CoveringMap, value: complex):
    """Pole-free callback g with |g| = 1 on the ovals whose zeros are the
    preimages of `value` under the cover."""
    if cover.variant == VARIANT_HALFPLANE:
        if value.imag <= 0:
            raise InvalidArgumentError("target value must lie in the open "
                                       "upper half-plane")

        def g(x):
            num, den = _raw_parts(cover, np.asarray(x, dtype=complex))
            return (num - value * den) / (num - value.conjugate() * den)

        return g
    if cover.variant == VARIANT_DISC:
        if abs(value) >= 1:
            raise InvalidArgumentError("target value must lie in the open "
                                       "unit disc")

        def g(x):
            num, den = _raw_parts(cover, np.asarray(x, dtype=complex))
            return (num - value * den) / (den - np.conj(value) * num)

        return g
    raise InvalidArgumentError("preimage counting needs an annulus cover")


def boundary_winding_total(cover: CoveringMap, samples: int = 256) -> int:
    """Winding of the cover along the full oriented boundary; equals the
    covering degree."""
    if cover.variant == VARIANT_DISC:
        def g(x):
            num, den = _raw_parts(cover, np.asarray(x, dtype=complex))
            return num / den
    else:
        g = _mobius_to_disc_parts(cover, 1j)
    s = cover.surface
    return (winding_number(g, oval_contour(s, 0, samples))
            + winding_number(g, oval_contour(s, 1, samples)))


def preimage_count(cover: CoveringMap, value: complex,
                   samples: int = 256) -> int:
    """Number of preimages of `value` inside the strip, by the argument
    principle along the oriented boundary."""
    g = _mobius_to_disc_parts(cover, complex(value))
    s = cover.surface
    return (winding_number(g, oval_contour(s, 0, samples))
            + winding_number(g, oval_contour(s, 1, samples)))


# ---------------------------------------------------------------------------
# boundary and single-valuedness checks

def _oval_points(s: SurfaceSpec, oval: int, samples: int):
    t = (np.arange(samples) + 0.37) / samples * s.T
    return (0.0 if oval == 0 else 0.5) + 1j * t


def _interior_grid(s: SurfaceSpec, count: int):
    n = max(2, int(math.isqrt(count)))
    re = np.linspace(0.04, 0.46, n)
    im = np.linspace(0.05, 0.95, n) * s.T
    g = (re[:, None] + 1j * im[None, :]).ravel()
    return g[:count] if len(g) >= count else g


def boundary_check(cover: CoveringMap, samples: int = 512,
                   tol: float = 1e-9) -> VerificationReport:
    """Boundary image and interior range checks for any cover variant."""
    checks = []
    if cover.variant == VARIANT_HALFPLANE:
        for oval in (0, 1):
            vals, inf_mask = evaluate_many(cover, _oval_points(cover.surface,
                                                               oval, samples))
            ok = ~inf_mask
            rel = np.abs(vals[ok].imag) / (1.0 + np.abs(vals[ok]))
            checks.append(_check(f"boundary-realness-oval{oval}",
                                 np.max(rel), tol))
            checks.append(_oval_closure(cover, oval, tol))
        vals, _ = evaluate_many(cover, _interior_grid(cover.surface, 100))
        checks.append(_check("interior-upper-halfplane",
                             max(0.0, -np.min(vals.imag)), 0.0,
                             details="min Im h over interior probes "
                                     f"= {np.min(vals.imag):.3e}"))
    elif cover.variant == VARIANT_DISC:
        for oval in (0, 1):
            vals, _ = evaluate_many(cover, _oval_points(cover.surface,
                                                        oval, samples))
            checks.append(_check(f"boundary-unimodularity-oval{oval}",
                                 np.max(np.abs(np.abs(vals) - 1.0)), tol))
        vals, _ = evaluate_many(cover, _interior_grid(cover.surface, 100))
        checks.append(_check("interior-contraction",
                             max(0.0, float(np.max(np.abs(vals))) - 1.0), 0.0,
                             details="max |h| over interior probes "
                                     f"= {np.max(np.abs(vals)):.6f}"))
    elif cover.variant == VARIANT_RATIONAL:
        u = np.linspace(-24.0, 24.0, samples)
        vals, inf_mask = evaluate_many(cover, u.astype(complex))
        ok = ~inf_mask
        checks.append(_check("boundary-realness",
                             np.max(np.abs(vals[ok].imag)), 1e-12))
        probes = (np.linspace(-3, 3, 10)[:, None]
                  + 1j * np.linspace(0.2, 3.0, 10)[None, :]).ravel()
        vals, _ = evaluate_many(cover, probes)
        checks.append(_check("interior-upper-halfplane",
                             max(0.0, -np.min(vals.imag)), 0.0))
    elif cover.variant == VARIANT_BLASCHKE:
        w = np.exp(2j * math.pi * (np.arange(samples) + 0.37) / samples)
        vals, _ = evaluate_many(cover, w)
        checks.append(_check("boundary-unimodularity",
                             np.max(np.abs(np.abs(vals) - 1.0)), tol))
        rho = np.linspace(0.0, 0.9, 10)
        probes = (rho[:, None] * np.exp(2j * math.pi *
                                        np.linspace(0, 0.9, 10))[None, :]).ravel()
        vals, _ = evaluate_many(cover, probes)
        checks.append(_check("interior-contraction",
                             max(0.0, float(np.max(np.abs(vals))) - 1.0), 0.0))
    else:
        raise InvalidArgumentError(f"unknown variant {cover.variant!r}")
    return VerificationReport(checks=tuple(checks))


def single_valuedness_check(cover: CoveringMap, samples: int = 64,
                            tol: float = 1e-9) -> VerificationReport:
    """Relative discrepancy of h across the two lattice translations."""
    if cover.variant not in (VARIANT_HALFPLANE, VARIANT_DISC):
        raise InvalidArgumentError("single-valuedness is an annulus check")
    s = cover.surface
    xs = _interior_grid(s, samples)
    base, _ = evaluate_many(cover, xs)
    shifted_h, _ = evaluate_many(cover, xs + 1.0)
    shifted_v, _ = evaluate_many(cover, xs + 1j * s.T)
    d_h = np.max(np.abs(shifted_h - base) / (1.0 + np.abs(base)))
    d_v = np.max(np.abs(shifted_v - base) / (1.0 + np.abs(base)))
    return VerificationReport(checks=(
        _check("single-valuedness-horizontal", d_h, tol),
        _check("single-valuedness-vertical", d_v, tol),
    ))


# ---------------------------------------------------------------------------
# reciprocity identities on the torus double

def _minimal_vertical_shift(z: complex, p: complex, T: float) -> complex:
    """Translate z by multiples of iT so |Im(z - p)| <= T/2."""
    k = round((z.imag - p.imag) / T)
    return z - 1j * T * k


def check_reciprocity_case_i(z: complex, p: complex, s: SurfaceSpec,
                             tol: float = 1e-7) -> VerificationReport:
    """Both poles on boundary ovals: the oval period of the normalized
    differential vanishes (principal value if poles sit on the integration
    oval) and the horizontal period equals 2 pi i Re[(z - p)/(iT)] for a
    path from p to z that crosses neither cycle."""
    if s.kind != "annulus":
        raise InvalidArgumentError("reciprocity checks live on an annulus")
    T = s.T
    if oval_index(z) is None or oval_index(p) is None:
        raise InvalidArgumentError("both points must lie on ovals")
    z = complex(0.0 if oval_index(z) == 0 else 0.5, canonical_im(z.imag, T))
    p = complex(0.0 if oval_index(p) == 0 else 0.5, canonical_im(p.imag, T))
    eta = normalize_eta([(z, p)], s)

    base, _ = _wrap_gap_midpoint([z.imag, p.imag], T)
    cycle = vertical_loop(0.5, T, base_im=base, upward=False)
    a_val = period_integral(eta, cycle)

    z_rep = _minimal_vertical_shift(z, p, T)
    # the loop height must avoid the Im-range swept by the p -> z path,
    # including paths whose minimal representative crosses the seam
    lo = min(z_rep.imag, p.imag)
    hi = max(z_rep.imag, p.imag)
    height = (0.5 * (hi + lo + T)) % T
    b_val = period_integral(eta, horizontal_loop(height, leftward=True))
    rhs = 2j * math.pi * ((z_rep - p) / (1j * T)).real
    return VerificationReport(checks=(
        _check("oval-period-vanishes", abs(a_val), tol,
               details=f"integral = {a_val:.3e}"),
        _check("cross-period-identity", abs(b_val - rhs), tol,
               details=f"lhs = {b_val:.10e}, rhs = {rhs:.10e}"),
    ))


def check_reciprocity_case_ii(z: complex, s: SurfaceSpec,
                              tol: float = 1e-7) -> VerificationReport:
    """Mirror pole pair p = -conj(z), z inside the strip: the horizontal
    period vanishes and the oval period equals -pi i Im of the integral of
    2i dx along the straight mirror-symmetric path from p to z."""
    if s.kind != "annulus":
        raise InvalidArgumentError("reciprocity checks live on an annulus")
    T = s.T
    from .divisor import canonical_strip_point
    z = canonical_strip_point(z, T)
    if not (1e-6 < z.real < 0.5 - 1e-6):
        raise InvalidArgumentError("z must lie strictly inside the strip")
    if min(z.imag, T - z.imag) <= 1e-9:
        # z and its mirror pole sit on the fixed line of conjugation; the
        # pair degenerates there and is excluded by the domain guard
        raise InvalidArgumentError("z must lie off the real line mod iT")
    p = -z.conjugate()
    eta = normalize_eta([(z, p)], s)

    height = (z.imag + 0.5 * T) % T
    b_val = period_integral(eta, horizontal_loop(height, leftward=True))

    cycle = vertical_loop(0.5, T, base_im=height, upward=False)
    a_val = period_integral(eta, cycle)
    rhs = -1j * math.pi * (2j * (z - p)).imag
    return VerificationReport(checks=(
        _check("cross-period-vanishes", abs(b_val), tol,
               details=f"integral = {b_val:.3e}"),
        _check("oval-period-identity", abs(a_val - rhs), tol,
               details=f"lhs = {a_val:.10e}, rhs = {rhs:.10e}"),
    ))
