"""Construction and evaluation of the covering maps.

Annulus targets use the strip model 0 <= Re x <= 1/2 mod iT*Z and theta
quotients:

* half-plane cover:  h(x) = C * exp(-2 pi i m x) * prod theta1(x-z_j) / theta1(x-p_j)
  with m the integer value of the lattice condition and C a real constant
  fixing h(v) = 1 at a boundary reference point v and the orientation
  Im h > 0 inside;
* disc cover:        h(x) = phase * prod theta1(x-z_j) / theta1(x+conj(z_j)).

The classical picture supplies real rational covers R(u) of the half-plane
and finite Blaschke products B(w) of the disc, linked through the Moebius
map l(u) = (u-i)/(u+i) by l(R(u)) = B(l(u)).

Evaluation at a pole returns the tagged POINT_AT_INFINITY marker rather
than a floating infinity.  All map objects are immutable and evaluation is
pure, so everything here can be used concurrently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .divisor import (BlaschkeDivisor, ClassicalDivisor, DiscDivisor,
                      HalfPlaneDivisor, SurfaceSpec, canonicalize, disc,
                      validate_blaschke, validate_classical, validate_disc,
                      validate_halfplane)
from .errors import (ConstructionError, InvalidArgumentError,
                     PoleProximityError, RootFindingError)
from .roots import aberth_roots
from .theta import (ThetaParams, theta1, theta1_logderiv,
                    theta1_logderiv_deflated)

POINT_TOL = 1e-12     # declare an exact zero / pole this close to a divisor point
REFERENCE_CLEARANCE = 1e-6

VARIANT_HALFPLANE = "annulus_halfplane"
VARIANT_DISC = "annulus_disc"
VARIANT_RATIONAL = "classical_rational"
VARIANT_BLASCHKE = "classical_blaschke"


class PointAtInfinity:
    """Tagged marker for evaluation at a pole."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "PointAtInfinity"


POINT_AT_INFINITY = PointAtInfinity()


def is_infinity(value) -> bool:
    return isinstance(value, PointAtInfinity)


@dataclass(frozen=True)
class CoveringMap:
    """An evaluable, normalized covering map."""

    variant: str
    divisor: object
    surface: SurfaceSpec
    m: int = 0
    reference_point: complex | None = None
    phase: complex = 1.0 + 0.0j
    scale: float = 1.0

    @property
    def degree(self) -> int:
        return self.divisor.degree


def _torus_dist(x, points, T):
    """Elementwise distance from x (array) to the nearest lattice translate
    of any of the given points."""
    if not points:
        return np.full(np.shape(x), np.inf)
    x = np.asarray(x, dtype=complex)
    best = np.full(x.shape, np.inf)
    for p in points:
        w = x - p
        w = w - np.floor(w.real + 0.5) - 1j * (T * np.floor(w.imag / T + 0.5))
        best = np.minimum(best, np.abs(w))
    return best


def _raw_parts(cover: CoveringMap, x):
    """Numerator and denominator with h = num / den, vectorized."""
    x = np.asarray(x, dtype=complex)
    v = cover.variant
    if v == VARIANT_HALFPLANE:
        params = ThetaParams(cover.surface.T)
        num = np.exp(-2j * math.pi * cover.m * x)
        den = np.full(x.shape, cover.scale, dtype=complex)
        for z in cover.divisor.zeros:
            num = num * theta1(x - z, params)
        for p in cover.divisor.poles:
            den = den * theta1(x - p, params)
        return num, den
    if v == VARIANT_DISC:
        params = ThetaParams(cover.surface.T)
        num = np.full(x.shape, cover.phase, dtype=complex)
        den = np.ones(x.shape, dtype=complex)
        for z in cover.divisor.zeros:
            num = num * theta1(x - z, params)
            den = den * theta1(x + z.conjugate(), params)
        return num, den
    if v == VARIANT_RATIONAL:
        num = np.full(x.shape, cover.scale, dtype=complex)
        den = np.ones(x.shape, dtype=complex)
        for z in cover.divisor.zeros:
            num = num * (x - z)
        for p in cover.divisor.poles:
            den = den * (x - p)
        return num, den
    if v == VARIANT_BLASCHKE:
        num = np.full(x.shape, cover.phase, dtype=complex)
        den = np.ones(x.shape, dtype=complex)
        for a in cover.divisor.zeros:
            num = num * (x - a)
            den = den * (1.0 - a.conjugate() * x)
        return num, den
    raise InvalidArgumentError(f"unknown variant {v!r}")


def _pole_positions(cover: CoveringMap):
    v = cover.variant
    if v == VARIANT_HALFPLANE:
        return cover.divisor.poles
    if v == VARIANT_DISC:
        return cover.divisor.implied_poles()
    if v == VARIANT_RATIONAL:
        return tuple(complex(p) for p in cover.divisor.poles)
    return tuple(1.0 / a.conjugate() for a in cover.divisor.zeros if a != 0)


def _zero_positions(cover: CoveringMap):
    if cover.variant == VARIANT_RATIONAL:
        return tuple(complex(z) for z in cover.divisor.zeros)
    return cover.divisor.zeros


def evaluate_many(cover: CoveringMap, x):
    """Vectorized evaluation: returns (values, infinity_mask).  Values on the
    mask are set to complex infinity; exact zeros are returned at divisor
    zeros."""
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    if not np.all(np.isfinite(xs)):
        raise InvalidArgumentError("non-finite evaluation point")
    if cover.variant in (VARIANT_HALFPLANE, VARIANT_DISC):
        T = cover.surface.T
        pole_mask = _torus_dist(xs, _pole_positions(cover), T) <= POINT_TOL
        zero_mask = _torus_dist(xs, _zero_positions(cover), T) <= POINT_TOL
    else:
        poles = _pole_positions(cover)
        zeros = _zero_positions(cover)
        pole_mask = np.zeros(xs.shape, dtype=bool)
        zero_mask = np.zeros(xs.shape, dtype=bool)
        for p in poles:
            pole_mask |= np.abs(xs - p) <= POINT_TOL * (1.0 + abs(p))
        for z in zeros:
            zero_mask |= np.abs(xs - z) <= POINT_TOL * (1.0 + abs(z))
    num, den = _raw_parts(cover, xs)
    pole_mask = pole_mask | (den == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(pole_mask, np.inf + 0j, num / np.where(den == 0, 1, den))
    vals = np.where(zero_mask & ~pole_mask, 0.0 + 0.0j, vals)
    return vals.reshape(np.shape(x) or (1,)), pole_mask.reshape(np.shape(x) or (1,))


def evaluate(cover: CoveringMap, x):
    """Evaluate at a single point; returns POINT_AT_INFINITY at poles."""
    vals, mask = evaluate_many(cover, np.asarray([complex(x)]))
    if mask[0]:
        return POINT_AT_INFINITY
    return complex(vals[0])


def eval_halfplane_cover(cover: CoveringMap, x):
    if cover.variant != VARIANT_HALFPLANE:
        raise InvalidArgumentError("not a half-plane cover")
    return evaluate(cover, x)


def eval_disc_cover(cover: CoveringMap, x):
    if cover.variant != VARIANT_DISC:
        raise InvalidArgumentError("not an annulus-to-disc cover")
    return evaluate(cover, x)


def eval_classical(cover: CoveringMap, u):
    if cover.variant not in (VARIANT_RATIONAL, VARIANT_BLASCHKE):
        raise InvalidArgumentError("not a classical cover")
    return evaluate(cover, u)


def _oval_entries(d: HalfPlaneDivisor, oval: int, T: float):
    from .divisor import canonical_im, oval_index
    entries = []
    for kind, pts in (("zero", d.zeros), ("pole", d.poles)):
        for x in pts:
            if oval_index(x) == oval:
                entries.append((canonical_im(x.imag, T), kind))
    return sorted(entries)


def _arc_midpoints(entries, T, first_kind):
    """Cyclic midpoints of arcs running (first_kind -> other kind) in
    increasing Im, widest arc first."""
    n = len(entries)
    out = []
    for i in range(n):
        im_a, kind_a = entries[i]
        im_b, kind_b = entries[(i + 1) % n]
        if kind_a != first_kind or kind_b == first_kind:
            continue
        gap = (im_b - im_a) % T
        out.append((gap, (im_a + gap / 2.0) % T))
    out.sort(reverse=True)
    return out


def halfplane_cover(d: HalfPlaneDivisor, s: SurfaceSpec,
                    unchecked: bool = False) -> CoveringMap:
    """Build the normalized annulus -> half-plane cover for a valid divisor.

    The reference point v is the midpoint of the widest boundary arc on the
    oval Re x = 0 running from a pole to the next zero upward in Im; the
    product is then real on the ovals and rescaling by its value at v makes
    h(v) = 1 with positive orientation (Im h > 0 inside).  If the probe says
    otherwise the complementary arc family is used instead.
    """
    rep = validate_halfplane(d, s)
    if not rep.valid and not unchecked:
        raise ConstructionError(
            f"divisor does not validate: {rep.failures or rep.deviation}",
            failures=rep.failures)
    d = canonicalize(d, s)
    T = s.T
    base = CoveringMap(variant=VARIANT_HALFPLANE, divisor=d, surface=s,
                       m=rep.m, reference_point=None, scale=1.0)

    entries = _oval_entries(d, 0, T)
    probes = np.asarray([0.25 + 1j * T * t
                         for t in (0.13, 0.29, 0.47, 0.71, 0.89)])

    def candidate(first_kind):
        arcs = _arc_midpoints(entries, T, first_kind)
        for gap, mid in arcs:
            if gap / 2.0 > REFERENCE_CLEARANCE:
                return complex(0.0, mid)
        return None

    for first_kind in ("pole", "zero"):
        v = candidate(first_kind)
        if v is None:
            continue
        num, den = _raw_parts(base, np.asarray([v]))
        scale = (num[0] / den[0]).real
        if scale == 0.0 or not math.isfinite(scale):
            continue
        cover = CoveringMap(variant=VARIANT_HALFPLANE, divisor=d, surface=s,
                            m=rep.m, reference_point=v, scale=scale)
        vals, _ = evaluate_many(cover, probes)
        im = vals.imag
        best = int(np.argmax(np.abs(im)))
        if im[best] > 0.0:
            return cover
    if unchecked:
        # broken divisors cannot be oriented; return the plain product
        v = candidate("pole") or candidate("zero") or 0.25j * T
        num, den = _raw_parts(base, np.asarray([v]))
        raw = (num[0] / den[0]).real
        scale = raw if math.isfinite(raw) and raw != 0.0 else 1.0
        return CoveringMap(variant=VARIANT_HALFPLANE, divisor=d, surface=s,
                           m=rep.m, reference_point=v, scale=scale)
    raise ConstructionError("could not fix orientation of the cover")


def disc_cover(d: DiscDivisor, s: SurfaceSpec, phase: complex = 1.0,
               unchecked: bool = False) -> CoveringMap:
    """Build the annulus -> disc cover; phase is an overall rotation."""
    rep = validate_disc(d, s)
    if not rep.valid and not unchecked:
        raise ConstructionError(
            f"divisor does not validate: {rep.failures or rep.deviation}",
            failures=rep.failures)
    phase = complex(phase)
    if phase == 0:
        raise InvalidArgumentError("phase must be unimodular")
    phase = phase / abs(phase)
    return CoveringMap(variant=VARIANT_DISC, divisor=canonicalize(d, s),
                       surface=s, m=rep.m, phase=phase)


def rational_cover(d: ClassicalDivisor) -> CoveringMap:
    """Real rational cover of the half-plane; the scale sign is flipped if
    needed so that Im R > 0 on the open upper half-plane."""
    rep = validate_classical(d)
    if not rep.valid:
        raise ConstructionError(f"divisor does not validate: {rep.failures}",
                                failures=rep.failures)
    cover = CoveringMap(variant=VARIANT_RATIONAL, divisor=d, surface=disc(),
                        scale=float(d.scale_sign))
    probe = evaluate(cover, max(abs(z) for z in d.zeros + d.poles) * 1j + 1j)
    if probe.imag < 0:
        cover = CoveringMap(variant=VARIANT_RATIONAL, divisor=d,
                            surface=disc(), scale=-float(d.scale_sign))
    return cover


def blaschke_cover(d: BlaschkeDivisor, phase: complex = 1.0) -> CoveringMap:
    rep = validate_blaschke(d)
    if not rep.valid:
        raise ConstructionError(f"divisor does not validate: {rep.failures}",
                                failures=rep.failures)
    phase = complex(phase)
    if phase == 0:
        raise InvalidArgumentError("phase must be unimodular")
    return CoveringMap(variant=VARIANT_BLASCHKE, divisor=d, surface=disc(),
                       phase=phase / abs(phase))


def mobius_l(u):
    """l(u) = (u - i)/(u + i): closed upper half-plane onto the closed disc."""
    if is_infinity(u):
        return 1.0 + 0.0j
    arr = np.asarray(u, dtype=complex)
    if arr.shape == ():
        u = complex(arr)
        if abs(u + 1j) == 0.0:
            return POINT_AT_INFINITY
        return (u - 1j) / (u + 1j)
    return (arr - 1j) / (arr + 1j)


def mobius_l_inv(w):
    """Inverse of l: w -> i (1 + w)/(1 - w)."""
    if is_infinity(w):
        return -1j
    arr = np.asarray(w, dtype=complex)
    if arr.shape == ():
        w = complex(arr)
        if abs(w - 1.0) == 0.0:
            return POINT_AT_INFINITY
        return 1j * (1.0 + w) / (1.0 - w)
    return 1j * (1.0 + arr) / (1.0 - arr)


def strip_to_ring(x, s: SurfaceSpec):
    """u(x) = exp(2 pi x / T): strip model to the ring 1 <= |u| <= r."""
    if s.kind != "annulus":
        raise InvalidArgumentError("ring coordinates need an annulus")
    return np.exp(2.0 * math.pi * np.asarray(x, dtype=complex) / s.T) \
        if np.ndim(x) else cmath.exp(2.0 * math.pi * complex(x) / s.T)


def ring_to_strip(u, s: SurfaceSpec):
    """Branch of (T / 2 pi) log u with Im x in [0, T)."""
    if s.kind != "annulus":
        raise InvalidArgumentError("ring coordinates need an annulus")
    u = complex(u)
    if u == 0:
        raise InvalidArgumentError("u = 0 is not in the ring")
    ang = cmath.phase(u) % (2.0 * math.pi)
    return s.T * complex(math.log(abs(u)), ang) / (2.0 * math.pi)


def rational_to_blaschke(cover: CoveringMap, seed: int = 1729) -> CoveringMap:
    """Convert a real rational cover R to the Blaschke product B with
    l(R(u)) = B(l(u)); B's zeros are l of the roots of R(u) = i."""
    if cover.variant != VARIANT_RATIONAL:
        raise InvalidArgumentError("need a classical rational cover")
    d = cover.divisor
    from numpy.polynomial import polynomial as P
    cz = P.polyfromroots(np.asarray(d.zeros, dtype=complex))
    cp = P.polyfromroots(np.asarray(d.poles, dtype=complex))
    coeffs = cover.scale * cz - 1j * cp
    roots = aberth_roots(coeffs, seed=seed)
    if np.any(roots.imag <= 0):
        raise RootFindingError(
            "a preimage of i left the open upper half-plane",
            diagnostics={"roots": roots.tolist()})
    zeros = (roots - 1j) / (roots + 1j)
    if np.any(np.abs(zeros) >= 1.0):
        raise RootFindingError(
            "a Blaschke zero left the open unit disc",
            diagnostics={"zeros": zeros.tolist()})
    zeros = np.asarray(sorted(zeros, key=lambda a: (a.real, a.imag)))
    # pin the rotation by matching at u = infinity, i.e. w = 1
    target = (cover.scale - 1j) / (cover.scale + 1j)
    at_one = np.prod((1.0 - zeros) / (1.0 - np.conj(zeros)))
    phase = target / at_one
    phase = phase / abs(phase)
    return CoveringMap(variant=VARIANT_BLASCHKE,
                       divisor=BlaschkeDivisor(zeros=tuple(zeros)),
                       surface=disc(), phase=complex(phase))


@dataclass(frozen=True)
class EtaDifferential:
    """Coefficient function of the logarithmic differential d(log h):

        eta(x) = kappa + sum_j [ L(x - z_j) - L(x - p_j) ],

    with L = theta1'/theta1.  It has simple poles of residue +1 at the z_j
    and -1 at the p_j; after normalization both fundamental periods are
    purely imaginary."""

    pairs: tuple
    kappa: complex
    surface: SurfaceSpec

    def poles_with_residues(self):
        out = []
        for i, (z, p) in enumerate(self.pairs):
            out.append((z, 1.0, i, "z"))
            out.append((p, -1.0, i, "p"))
        return out


def eval_eta(d: EtaDifferential, x, proximity_tol: float = 1e-6):
    """Evaluate the coefficient function of the differential."""
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    if not np.all(np.isfinite(xs)):
        raise InvalidArgumentError("non-finite evaluation point")
    T = d.surface.T
    params = ThetaParams(T)
    pts = [z for z, p in d.pairs] + [p for z, p in d.pairs]
    if pts and np.any(_torus_dist(xs, pts, T) <= proximity_tol):
        raise PoleProximityError("evaluation point too close to a pole")
    out = np.full(xs.shape, d.kappa, dtype=complex)
    for z, p in d.pairs:
        out = out + theta1_logderiv(xs - z, params)
        out = out - theta1_logderiv(xs - p, params)
    if np.ndim(x) == 0:
        return complex(out[0])
    return out.reshape(np.shape(x))


def eval_eta_deflated(d: EtaDifferential, x, deflations,
                      proximity_tol: float = 1e-6):
    """eta(x) minus sum res_k / (x - s_k) for the listed singular terms.

    ``deflations`` is a sequence of (pair_index, kind, s) with kind "z" or
    "p" and s the lattice translate of that pole lying near the evaluation
    points.  The subtraction is carried out analytically so the result is
    smooth across each s.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    T = d.surface.T
    params = ThetaParams(T)
    skip = {(i, kind): s for i, kind, s in deflations}
    guarded = []
    for i, (z, p) in enumerate(d.pairs):
        if (i, "z") not in skip:
            guarded.append(z)
        if (i, "p") not in skip:
            guarded.append(p)
    if guarded and np.any(_torus_dist(xs, guarded, T) <= proximity_tol):
        raise PoleProximityError("evaluation point too close to a pole")

    cell = 0.25 * min(1.0, T)
    out = np.full(xs.shape, d.kappa, dtype=complex)
    for i, (z, p) in enumerate(d.pairs):
        for kind, pt, sign in (("z", z, 1.0), ("p", p, -1.0)):
            key = (i, kind)
            if key in skip:
                s = skip[key]
                t = xs - s
                near = np.abs(t) <= cell
                term = np.empty(xs.shape, dtype=complex)
                if np.any(near):
                    term[near] = theta1_logderiv_deflated(xs[near] - pt, params)
                if np.any(~near):
                    term[~near] = theta1_logderiv(xs[~near] - pt, params) \
                        - 1.0 / t[~near]
                out = out + sign * term
            else:
                out = out + sign * theta1_logderiv(xs - pt, params)
    if np.ndim(x) == 0:
        return complex(out[0])
    return out.reshape(np.shape(x))


def eta_h(cover: CoveringMap) -> EtaDifferential:
    """The logarithmic differential of an annulus cover, built directly:
    kappa = -2 pi i m for the half-plane variant, 0 for the disc variant."""
    if cover.variant == VARIANT_HALFPLANE:
        pairs = tuple(zip(cover.divisor.zeros, cover.divisor.poles))
        return EtaDifferential(pairs=pairs, kappa=-2j * math.pi * cover.m,
                               surface=cover.surface)
    if cover.variant == VARIANT_DISC:
        pairs = tuple((z, -z.conjugate()) for z in cover.divisor.zeros)
        return EtaDifferential(pairs=pairs, kappa=0.0 + 0.0j,
                               surface=cover.surface)
    raise InvalidArgumentError("eta is defined for annulus covers")


def normalize_eta(pairs, s: SurfaceSpec) -> EtaDifferential:
    """Third-kind differential with residue pairs (z, p), normalized so the
    real parts of both fundamental periods vanish.

    The raw periods over the loops x -> x+1 and x -> x+iT are measured by
    quadrature and the 2x2 real system for kappa is solved; the system is
    diagonal and always invertible.
    """
    if s.kind != "annulus":
        raise InvalidArgumentError("normalization needs an annulus")
    pairs = tuple((complex(z), complex(p)) for z, p in pairs)
    T = s.T
    for z, p in pairs:
        if _torus_dist(np.asarray([z]), [p], T)[0] <= 1e-12:
            raise InvalidArgumentError("z and p coincide modulo the lattice")
    if not pairs:
        return EtaDifferential(pairs=(), kappa=0.0 + 0.0j, surface=s)

    from .verify import raw_periods  # deferred: verify imports this module
    eta0 = EtaDifferential(pairs=pairs, kappa=0.0 + 0.0j, surface=s)
    p_horizontal, p_vertical = raw_periods(eta0)
    mat = np.asarray([[1.0, 0.0], [0.0, -T]])
    rhs = np.asarray([-p_horizontal.real, -p_vertical.real])
    a, b = np.linalg.solve(mat, rhs)
    return EtaDifferential(pairs=pairs, kappa=complex(a, b), surface=s)
