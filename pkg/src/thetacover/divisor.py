"""Surface specifications, divisor data, and validation.

Three covering scenarios are supported:

* half-plane target: equal numbers of simple zeros and poles on the two
  boundary lines Re x = 0 and Re x = 1/2 of the strip model, strictly
  alternating on each line (cyclically in Im mod T), with the lattice
  condition  (1/(iT)) * sum(z_j - p_j) in Z;
* disc target: zeros strictly inside the strip (poles implied at the
  reflections -conj(z)), with the lattice condition 2 Re sum(z_j) in Z;
* classical picture on the plane: finite real zeros and poles alternating
  along the real axis (no lattice condition), plus Blaschke zero sets in
  the open unit disc.

Validation returns a report, never raises, so callers can surface every
violated clause by name.  Geometry checks run on canonical representatives
(Im reduced mod T); the lattice condition value is computed from the raw
coordinates so that shifting a point by iT visibly moves the condition
value by an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CompletionError, GenerationError, InvalidArgumentError

OVAL_TOL = 1e-9          # distance to a boundary line / interior margin
COINCIDENCE_TOL = 1e-9   # minimal separation of same-line points
LATTICE_TOL = 1e-8       # default tolerance on the lattice condition
MAX_DEGREE = 64


@dataclass(frozen=True)
class SurfaceSpec:
    """The bordered surface being used as covering domain.

    kind "disc": the classical picture, genus 0 with one boundary oval.
    kind "annulus": the strip 0 <= Re x <= 1/2 modulo iT*Z, genus 0 with
    two ovals; equivalently the ring 1 <= |u| <= r with r = exp(pi/T).
    """

    kind: str
    T: float | None = None

    def __post_init__(self):
        if self.kind not in ("disc", "annulus"):
            raise InvalidArgumentError(f"unknown surface kind {self.kind!r}")
        if self.kind == "annulus":
            if self.T is None or not math.isfinite(self.T) or self.T <= 0:
                raise InvalidArgumentError("annulus needs a modulus T > 0")
            object.__setattr__(self, "T", float(self.T))
        elif self.T is not None:
            raise InvalidArgumentError("disc surface takes no modulus")

    @property
    def genus(self) -> int:
        return 0

    @property
    def ovals(self) -> int:
        return 1 if self.kind == "disc" else 2

    @property
    def genus_double(self) -> int:
        # closed double has genus 2g + k - 1
        return 2 * self.genus + self.ovals - 1

    @property
    def r(self) -> float:
        if self.kind != "annulus":
            raise InvalidArgumentError("ring radius is defined for annuli only")
        return math.exp(math.pi / self.T)


def annulus(T: float) -> SurfaceSpec:
    return SurfaceSpec(kind="annulus", T=T)


def annulus_from_radius(r: float) -> SurfaceSpec:
    if not math.isfinite(r) or r <= 1.0:
        raise InvalidArgumentError("ring radius must satisfy r > 1")
    return SurfaceSpec(kind="annulus", T=math.pi / math.log(r))


def disc() -> SurfaceSpec:
    return SurfaceSpec(kind="disc")


@dataclass(frozen=True)
class HalfPlaneDivisor:
    """Boundary zeros and poles for an annulus -> half-plane cover."""

    zeros: tuple
    poles: tuple

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))

    @property
    def degree(self) -> int:
        return len(self.zeros)


@dataclass(frozen=True)
class DiscDivisor:
    """Interior zeros for an annulus -> disc cover; poles are the
    reflections -conj(z) and are not stored.  Multiple zeros are allowed
    by repetition."""

    zeros: tuple

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def implied_poles(self) -> tuple:
        return tuple(-z.conjugate() for z in self.zeros)


@dataclass(frozen=True)
class ClassicalDivisor:
    """Finite real zeros and poles, strictly increasing and alternating."""

    zeros: tuple
    poles: tuple
    scale_sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(float(z) for z in self.zeros))
        object.__setattr__(self, "poles", tuple(float(p) for p in self.poles))

    @property
    def degree(self) -> int:
        return len(self.zeros)


@dataclass(frozen=True)
class BlaschkeDivisor:
    """Zero set of a finite Blaschke product, inside the open unit disc."""

    zeros: tuple

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))

    @property
    def degree(self) -> int:
        return len(self.zeros)


@dataclass(frozen=True)
class LatticeReport:
    """Outcome of validating a divisor: the lattice-condition value, its
    nearest integer, the deviation, and every violated clause by name."""

    condition_value: float
    m: int
    deviation: float
    valid: bool
    failures: tuple = ()


def canonical_im(y: float, T: float) -> float:
    v = math.fmod(y, T)
    if v < 0.0:
        v += T
    if v >= T:  # fmod rounding at the seam
        v -= T
    return v


def canonical_boundary_point(x: complex, T: float) -> complex:
    """Reduce so Re lands in [-1/4, 3/4) (both ovals interior) and Im in [0,T)."""
    re = math.fmod(x.real + 0.25, 1.0)
    if re < 0.0:
        re += 1.0
    return complex(re - 0.25, canonical_im(x.imag, T))


def canonical_strip_point(x: complex, T: float) -> complex:
    """Reduce so Re lands in [0, 1) and Im in [0, T)."""
    re = math.fmod(x.real, 1.0)
    if re < 0.0:
        re += 1.0
    return complex(re, canonical_im(x.imag, T))


def oval_index(x: complex, tol: float = OVAL_TOL):
    """0 for the line Re = 0, 1 for Re = 1/2 (mod 1), None otherwise."""
    re = math.fmod(x.real + 0.25, 1.0)
    if re < 0.0:
        re += 1.0
    re -= 0.25
    if abs(re) <= tol:
        return 0
    if abs(re - 0.5) <= tol:
        return 1
    return None


def _cyclic_gap(a: float, b: float, T: float) -> float:
    d = abs(a - b) % T
    return min(d, T - d)


def _check_alternation(entries, T, failures):
    """entries: list of (im, kind) on one oval, kind in {'zero','pole'}."""
    entries = sorted(entries)
    n = len(entries)
    for i in range(n):
        im_a, kind_a = entries[i]
        im_b, kind_b = entries[(i + 1) % n]
        if _cyclic_gap(im_a, im_b, T) <= COINCIDENCE_TOL:
            failures.add("coincident-points")
            return
        if n >= 2 and kind_a == kind_b:
            failures.add("alternation")


def validate_halfplane(d: HalfPlaneDivisor, s: SurfaceSpec,
                       tol: float = LATTICE_TOL) -> LatticeReport:
    """Check the structural clauses and the lattice condition
    (1/(iT)) sum(z - p) in Z for a half-plane divisor."""
    if s.kind != "annulus":
        raise InvalidArgumentError("half-plane divisors live on an annulus")
    T = s.T
    failures = set()

    N = len(d.zeros)
    if N != len(d.poles) or N < 2:
        failures.add("point-count")
    if N > MAX_DEGREE or len(d.poles) > MAX_DEGREE:
        failures.add("point-count")

    per_oval = {0: [], 1: []}
    for kind, pts in (("zero", d.zeros), ("pole", d.poles)):
        for x in pts:
            idx = oval_index(x)
            if idx is None:
                failures.add("oval-membership")
                continue
            per_oval[idx].append((canonical_im(x.imag, T), kind))

    for idx in (0, 1):
        kinds = {k for _, k in per_oval[idx]}
        if "zero" not in kinds or "pole" not in kinds:
            failures.add("oval-coverage")
        if per_oval[idx]:
            _check_alternation(per_oval[idx], T, failures)

    # raw-coordinate sum so that shifting a point by iT moves the value by 1
    total = sum(d.zeros) - sum(d.poles)
    condition_value = (total / (1j * T)).real
    m = int(round(condition_value))
    deviation = abs(condition_value - m)
    if deviation > tol:
        failures.add("lattice-condition-halfplane")
    return LatticeReport(condition_value=condition_value, m=m,
                         deviation=deviation, valid=not failures,
                         failures=tuple(sorted(failures)))


def validate_disc(d: DiscDivisor, s: SurfaceSpec,
                  tol: float = LATTICE_TOL) -> LatticeReport:
    """Check interiority and the lattice condition 2 Re sum(z) in Z."""
    if s.kind != "annulus":
        raise InvalidArgumentError("disc divisors live on an annulus")
    T = s.T
    failures = set()
    N = len(d.zeros)
    if N < 1 or N > MAX_DEGREE:
        failures.add("point-count")
    for z in d.zeros:
        re = canonical_strip_point(z, T).real
        if re < OVAL_TOL or re > 0.5 - OVAL_TOL:
            failures.add("interiority")

    condition_value = 2.0 * sum(z.real for z in d.zeros)
    m = int(round(condition_value))
    deviation = abs(condition_value - m)
    if deviation > tol:
        failures.add("lattice-condition-disc")
    return LatticeReport(condition_value=condition_value, m=m,
                         deviation=deviation, valid=not failures,
                         failures=tuple(sorted(failures)))


def validate_classical(d: ClassicalDivisor) -> LatticeReport:
    """Structural checks for the classical real-rational picture.  There is
    no lattice condition (the double is a sphere)."""
    failures = set()
    N = len(d.zeros)
    if N != len(d.poles) or N < 1 or N > MAX_DEGREE:
        failures.add("point-count")
    if d.scale_sign not in (-1, 1):
        failures.add("scale-sign")
    for seq in (d.zeros, d.poles):
        if any(b - a <= 0 for a, b in zip(seq, seq[1:])):
            failures.add("ordering")
    merged = sorted([(z, "zero") for z in d.zeros] + [(p, "pole") for p in d.poles])
    for (a, ka), (b, kb) in zip(merged, merged[1:]):
        if b - a <= COINCIDENCE_TOL:
            failures.add("coincident-points")
        if ka == kb:
            failures.add("alternation")
    return LatticeReport(condition_value=0.0, m=0, deviation=0.0,
                         valid=not failures, failures=tuple(sorted(failures)))


def validate_blaschke(d: BlaschkeDivisor) -> LatticeReport:
    failures = set()
    N = len(d.zeros)
    if N < 1 or N > MAX_DEGREE:
        failures.add("point-count")
    if any(abs(a) >= 1.0 - OVAL_TOL for a in d.zeros):
        failures.add("unit-disc-membership")
    return LatticeReport(condition_value=0.0, m=0, deviation=0.0,
                         valid=not failures, failures=tuple(sorted(failures)))


def canonicalize(d, s: SurfaceSpec):
    """Return the divisor with canonical representatives of all points."""
    if isinstance(d, HalfPlaneDivisor):
        return HalfPlaneDivisor(
            zeros=tuple(canonical_boundary_point(z, s.T) for z in d.zeros),
            poles=tuple(canonical_boundary_point(p, s.T) for p in d.poles))
    if isinstance(d, DiscDivisor):
        return DiscDivisor(
            zeros=tuple(canonical_strip_point(z, s.T) for z in d.zeros))
    return d


def complete_divisor(d, s: SurfaceSpec, free_index: int = -1):
    """Solve the lattice condition for one designated free coordinate.

    Half-plane divisors: adjusts Im of the pole at ``free_index``.
    Disc divisors: adjusts Re of the zero at ``free_index``.  The solution
    nearest the provided initial coordinate is chosen; if the forced value
    breaks alternation or interiority a CompletionError is raised.
    """
    if isinstance(d, HalfPlaneDivisor):
        T = s.T
        poles = list(d.poles)
        free = poles[free_index]
        s0 = sum(z.imag for z in d.zeros) - sum(
            p.imag for i, p in enumerate(poles) if i != free_index % len(poles))
        m = round((s0 - free.imag) / T)
        poles[free_index] = complex(free.real, s0 - m * T)
        out = canonicalize(HalfPlaneDivisor(zeros=d.zeros, poles=tuple(poles)), s)
        rep = validate_halfplane(out, s)
        if rep.failures and set(rep.failures) != {"lattice-condition-halfplane"}:
            raise CompletionError(
                f"forced coordinate breaks structure: {rep.failures}")
        if rep.deviation > 1e-12:
            raise CompletionError("completion did not reach the lattice")
        return out
    if isinstance(d, DiscDivisor):
        zeros = list(d.zeros)
        free = zeros[free_index]
        r0 = sum(canonical_strip_point(z, s.T).real
                 for i, z in enumerate(zeros) if i != free_index % len(zeros))
        # unique candidate m with m/2 - r0 inside (0, 1/2)
        m = math.floor(2.0 * r0) + 1
        re = m / 2.0 - r0
        if not (OVAL_TOL < re < 0.5 - OVAL_TOL):
            raise CompletionError(
                f"no admissible Re in (0, 1/2): forced value {re}")
        zeros[free_index] = complex(re, free.imag)
        out = canonicalize(DiscDivisor(zeros=tuple(zeros)), s)
        rep = validate_disc(out, s)
        if not rep.valid:
            raise CompletionError(f"completion failed: {rep.failures}")
        return out
    raise InvalidArgumentError(f"cannot complete divisor of type {type(d).__name__}")


TARGETS = ("halfplane", "disc", "classical-rational", "classical-blaschke")


def random_divisor(seed: int, n: int, target: str, s: SurfaceSpec | None = None):
    """Deterministic, seeded divisor generation; the output always validates.

    Annulus targets need n in [2, 64]; the classical ones allow n >= 1.
    """
    target = target.replace("_", "-")
    if target not in TARGETS:
        raise InvalidArgumentError(f"unknown target {target!r}")
    if n > MAX_DEGREE:
        raise InvalidArgumentError(f"degree cap is {MAX_DEGREE}")
    rng = np.random.default_rng(seed)

    if target in ("halfplane", "disc"):
        if s is None or s.kind != "annulus":
            raise InvalidArgumentError("annulus surface required")
        if n < 2:
            raise InvalidArgumentError(
                "annulus cover of degree 1 cannot exist: the lattice "
                "condition has no solution with a single point")
        return (_random_halfplane if target == "halfplane" else _random_disc)(
            rng, n, s)
    if n < 1:
        raise InvalidArgumentError("need at least one zero")
    if target == "classical-rational":
        return _random_classical(rng, n)
    return _random_blaschke(rng, n)


def _sorted_separated(rng, count, T, min_gap):
    for _ in range(64):
        vals = np.sort(rng.uniform(0.0, T, size=count))
        gaps = np.diff(vals, append=vals[0] + T)
        if count == 1 or np.min(gaps) >= min_gap:
            return vals
    raise GenerationError("could not separate boundary points")


def _random_halfplane(rng, n, s):
    T = s.T
    for _ in range(64):
        n0 = int(rng.integers(1, n))  # points on oval 0; both ovals nonempty
        n1 = n - n0
        zeros, poles = [], []
        for idx, cnt in ((0, n0), (1, n1)):
            ims = _sorted_separated(rng, 2 * cnt, T, 0.05 * T / (2 * cnt))
            start = int(rng.integers(0, 2))
            re = 0.0 if idx == 0 else 0.5
            for j, im in enumerate(ims):
                (zeros if (j + start) % 2 == 0 else poles).append(complex(re, im))
        try:
            out = complete_divisor(
                HalfPlaneDivisor(zeros=tuple(zeros), poles=tuple(poles)), s)
        except CompletionError:
            continue
        if validate_halfplane(out, s).valid:
            return out
    raise GenerationError("half-plane divisor generation exhausted")


def _random_disc(rng, n, s):
    T = s.T
    for _ in range(64):
        zeros = [complex(rng.uniform(0.04, 0.46), rng.uniform(0.0, T))
                 for _ in range(n)]
        try:
            out = complete_divisor(DiscDivisor(zeros=tuple(zeros)), s)
        except CompletionError:
            continue
        if validate_disc(out, s).valid:
            return out
    raise GenerationError("disc divisor generation exhausted")


def _random_classical(rng, n):
    for _ in range(64):
        vals = np.sort(rng.uniform(-3.0, 3.0, size=2 * n))
        if np.min(np.diff(vals)) < 1e-3:
            continue
        if int(rng.integers(0, 2)):
            zeros, poles = vals[0::2], vals[1::2]
        else:
            zeros, poles = vals[1::2], vals[0::2]
        sign = 1 if int(rng.integers(0, 2)) else -1
        d = ClassicalDivisor(zeros=tuple(zeros), poles=tuple(poles),
                             scale_sign=sign)
        if validate_classical(d).valid:
            return d
    raise GenerationError("classical divisor generation exhausted")


def _random_blaschke(rng, n):
    radii = rng.uniform(0.0, 0.9, size=n)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return BlaschkeDivisor(zeros=tuple(r * np.exp(1j * a)
                                       for r, a in zip(radii, angles)))
