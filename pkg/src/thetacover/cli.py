"""Command-line surface.

Commands: check, eval, trace, portrait, verify, gen.  Exit codes follow a
fixed contract: 0 success / valid, 1 mathematical invalidity or failed
verification, 2 I/O or parse error.

Divisor files are JSON:

    {
      "target": "halfplane" | "disc" | "classical-rational" | "classical-blaschke",
      "surface": {"kind": "annulus", "T": 1.0},        # or "r" (exactly one)
      "zeros": [{"re": 0.0, "im": 0.1}, ...],
      "poles": [...],      # absent for "disc" and "classical-blaschke"
      "scale": 1.0,        # optional, classical-rational
      "phase": 0.0,        # optional rotation angle in radians
      "m": 0               # optional, halfplane; must match the computed value
    }

Numeric CSV output uses 17 significant digits with "." as the decimal
separator; the point-at-infinity marker is serialized as inf,inf,inf,nan.
Portraits are binary PPM (P6, maxval 255) with deterministic bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import covering, divisor as dv, verify as vf
from .errors import CoverError, InvalidArgumentError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2

CSV_HEADER = "re_x,im_x,re_h,im_h,abs_h,arg_h"


class FileFormatError(Exception):
    """Schema-level problem with an input file (exit code 2)."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _point_list(raw, name):
    if not isinstance(raw, list):
        raise FileFormatError(f"'{name}' must be a list of points")
    out = []
    for entry in raw:
        if not isinstance(entry, dict) or "re" not in entry or "im" not in entry:
            raise FileFormatError(f"every point in '{name}' needs re and im")
        try:
            out.append(complex(float(entry["re"]), float(entry["im"])))
        except (TypeError, ValueError) as exc:
            raise FileFormatError(f"bad number in '{name}': {exc}") from None
    return tuple(out)


def _parse_surface(raw, target):
    if target in ("classical-rational", "classical-blaschke"):
        if raw not in (None, {}) and raw.get("kind", "disc") != "disc":
            raise FileFormatError("classical targets use the disc surface")
        return dv.disc()
    if not isinstance(raw, dict) or raw.get("kind") != "annulus":
        raise FileFormatError("annulus targets need surface.kind = 'annulus'")
    has_T, has_r = "T" in raw, "r" in raw
    if not has_T and not has_r:
        raise FileFormatError("surface needs exactly one of T or r")
    if has_T:
        T = float(raw["T"])
        if has_r:
            r = float(raw["r"])
            if not (r > 1.0) or abs(T - math.pi / math.log(r)) > 1e-9 * max(1.0, T):
                raise FileFormatError("surface specifies inconsistent T and r")
        return dv.annulus(T)
    return dv.annulus_from_radius(float(raw["r"]))


def load_divisor_file(path):
    """Parse a divisor file into (target, surface, divisor, extras).

    Raises FileFormatError for malformed content; the returned divisor is
    not yet validated mathematically.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from None
    if not isinstance(doc, dict):
        raise FileFormatError("top level must be an object")
    target = doc.get("target")
    if target not in dv.TARGETS:
        raise FileFormatError(f"unknown target {target!r}")
    surface = _parse_surface(doc.get("surface"), target)
    zeros = _point_list(doc.get("zeros", []), "zeros")
    extras = {
        "phase": complex(np.exp(1j * float(doc["phase"]))) if "phase" in doc else 1.0,
        "scale": float(doc.get("scale", 1.0)),
        "m": doc.get("m"),
    }

    if target == "halfplane":
        poles = _point_list(doc.get("poles", []), "poles")
        return target, surface, dv.HalfPlaneDivisor(zeros=zeros, poles=poles), extras
    if target == "disc":
        if "poles" in doc:
            raise FileFormatError("disc divisors store no poles (reflections)")
        return target, surface, dv.DiscDivisor(zeros=zeros), extras
    if target == "classical-rational":
        poles = _point_list(doc.get("poles", []), "poles")
        if any(abs(z.imag) > 1e-12 for z in zeros + poles):
            raise FileFormatError("classical-rational points must be real")
        sign = -1 if extras["scale"] < 0 else 1
        d = dv.ClassicalDivisor(zeros=tuple(sorted(z.real for z in zeros)),
                                poles=tuple(sorted(p.real for p in poles)),
                                scale_sign=sign)
        return target, surface, d, extras
    if "poles" in doc:
        raise FileFormatError("blaschke divisors store no poles (reflections)")
    return target, surface, dv.BlaschkeDivisor(zeros=zeros), extras


def validate_loaded(target, surface, d, extras, tol=dv.LATTICE_TOL):
    if target == "halfplane":
        rep = dv.validate_halfplane(d, surface, tol)
        if rep.valid and extras.get("m") is not None and int(extras["m"]) != rep.m:
            rep = dv.LatticeReport(
                condition_value=rep.condition_value, m=rep.m,
                deviation=rep.deviation, valid=False,
                failures=rep.failures + ("declared-m-mismatch",))
        return rep
    if target == "disc":
        return dv.validate_disc(d, surface, tol)
    if target == "classical-rational":
        return dv.validate_classical(d)
    return dv.validate_blaschke(d)


def build_cover(target, surface, d, extras, unchecked=False):
    if target == "halfplane":
        return covering.halfplane_cover(d, surface, unchecked=unchecked)
    if target == "disc":
        return covering.disc_cover(d, surface, phase=extras.get("phase", 1.0),
                                   unchecked=unchecked)
    if target == "classical-rational":
        return covering.rational_cover(d)
    return covering.blaschke_cover(d, phase=extras.get("phase", 1.0))


def _report_json(target, rep: dv.LatticeReport) -> str:
    return json.dumps({
        "target": target,
        "valid": rep.valid,
        "condition_value": rep.condition_value,
        "m": rep.m,
        "deviation": rep.deviation,
        "failures": list(rep.failures),
    }, sort_keys=True, indent=2)


def _csv_row(x: complex, value, infinite: bool) -> str:
    if infinite:
        return ",".join([_fmt(x.real), _fmt(x.imag), "inf", "inf", "inf", "nan"])
    return ",".join([_fmt(x.real), _fmt(x.imag), _fmt(value.real),
                     _fmt(value.imag), _fmt(abs(value)),
                     _fmt(math.atan2(value.imag, value.real))])


def cmd_check(args, out) -> int:
    try:
        target, surface, d, extras = load_divisor_file(args.path)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = validate_loaded(target, surface, d, extras, tol=args.tol)
    print(_report_json(target, rep), file=out)
    return EXIT_OK if rep.valid else EXIT_INVALID


def _parse_pair(text, what):
    parts = text.split(",")
    if len(parts) != 2:
        raise FileFormatError(f"{what} must be 're,im'")
    return complex(float(parts[0]), float(parts[1]))


def _parse_size(text):
    w, _, h = text.partition("x")
    return int(w), int(h)


def _parse_window(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise FileFormatError("window must be 'x0,y0,x1,y1'")
    return vals


def _default_window(surface):
    if surface.kind == "annulus":
        return [0.0, 0.0, 0.5, surface.T]
    return [-1.0, -1.0, 1.0, 1.0]


def _grid_points(window, width, height):
    x0, y0, x1, y1 = window
    xs = np.linspace(x0, x1, width)
    ys = np.linspace(y1, y0, height)  # top row first
    return xs[None, :] + 1j * ys[:, None]


def cmd_eval(args, out) -> int:
    try:
        target, surface, d, extras = load_divisor_file(args.path)
        if args.point is None and args.grid is None:
            raise FileFormatError("need --point or --grid")
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = validate_loaded(target, surface, d, extras, tol=args.tol)
    if not rep.valid:
        print(_report_json(target, rep), file=sys.stderr)
        return EXIT_INVALID
    cover = build_cover(target, surface, d, extras)
    print(CSV_HEADER, file=out)
    if args.point is not None:
        try:
            x = _parse_pair(args.point, "--point")
        except (FileFormatError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        vals, mask = covering.evaluate_many(cover, np.asarray([x]))
        print(_csv_row(x, vals[0], bool(mask[0])), file=out)
        return EXIT_OK
    try:
        width, height = _parse_size(args.grid)
        window = (_parse_window(args.window) if args.window
                  else _default_window(surface))
    except (FileFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    pts = _grid_points(window, width, height)
    vals, mask = covering.evaluate_many(cover, pts.ravel())
    for x, v, inf in zip(pts.ravel(), vals, mask):
        print(_csv_row(x, v, bool(inf)), file=out)
    return EXIT_OK


def cmd_trace(args, out) -> int:
    try:
        target, surface, d, extras = load_divisor_file(args.path)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = validate_loaded(target, surface, d, extras, tol=args.tol)
    if not rep.valid:
        print(_report_json(target, rep), file=sys.stderr)
        return EXIT_INVALID
    cover = build_cover(target, surface, d, extras)
    n = args.samples
    if target in ("halfplane", "disc"):
        if args.oval not in (0, 1):
            print("error: --oval must be 0 or 1", file=sys.stderr)
            return EXIT_PARSE
        re = 0.0 if args.oval == 0 else 0.5
        pts = re + 1j * surface.T * np.arange(n) / n
    elif target == "classical-rational":
        pts = np.tan(math.pi * ((np.arange(n) + 0.5) / n - 0.5)).astype(complex)
    else:
        pts = np.exp(2j * math.pi * np.arange(n) / n)
    vals, mask = covering.evaluate_many(cover, pts)
    print(CSV_HEADER, file=out)
    for x, v, inf in zip(pts, vals, mask):
        print(_csv_row(complex(x), v, bool(inf)), file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# portraits

COLORINGS = ("phase-hue", "modulus-bands", "combined")


def _hsv_to_rgb(h, s, v):
    """Vectorized HSV -> RGB on arrays in [0, 1]."""
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(int) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return r, g, b


def render_portrait(cover, window, width, height, coloring) -> bytes:
    """Deterministic binary PPM (P6) of the covering map on the window.

    phase-hue maps arg h in (-pi, pi] linearly to hue; modulus-bands shade
    by the fractional part of log2 |h| (bands at |h| = 2^k); pixels at
    poles get the white sentinel color."""
    if not (16 <= width <= 8192 and 16 <= height <= 8192):
        raise InvalidArgumentError("portrait size must be within [16, 8192]")
    if coloring not in COLORINGS:
        raise InvalidArgumentError(f"unknown coloring {coloring!r}")
    pts = _grid_points(window, width, height)
    vals, inf_mask = covering.evaluate_many(cover, pts.ravel())
    vals = vals.reshape(height, width)
    inf_mask = inf_mask.reshape(height, width)

    with np.errstate(divide="ignore", invalid="ignore"):
        hue = (np.angle(vals) + math.pi) / (2.0 * math.pi) % 1.0
        mag = np.abs(vals)
        band = np.log2(np.where(mag > 0, mag, 1.0))
        band = band - np.floor(band)
        shade = 0.55 + 0.45 * band
    if coloring == "phase-hue":
        r, g, b = _hsv_to_rgb(hue, np.ones_like(hue), np.ones_like(hue))
    elif coloring == "modulus-bands":
        r = g = b = shade
    else:
        r, g, b = _hsv_to_rgb(hue, np.ones_like(hue), shade)

    rgb = np.stack([r, g, b], axis=-1)
    rgb = np.where(inf_mask[..., None], 1.0, rgb)
    rgb = np.nan_to_num(rgb, nan=1.0, posinf=1.0, neginf=0.0)
    data = np.floor(np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + data.tobytes()


def cmd_portrait(args, out) -> int:
    try:
        target, surface, d, extras = load_divisor_file(args.path)
        width, height = _parse_size(args.size)
        window = (_parse_window(args.window) if args.window
                  else _default_window(surface))
    except (FileFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = validate_loaded(target, surface, d, extras, tol=args.tol)
    if not rep.valid:
        print(_report_json(target, rep), file=sys.stderr)
        return EXIT_INVALID
    cover = build_cover(target, surface, d, extras)
    try:
        blob = render_portrait(cover, window, width, height, args.coloring)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        with open(args.out, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification command

def _verify_annulus(cover, tol):
    checks = []
    checks.extend(vf.single_valuedness_check(cover, tol=max(tol, 1e-9)).checks)
    checks.extend(vf.boundary_check(cover, tol=max(tol, 1e-9)).checks)
    try:
        total = vf.boundary_winding_total(cover)
        checks.append(vf.CheckResult(
            name="degree-winding", measured_error=abs(total - cover.degree),
            tolerance=0.0, passed=total == cover.degree,
            details=f"boundary winding {total}, degree {cover.degree}"))
    except CoverError as exc:
        checks.append(vf.CheckResult(name="degree-winding",
                                     measured_error=math.inf, tolerance=0.0,
                                     passed=False, details=str(exc)))
    try:
        eta = covering.eta_h(cover)
        vertical, horizontal = vf.fundamental_periods(eta)
        for name, val in (("eta-period-vertical", vertical),
                          ("eta-period-horizontal", horizontal)):
            n = vf.nearest_period_multiple(val, tol=max(tol, 1e-7))
            err = (abs(val / (2j * math.pi) - n) if n is not None
                   else abs(val / (2j * math.pi)))
            checks.append(vf.CheckResult(
                name=name, measured_error=float(err),
                tolerance=max(tol, 1e-7), passed=n is not None,
                details=f"period/(2 pi i) = {val / (2j * math.pi):.3e}"))
    except CoverError as exc:
        checks.append(vf.CheckResult(name="eta-periods",
                                     measured_error=math.inf, tolerance=0.0,
                                     passed=False, details=str(exc)))
    return checks


def _verify_rational(cover, tol):
    checks = list(vf.boundary_check(cover).checks)
    blaschke = covering.rational_to_blaschke(cover)
    us = (np.linspace(-3, 3, 16)[:, None]
          + 1j * np.linspace(0.0, 3.0, 16)[None, :]).ravel()
    lhs, lmask = covering.evaluate_many(cover, us)
    with np.errstate(invalid="ignore"):
        lhs = np.where(lmask, 1.0, (lhs - 1j) / (lhs + 1j))
    rhs, _ = covering.evaluate_many(blaschke, (us - 1j) / (us + 1j))
    err = float(np.max(np.abs(lhs - rhs)))
    checks.append(vf.CheckResult(
        name="moebius-composition", measured_error=err,
        tolerance=max(tol, 1e-8), passed=err <= max(tol, 1e-8),
        details="l(R(u)) vs B(l(u)) on a half-plane grid"))
    return checks


def cmd_verify(args, out) -> int:
    try:
        target, surface, d, extras = load_divisor_file(args.path)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = validate_loaded(target, surface, d, extras, tol=args.tol)
    checks = [vf.CheckResult(name="divisor-validation",
                             measured_error=rep.deviation,
                             tolerance=args.tol, passed=rep.valid,
                             details=",".join(rep.failures))]
    structural = set(rep.failures) - {"lattice-condition-halfplane",
                                      "lattice-condition-disc",
                                      "declared-m-mismatch"}
    if structural:
        report = vf.VerificationReport(checks=tuple(checks))
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2), file=out)
        return EXIT_INVALID
    try:
        cover = build_cover(target, surface, d, extras, unchecked=True)
        if target in ("halfplane", "disc"):
            checks.extend(_verify_annulus(cover, args.tol))
        elif target == "classical-rational":
            checks.extend(_verify_rational(cover, args.tol))
        else:
            checks.extend(vf.boundary_check(cover).checks)
    except CoverError as exc:
        checks.append(vf.CheckResult(name="construction",
                                     measured_error=math.inf, tolerance=0.0,
                                     passed=False, details=str(exc)))
    report = vf.VerificationReport(checks=tuple(checks))
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2), file=out)
    return EXIT_OK if report.overall else EXIT_INVALID


# ---------------------------------------------------------------------------
# generation

def _point_obj(x: complex) -> dict:
    return {"re": x.real, "im": x.imag}


def divisor_to_file_dict(target, surface, d) -> dict:
    doc = {"target": target}
    if target in ("halfplane", "disc"):
        doc["surface"] = {"kind": "annulus", "T": surface.T}
    else:
        doc["surface"] = {"kind": "disc"}
    if target == "halfplane":
        doc["zeros"] = [_point_obj(z) for z in d.zeros]
        doc["poles"] = [_point_obj(p) for p in d.poles]
    elif target == "disc":
        doc["zeros"] = [_point_obj(z) for z in d.zeros]
    elif target == "classical-rational":
        doc["zeros"] = [{"re": z, "im": 0.0} for z in d.zeros]
        doc["poles"] = [{"re": p, "im": 0.0} for p in d.poles]
        doc["scale"] = float(d.scale_sign)
    else:
        doc["zeros"] = [_point_obj(z) for z in d.zeros]
    return doc


def cmd_gen(args, out) -> int:
    target = args.target.replace("_", "-")
    try:
        surface = dv.annulus(args.T) if target in ("halfplane", "disc") else dv.disc()
        d = dv.random_divisor(args.seed, args.n, target, surface)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(divisor_to_file_dict(target, surface, d),
                     sort_keys=True, indent=2), file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="thetacover",
        description="Ramified coverings of the half-plane and disc by an "
                    "annulus, built from theta-function products.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("path", help="divisor JSON file")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="tolerance forwarded to all checks")

    p = sub.add_parser("check", help="validate a divisor file")
    add_common(p)

    p = sub.add_parser("eval", help="evaluate the cover at a point or grid")
    add_common(p)
    p.add_argument("--point", help="single point 're,im'")
    p.add_argument("--grid", help="grid size 'WxH'")
    p.add_argument("--window", help="rectangle 'x0,y0,x1,y1' (y1 is the top)")

    p = sub.add_parser("trace", help="trace the boundary image curve")
    add_common(p)
    p.add_argument("--oval", type=int, default=0, help="oval index 0 or 1")
    p.add_argument("--samples", type=int, default=256)

    p = sub.add_parser("portrait", help="render a phase portrait (PPM P6)")
    add_common(p)
    p.add_argument("--size", default="256x256", help="pixels 'WxH'")
    p.add_argument("--window", help="rectangle 'x0,y0,x1,y1'")
    p.add_argument("--coloring", default="phase-hue", choices=COLORINGS)
    p.add_argument("--out", required=True, help="output PPM file")

    p = sub.add_parser("verify", help="run the verification suite on a file")
    add_common(p)

    p = sub.add_parser("gen", help="generate a seeded random divisor file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="covering degree")
    p.add_argument("--target", required=True,
                   help="halfplane | disc | classical-rational | classical-blaschke")
    p.add_argument("--T", type=float, default=1.0, help="annulus modulus")
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "check": cmd_check,
        "eval": cmd_eval,
        "trace": cmd_trace,
        "portrait": cmd_portrait,
        "verify": cmd_verify,
        "gen": cmd_gen,
    }
    return handlers[args.command](args, out)


def entry():
    sys.exit(main())
