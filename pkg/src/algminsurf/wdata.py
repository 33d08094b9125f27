"""Weierstrass surface data on algebraic curves and its membership validation.

A surface is a pair (curve, F) where F = (f1, f2, f3) are rational functions
of the curve coordinates; the immersion is ``x + Re integral F dz``.  The
``validate`` entry point checks the six membership conditions for declared
signature v = (genus nu, Gauss degree k, puncture count s): polynomial degree
shape, curve model and basepoint, component degree bounds, conformality plus
Gauss degree, polar count plus metric regularity, and vanishing real periods.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import curve as cv
from . import quadrature as qd
from .curve import (
    AlgebraicCurve,
    BivariatePolynomial,
    CurvePoint,
    Cycle,
    coefficient_distance,
    zero_poly,
)
from .errors import (
    AtPole,
    CountMismatch,
    DegenerateGauss,
    SignatureMismatch,
    Unsupported,
)

_INF = complex(math.inf, 0.0)

CONFORMALITY_TOL = 1e-12
PERIOD_TOL = 1e-8
REGULARITY_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceSignature:
    """Declared invariants: genus, Gauss-map degree, puncture count."""

    nu: int
    k: int
    s: int

    def __post_init__(self):
        if self.nu < 0 or self.k < 1 or self.s < 1:
            raise ValueError("signature requires nu >= 0, k >= 1, s >= 1")


@dataclass(frozen=True)
class RationalOnCurve:
    """Quotient of two bivariate polynomials restricted to a curve."""

    num: BivariatePolynomial
    den: BivariatePolynomial

    def __call__(self, z, w):
        return self.num(z, w) / self.den(z, w)

    @classmethod
    def from_univariate(cls, num_z, den_z=(1.0,)) -> "RationalOnCurve":
        return cls(BivariatePolynomial.univariate(num_z),
                   BivariatePolynomial.univariate(den_z))

    @classmethod
    def constant(cls, a) -> "RationalOnCurve":
        return cls(BivariatePolynomial.constant(a), BivariatePolynomial.constant(1.0))

    def scaled(self, a) -> "RationalOnCurve":
        if self.num.is_zero():
            return self
        return RationalOnCurve(self.num * a, self.den)


@dataclass(frozen=True)
class WeierstrassData:
    """A surface: curve, component triple F, base translation and basepoint."""

    signature: SurfaceSignature
    curve: AlgebraicCurve
    F: tuple  # (f1, f2, f3) RationalOnCurve
    translation: np.ndarray
    basepoint: CurvePoint

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3)
        t.setflags(write=False)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "F", tuple(self.F))

    def component_values(self, z, w) -> np.ndarray:
        """Stack of (f1, f2, f3) values; last axis indexes the component."""
        return np.stack([f(z, w) for f in self.F], axis=-1)


@dataclass(frozen=True)
class PolarSet:
    """Places where the component form F dz has a pole."""

    points: tuple  # CurvePoint, z = inf marks an infinite place
    cardinality: int

    @property
    def finite_points(self):
        return tuple(p for p in self.points if not p.at_infinity)


def from_gauss_height(g_num, g_den, h_num, h_den, signature: SurfaceSignature,
                      translation=(0.0, 0.0, 0.0), basepoint: complex = 0.0) -> WeierstrassData:
    """Genus-zero surface from a rational Gauss map g and height density h.

    The components are assembled as f1 = (1/g - g) h / 2, f2 = i (1/g + g) h / 2
    and f3 = h, which makes the conformality identity hold by construction.
    """
    gn = np.atleast_1d(np.asarray(g_num, dtype=complex))
    gd = np.atleast_1d(np.asarray(g_den, dtype=complex))
    hn = np.atleast_1d(np.asarray(h_num, dtype=complex))
    hd = np.atleast_1d(np.asarray(h_den, dtype=complex))
    gn2 = npoly.polymul(gn, gn)
    gd2 = npoly.polymul(gd, gd)
    cross = npoly.polymul(gn, gd)
    f1n = npoly.polymul(0.5 * npoly.polysub(gd2, gn2), hn)
    f2n = npoly.polymul(0.5j * npoly.polyadd(gd2, gn2), hn)
    f12d = npoly.polymul(cross, hd)
    f1n, d1 = _cancel_univariate(f1n, f12d)
    f2n, d2 = _cancel_univariate(f2n, f12d)
    f3n, d3 = _cancel_univariate(hn, hd)
    sphere = AlgebraicCurve.riemann_sphere()
    F = (
        RationalOnCurve.from_univariate(f1n, d1),
        RationalOnCurve.from_univariate(f2n, d2),
        RationalOnCurve.from_univariate(f3n, d3),
    )
    bp = CurvePoint(complex(basepoint), 0.0)
    return WeierstrassData(signature, sphere, F, np.asarray(translation, float), bp)


def _cancel_univariate(num, den, tol: float = 1e-9):
    """Cancel shared roots of two univariate coefficient vectors."""
    num = np.trim_zeros(np.atleast_1d(np.asarray(num, complex)), "b")
    den = np.trim_zeros(np.atleast_1d(np.asarray(den, complex)), "b")
    if num.size == 0:
        return np.zeros(1, complex), np.ones(1, complex)
    if den.size == 0:
        raise ZeroDivisionError("zero denominator")
    rn = list(np.roots(num[::-1])) if num.size > 1 else []
    rd = list(np.roots(den[::-1])) if den.size > 1 else []
    scale = 1.0 + max([abs(r) for r in rn + rd], default=0.0)
    keep_d = rd[:]
    keep_n = []
    for r in rn:
        hit = next((i for i, s in enumerate(keep_d) if abs(r - s) < tol * scale), None)
        if hit is None:
            keep_n.append(r)
        else:
            keep_d.pop(hit)
    lead = num[-1] / den[-1]
    new_num = lead * npoly.polyfromroots(keep_n)
    new_den = npoly.polyfromroots(keep_d)
    return np.atleast_1d(new_num), np.atleast_1d(new_den)


# ---------------------------------------------------------------------------
# derived quantities on the curve
# ---------------------------------------------------------------------------

def curve_derivative(f: RationalOnCurve, curve: AlgebraicCurve) -> RationalOnCurve:
    """d/dz of a rational function along the curve (chain rule through w)."""
    n, d = f.num, f.den
    nz, nw = n.partial_z(), n.partial_w()
    dz_, dw_ = d.partial_z(), d.partial_w()
    if curve.form == "rational":
        num = nz * d - n * dz_
        return RationalOnCurve(num if not num.is_zero() else zero_poly(), d * d)
    pz, pw = curve.p.partial_z(), curve.p.partial_w()
    # dw/dz = -pz/pw; multiply through by pw to stay polynomial
    num = (nz * d - n * dz_) * pw - (nw * d - n * dw_) * pz
    den = d * d * pw
    num = cv.reduce_w(num, curve).chop()
    den = cv.reduce_w(den, curve).chop()
    return RationalOnCurve(num, den)


def gauss_map(W: WeierstrassData) -> RationalOnCurve:
    """The meromorphic Gauss map g = f3 / (f1 - i f2), reduced on the curve."""
    f1, f2, f3 = W.F
    a_num = f1.num * f2.den - 1j * (f2.num * f1.den)
    a_den = f1.den * f2.den
    a_num = cv.reduce_w(a_num, W.curve).chop()
    if a_num.is_zero():
        raise DegenerateGauss("f1 - i f2 vanishes identically")
    g_num = cv.reduce_w(f3.num * a_den, W.curve).chop()
    g_den = cv.reduce_w(f3.den * a_num, W.curve).chop()
    if W.curve.form == "rational":
        n, d = _cancel_univariate(g_num.coeffs[:, 0], g_den.coeffs[:, 0])
        return RationalOnCurve.from_univariate(n, d)
    return RationalOnCurve(g_num, g_den)


def gauss_degree(W: WeierstrassData):
    """Gauss-map degree by two routes: algebraic reduction and preimage counts.

    Returns (counted, algebraic_or_None, agree).  The algebraic value exists
    for the sphere model and for curves in the normalized single-pole shape.
    """
    g = gauss_map(W)
    counted = cv.function_degree_by_counting(W.curve, g.num, g.den)
    algebraic = None
    if W.curve.form == "rational":
        algebraic = max(g.num.deg_z, g.den.deg_z)
    elif cv.is_normalized_model(W.curve):
        nu = W.curve.p.deg_w - 1
        algebraic = max(_monomial_degree_max(g.num, nu), _monomial_degree_max(g.den, nu))
    agree = algebraic is None or algebraic == counted
    return counted, algebraic, agree


def _monomial_degree_max(poly: BivariatePolynomial, nu: int) -> int:
    return max(l * (nu + 1) + j * (nu + 2) for l, j, _ in poly.terms())


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _halton(n: int, base: int) -> np.ndarray:
    out = np.zeros(n)
    for i in range(n):
        f, r, k = 1.0, 0.0, i + 1
        while k > 0:
            f /= base
            r += f * (k % base)
            k //= base
        out[i] = r
    return out


def sample_points(W: WeierstrassData, n: int = 1024, n_near: int = 64,
                  near_radius: float = 1e-2):
    """Quasi-random curve points per sheet plus rings near special points.

    Special points are the finite polar points and the branch values; samples
    landing inside the pole clearance are dropped.
    """
    curve = W.curve
    specials = [p.z for p in polar_set(W, strict=False).points if not p.at_infinity]
    radius = 2.0 * (1.0 + max([abs(b) for b in curve.branch_values] +
                              [abs(s) for s in specials] + [1.0]))
    u, v = _halton(n, 2), _halton(n, 3)
    zs = radius * np.sqrt(u) * np.exp(2j * np.pi * v)
    keep = np.ones(len(zs), dtype=bool)
    for s in list(specials) + list(curve.branch_values):
        keep &= np.abs(zs - s) > max(2 * near_radius, curve.clearance)
    zs = zs[keep]
    rings = []
    for s in list(specials) + list(curve.branch_values):
        ang = 2j * np.pi * np.arange(n_near) / n_near
        rings.append(s + near_radius * np.exp(ang))
    ring_zs = np.concatenate(rings) if rings else np.zeros(0, complex)
    pts = []
    for z in np.concatenate([zs, ring_zs]):
        for w in cv.fiber(curve, complex(z)):
            pts.append(CurvePoint(complex(z), complex(w)))
    return pts


def _stack(points):
    z = np.array([p.z for p in points])
    w = np.array([p.w for p in points])
    return z, w


# ---------------------------------------------------------------------------
# membership checks
# ---------------------------------------------------------------------------

def conformality_residual(W: WeierstrassData, samples=None) -> float:
    """Max over samples of |f1^2 + f2^2 + f3^2| / max_j |f_j|^2."""
    if samples is None:
        samples = sample_points(W)
    z, w = _stack(samples)
    vals = W.component_values(z, w)
    num = np.abs(np.sum(vals * vals, axis=-1))
    den = np.max(np.abs(vals) ** 2, axis=-1)
    ok = den > 0
    if not np.any(ok):
        return math.inf
    return float(np.max(num[ok] / den[ok]))


def regularity_check(W: WeierstrassData, samples=None, floor: float = REGULARITY_FLOOR) -> bool:
    """Metric nondegeneracy: sum |f_j|^2 stays above the floor off the poles.

    Near branch values the local-coordinate factor |dz/dt|^2 = 4 |z - b| is
    applied; at branch and infinite places off the polar set the vanishing
    order of the form is checked instead of a sampled value.
    """
    if samples is None:
        samples = sample_points(W)
    curve = W.curve
    z, w = _stack(samples)
    vals = W.component_values(z, w)
    dens = np.sum(np.abs(vals) ** 2, axis=-1)
    weight = np.ones(len(z))
    for b in curve.branch_values:
        d = np.abs(z - b)
        near = d < 0.1
        weight[near] = np.minimum(weight[near], 4.0 * d[near])
    if np.min(dens * weight) <= floor:
        return False
    polar = polar_set(W, strict=False)
    if _common_zero_off_poles(W, polar):
        return False
    for place in _special_places(W):
        if _place_in(place, polar):
            continue
        orders = [_form_order_at_place(W, f, place) for f in W.F]
        if min(orders) != 0:
            return False
    return True


def _common_zero_off_poles(W: WeierstrassData, polar: PolarSet) -> bool:
    """True when all three components vanish together at an ordinary point."""
    curve = W.curve
    lead = next((f for f in W.F if not f.num.is_zero()), None)
    if lead is None:
        return True
    if curve.form == "rational":
        num = np.trim_zeros(lead.num.coeffs[:, 0], "b")
        roots = np.roots(num[::-1]) if num.size > 1 else []
        cands = [CurvePoint(complex(r), 0.0) for r in roots]
    else:
        cands = []
        for z0 in _curve_zero_projections(curve, lead.num):
            if any(abs(z0 - b) < 1e-6 * (1 + abs(b)) for b in curve.branch_values):
                continue  # branch places are handled by the order check
            for w0 in cv.fiber(curve, complex(z0)):
                cands.append(CurvePoint(complex(z0), complex(w0)))
    for pt in cands:
        near_pole = any((not q.at_infinity) and abs(q.z - pt.z) < 1e-6 * (1 + abs(pt.z))
                        for q in polar.points)
        if near_pole:
            continue
        vals = []
        degenerate = False
        for f in W.F:
            d = f.den(pt.z, pt.w)
            if abs(d) < 1e-12 * (1.0 + f.den.max_abs_coeff):
                degenerate = True
                break
            vals.append(abs(f.num(pt.z, pt.w) / d))
        if degenerate:
            continue
        scale = 1.0 + max(f.num.max_abs_coeff / max(1e-30, abs(f.den(pt.z, pt.w)))
                          for f in W.F)
        if max(vals) < 1e-8 * scale:
            return True
    return False


def polar_set(W: WeierstrassData, strict: bool = True) -> PolarSet:
    """All places where some component of F dz has a pole.

    Finite candidates come from denominator zeros lifted to the curve;
    infinite places are always inspected.  Orders are measured numerically
    through a local parameter, so branch places are handled uniformly.
    Raises CountMismatch in strict mode when the count differs from s.
    """
    places = []
    seen = []
    for place in _candidate_places(W):
        key = place[:3]
        if any(_same_place(key, s) for s in seen):
            continue
        seen.append(key)
        orders = [_form_order_at_place(W, f, place) for f in W.F]
        if min(orders) <= -1:
            places.append(place)
    pts = tuple(_place_point(p) for p in places)
    ps = PolarSet(pts, len(pts))
    if strict and ps.cardinality != W.signature.s:
        raise CountMismatch(
            f"polar set has {ps.cardinality} points, signature declares {W.signature.s}")
    return ps


# place encoding: ("finite", z0, w0, branched) | ("inf", sign_or_0, ramified)

def _candidate_places(W: WeierstrassData):
    curve = W.curve
    out = []
    zs = set()
    for f in W.F:
        if curve.form == "rational":
            den = np.trim_zeros(f.den.coeffs[:, 0], "b")
            roots = np.roots(den[::-1]) if den.size > 1 else []
        else:
            roots = _curve_zero_projections(curve, f.den)
        for r in roots:
            zs.add(complex(np.round(np.real(r), 9) + 1j * np.round(np.imag(r), 9)))
    for z0 in sorted(zs, key=lambda t: (t.real, t.imag)):
        branched = any(abs(z0 - b) < 1e-6 * (1 + abs(b)) for b in curve.branch_values)
        if branched or curve.form == "rational":
            w0 = cv.fiber(curve, z0)[0] if curve.form != "rational" else 0.0
            out.append(("finite", z0, complex(w0), branched))
        else:
            for w0 in cv.fiber(curve, z0):
                out.append(("finite", z0, complex(w0), False))
    out.extend(_infinite_places(curve))
    return out


def _infinite_places(curve: AlgebraicCurve):
    if curve.form == "rational":
        return [("inf", 0, False)]
    if curve.form == "hyperelliptic":
        if curve.branch_at_infinity:
            return [("inf", 0, True)]
        return [("inf", +1, False), ("inf", -1, False)]
    raise Unsupported("polar analysis at infinity needs the sphere or a hyperelliptic model")


def _curve_zero_projections(curve, poly):
    """z-projections of {p = 0, poly = 0}, via the w-resultant."""
    if poly.deg_w == 0:
        den = np.trim_zeros(poly.coeffs[:, 0], "b")
        return list(np.roots(den[::-1])) if den.size > 1 else []
    bound = curve.p.deg_z * poly.deg_w + poly.deg_z * curve.p.deg_w + 2
    m = bound + 8
    radius = 1.3177
    samples = np.array([
        cv._sylvester_det(curve.p.w_coeffs_at(z), poly.w_coeffs_at(z))
        for z in radius * np.exp(2j * np.pi * np.arange(m) / m)
    ])
    coeffs = cv._poly_from_samples(samples, radius)
    if coeffs.size <= 1:
        return []
    return list(np.roots(coeffs[::-1]))


def _same_place(a, b) -> bool:
    if a[0] != b[0]:
        return False
    if a[0] == "inf":
        return a[1] == b[1]
    tol = 1e-7 * (1.0 + abs(a[1]))
    if abs(a[1] - b[1]) > tol:
        return False
    return abs(a[2] - b[2]) <= 1e-6 * (1.0 + abs(a[2]))


def _place_in(place, polar: PolarSet) -> bool:
    for q in polar.points:
        if place[0] == "inf" and q.at_infinity:
            if q.w == place[1] or place[1] == 0:
                return True
        elif place[0] == "finite" and not q.at_infinity:
            if abs(q.z - place[1]) < 1e-6 * (1 + abs(q.z)):
                if place[3] or abs(q.w - place[2]) < 1e-5 * (1 + abs(q.w)):
                    return True
    return False


def _place_point(place) -> CurvePoint:
    if place[0] == "inf":
        return CurvePoint(_INF, complex(place[1]) if place[1] else _INF)
    return CurvePoint(place[1], place[2])


def _place_param(W: WeierstrassData, place):
    """Local parameterization t -> (z, w, dz/dt) near a place."""
    curve = W.curve
    kind = place[0]
    if kind == "finite":
        _, z0, w0, branched = place
        if curve.form == "rational":
            return lambda t: (z0 + t, 0.0, 1.0)
        if branched:
            def param(t):
                z = z0 + t * t
                r = cmath.sqrt(curve.q_at(z))
                # either sign tends to w0 = 0 at a branch point of w^2 = q
                return z, r, 2.0 * t
            return param

        def param(t):
            z = z0 + t
            w = _nearest_sheet(curve, z, w0)
            return z, w, 1.0
        return param
    _, sign, ramified = place
    if curve.form == "rational":
        return lambda t: (1.0 / t, 0.0, -1.0 / (t * t))
    if ramified:
        def param(t):
            z = 1.0 / (t * t)
            w = cmath.sqrt(curve.q_at(z))
            return z, w, -2.0 / t ** 3
        return param

    def param(t):
        z = 1.0 / t
        w = sign * cmath.sqrt(curve.q_at(z))
        return z, w, -1.0 / (t * t)
    return param


def _nearest_sheet(curve, z, w0):
    ws = cv.fiber(curve, z)
    return complex(ws[int(np.argmin(np.abs(ws - w0)))])


def _form_order_at_place(W: WeierstrassData, f: RationalOnCurve, place,
                         t1: float = 1e-3, t2: float = 2e-3) -> float:
    """Vanishing order of f dz at a place, by a two-scale growth fit."""
    param = _place_param(W, place)
    vals = []
    for t in (t1, t2):
        z, w, dzdt = param(t)
        vals.append(complex(f(z, w)) * dzdt)
    a1, a2 = abs(vals[0]), abs(vals[1])
    if a1 < 1e-280 and a2 < 1e-280:
        return math.inf
    slope = math.log(a2 / a1) / math.log(t2 / t1)
    return int(round(slope))


def _special_places(W: WeierstrassData):
    curve = W.curve
    out = []
    for b in curve.branch_values:
        w0 = 0.0 if curve.form == "rational" else 0.0
        out.append(("finite", complex(b), complex(w0), True))
    out.extend(_infinite_places(curve))
    return out


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

def membership_cycles(W: WeierstrassData):
    """Canonical homology cycles plus one small loop per finite polar point."""
    curve = W.curve
    cycles = list(cv.canonical_cycles(curve)) if curve.form != "general" else []
    polar = polar_set(W, strict=False)
    finite = [p for p in polar.points if not p.at_infinity]
    anchors = [p.z for p in finite] + list(curve.branch_values)
    for i, p in enumerate(finite):
        others = [a for a in anchors if abs(a - p.z) > 1e-9]
        rad = 0.25 * min((abs(a - p.z) for a in others), default=1.0)
        rad = min(max(rad, 10 * curve.clearance), 1.0)
        if curve.form == "rational":
            start = CurvePoint(p.z + rad, 0.0)
        else:
            start = cv.lift(curve, p.z + rad, _nearest_sheet(curve, p.z + rad, p.w),
                            check_branch=False)
        loop = cv.circle_path(curve, p.z, rad, start=start, n=96)
        cycles.append(Cycle.from_path(loop, name=f"pole{i + 1}"))
    return cycles


def period_residual(W: WeierstrassData, cycles=None) -> np.ndarray:
    """Real parts of the component periods, one 3-vector per cycle."""
    if cycles is None:
        cycles = membership_cycles(W)
    out = np.zeros((len(cycles), 3))
    for i, cyc in enumerate(cycles):
        val = qd.integrate_cycle(W.curve, cyc, lambda z, w: W.component_values(z, w))
        out[i] = np.real(np.asarray(val))
    return out


def cycle_periods(W: WeierstrassData, cycle: Cycle) -> np.ndarray:
    """Full complex component periods over one cycle."""
    val = qd.integrate_cycle(W.curve, cycle, lambda z, w: W.component_values(z, w))
    return np.asarray(val, dtype=complex)


# ---------------------------------------------------------------------------
# validation report
# ---------------------------------------------------------------------------

@dataclass
class CheckRecord:
    name: str
    ok: bool
    measured: float | None = None
    threshold: float | None = None
    note: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def record(self, name, ok, measured=None, threshold=None, note=""):
        self.checks.append(CheckRecord(name, bool(ok), measured, threshold, note))

    def __getitem__(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def render(self) -> str:
        lines = ["membership-report"]
        for c in self.checks:
            parts = [f"check {c.name}", "pass" if c.ok else "FAIL"]
            if c.measured is not None:
                parts.append(f"measured={c.measured:.6g}")
            if c.threshold is not None:
                parts.append(f"threshold={c.threshold:.6g}")
            if c.note:
                parts.append(f"note={c.note}")
            lines.append(" ".join(parts))
        lines.append(f"verdict {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def validate(W: WeierstrassData, samples=None) -> ValidationReport:
    """Run the six membership checks and collect a report (never raises)."""
    rep = ValidationReport()
    nu, k, s = W.signature.nu, W.signature.k, W.signature.s
    curve = W.curve
    if samples is None:
        try:
            samples = sample_points(W)
        except Exception as e:  # sampling needs the polar scan to succeed
            rep.record("degree_shape", False, note=f"sampling failed: {e}")
            return rep

    # 1: polynomial degree shape and irreducibility
    if curve.form == "rational":
        rep.record("degree_shape", True, note="sphere model (single coordinate)")
    else:
        shape_ok = (curve.p.deg_z - 1 == curve.p.deg_w == nu + 1)
        irr = cv.check_irreducibility(curve)
        note = "" if irr else ("polynomial factors" if irr is False else "irreducibility unverified")
        rep.record("degree_shape", shape_ok and irr is not False,
                   measured=float(curve.p.deg_w), threshold=float(nu + 1), note=note)

    # 2: curve model: genus, single common pole, basepoint on the curve
    bp = W.basepoint
    on_curve = curve.form == "rational" or curve.contains(bp.z, bp.w, 1e-8)
    if curve.form == "rational":
        genus_ok, gnote = nu == 0, ""
        normalized = True
    elif curve.form == "hyperelliptic":
        genus_ok, gnote = curve.genus == nu, ""
        normalized = cv.is_normalized_model(curve)
    else:
        genus_ok, gnote = True, "genus unverified for general curves"
        normalized = cv.is_normalized_model(curve)
    rep.record("curve_model", bool(on_curve and genus_ok and normalized),
               note="; ".join(x for x in [gnote,
                                          "" if on_curve else "basepoint off curve",
                                          "" if normalized else "not single-pole normalized"] if x))

    # 3: component degree bounds and coprimality
    bounds_ok = all(f.num.deg_w <= nu and f.den.deg_w <= nu for f in W.F)
    coprime_ok, cop_note = _coprimality(W)
    rep.record("component_bounds", bounds_ok and coprime_ok,
               measured=float(max(max(f.num.deg_w, f.den.deg_w) for f in W.F)),
               threshold=float(nu), note=cop_note)

    # 4: conformality and Gauss degree
    conf = conformality_residual(W, samples)
    try:
        counted, algebraic, agree = gauss_degree(W)
        gauss_ok = agree and counted == k
        gnote = f"deg counted={counted}" + (f" algebraic={algebraic}" if algebraic is not None else "")
    except DegenerateGauss as e:
        gauss_ok, gnote = False, str(e)
    rep.record("conformality_gauss_degree", conf <= CONFORMALITY_TOL and gauss_ok,
               measured=conf, threshold=CONFORMALITY_TOL, note=gnote)

    # 5: polar count, basepoint off the polar set, metric regularity
    try:
        polar = polar_set(W, strict=False)
        count_ok = polar.cardinality == s
        bp_clear = all(p.at_infinity or abs(p.z - bp.z) > max(curve.clearance, 1e-6)
                       for p in polar.points)
        reg = regularity_check(W, samples)
        rep.record("polar_regularity", count_ok and bp_clear and reg,
                   measured=float(polar.cardinality), threshold=float(s),
                   note="" if count_ok else "polar count mismatch")
    except Unsupported as e:
        rep.record("polar_regularity", False, note=str(e))
        polar = None

    # 6: vanishing real periods
    try:
        res = period_residual(W)
        worst = float(np.max(np.abs(res))) if res.size else 0.0
        rep.record("real_periods", worst <= PERIOD_TOL, measured=worst, threshold=PERIOD_TOL)
    except Exception as e:
        rep.record("real_periods", False, note=f"period integration failed: {e}")
    return rep


def _coprimality(W: WeierstrassData):
    """Detect shared factors between numerators and denominators."""
    if W.curve.form == "rational":
        for f in W.F:
            n = np.trim_zeros(f.num.coeffs[:, 0], "b")
            d = np.trim_zeros(f.den.coeffs[:, 0], "b")
            if n.size > 1 and d.size > 1:
                rn = np.roots(n[::-1])
                rd = np.roots(d[::-1])
                scale = 1.0 + max(np.abs(np.concatenate([rn, rd])))
                for r in rn:
                    if np.min(np.abs(rd - r)) < 1e-8 * scale:
                        return False, "shared factor between numerator and denominator"
        return True, ""
    for f in W.F:
        if f.num.deg_w > 0 or f.den.deg_w > 0:
            samples = cv._resultant_samples(f.num, f.den, 16, 1.23)
            if np.max(np.abs(samples)) < 1e-12 * f.num.max_abs_coeff * f.den.max_abs_coeff:
                return False, "vanishing resultant"
    return True, ""


# ---------------------------------------------------------------------------
# moduli distance
# ---------------------------------------------------------------------------

def moduli_distance(A: WeierstrassData, B: WeierstrassData,
                    include_translation: bool = True) -> float:
    """Coefficient-sum distance between two surfaces of the same signature.

    Sums |Delta coefficient| over the defining polynomial and the six
    component numerators/denominators; optionally adds the Euclidean
    distance between the base translations.
    """
    if A.signature != B.signature:
        raise SignatureMismatch(f"{A.signature} != {B.signature}")
    d = coefficient_distance(A.curve.p, B.curve.p)
    for fa, fb in zip(A.F, B.F):
        d += coefficient_distance(fa.num, fb.num)
        d += coefficient_distance(fa.den, fb.den)
    if include_translation:
        d += float(np.linalg.norm(A.translation - B.translation))
    return d
