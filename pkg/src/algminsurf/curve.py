"""Plane algebraic curves: lifting, analytic continuation, monodromy, homology.

A curve is the zero set of a bivariate polynomial p(z, w) in the two
coordinate functions z and w.  Three forms are supported:

* ``rational``       -- the Riemann sphere, modelled as the graph w = 0;
* ``hyperelliptic``  -- w**2 = q(z) with q squarefree;
* ``general``        -- any bivariate polynomial (lifting/continuation only).

Points are tracked as (z, w) pairs; paths are z-plane polylines along which
w is continued sheet by sheet.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from .errors import (
    AtBranchPoint,
    NoConvergence,
    NotNormalized,
    PathThroughPole,
    PathTooCoarse,
    SheetJump,
    Unsupported,
)

_INF = complex(math.inf, 0.0)


def _is_inf(z: complex) -> bool:
    return math.isinf(z.real) or math.isinf(z.imag)


# ---------------------------------------------------------------------------
# bivariate polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BivariatePolynomial:
    """Dense complex coefficient grid ``c[i, j]`` for the monomial z**i w**j."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        c = _trim_zero_edges(c)
        if not np.any(c):
            raise ValueError("polynomial must have at least one nonzero coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- structure ---------------------------------------------------------
    @property
    def deg_z(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def deg_w(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def terms(self):
        """Yield (i, j, coefficient) for every nonzero entry."""
        for i in range(self.coeffs.shape[0]):
            for j in range(self.coeffs.shape[1]):
                a = self.coeffs[i, j]
                if a != 0:
                    yield i, j, complex(a)

    @classmethod
    def from_terms(cls, terms) -> "BivariatePolynomial":
        """Build from an iterable of (i, j, coefficient) triples."""
        terms = [(int(i), int(j), complex(a)) for i, j, a in terms]
        if not terms:
            raise ValueError("empty term list")
        nz = max(t[0] for t in terms) + 1
        nw = max(t[1] for t in terms) + 1
        c = np.zeros((nz, nw), dtype=complex)
        for i, j, a in terms:
            c[i, j] += a
        return cls(c)

    @classmethod
    def univariate(cls, z_coeffs) -> "BivariatePolynomial":
        """Polynomial in z alone; ``z_coeffs[i]`` multiplies z**i."""
        c = np.asarray(z_coeffs, dtype=complex).reshape(-1, 1)
        if not np.any(c):
            return _zero_like()
        return cls(c)

    @classmethod
    def constant(cls, a) -> "BivariatePolynomial":
        if a == 0:
            return _zero_like()
        return cls(np.array([[complex(a)]]))

    # -- evaluation ---------------------------------------------------------
    def __call__(self, z, w):
        return npoly.polyval2d(z, w, self.coeffs)

    def w_coeffs_at(self, z: complex) -> np.ndarray:
        """Coefficient vector in w of p(z, .); index j multiplies w**j."""
        zs = z ** np.arange(self.coeffs.shape[0])
        return zs @ self.coeffs

    # -- calculus -----------------------------------------------------------
    def partial_z(self) -> "BivariatePolynomial":
        c = self.coeffs
        if c.shape[0] == 1:
            return BivariatePolynomial.constant(0.0)
        d = c[1:, :] * np.arange(1, c.shape[0])[:, None]
        if not np.any(d):
            return BivariatePolynomial.constant(0.0)
        return BivariatePolynomial(d)

    def partial_w(self) -> "BivariatePolynomial":
        c = self.coeffs
        if c.shape[1] == 1:
            return BivariatePolynomial.constant(0.0)
        d = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
        if not np.any(d):
            return BivariatePolynomial.constant(0.0)
        return BivariatePolynomial(d)

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        a, b = _common_shape(self.coeffs, other.coeffs)
        s = a + b
        if not np.any(s):
            return _zero_like()
        return BivariatePolynomial(s)

    def __sub__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        a, b = _common_shape(self.coeffs, other.coeffs)
        s = a - b
        if not np.any(s):
            return _zero_like()
        return BivariatePolynomial(s)

    def __mul__(self, other):
        if isinstance(other, BivariatePolynomial):
            if self.is_zero() or other.is_zero():
                return _zero_like()
            return BivariatePolynomial(convolve2d(self.coeffs, other.coeffs))
        if complex(other) == 0 or self.is_zero():
            return _zero_like()
        return BivariatePolynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def chop(self, rel_tol: float = 1e-13) -> "BivariatePolynomial":
        """Zero out entries below ``rel_tol`` times the largest coefficient."""
        c = self.coeffs.copy()
        cut = rel_tol * np.max(np.abs(c))
        c[np.abs(c) <= cut] = 0.0
        if not np.any(c):
            return _zero_like()
        return BivariatePolynomial(c)

    def is_zero(self, rel_tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= rel_tol))


def _zero_like() -> BivariatePolynomial:
    # the zero polynomial is represented by a single explicit zero; the
    # nonzero invariant is relaxed for this sentinel only
    p = object.__new__(BivariatePolynomial)
    c = np.zeros((1, 1), dtype=complex)
    c.setflags(write=False)
    object.__setattr__(p, "coeffs", c)
    return p


def zero_poly() -> BivariatePolynomial:
    return _zero_like()


def _trim_zero_edges(c: np.ndarray) -> np.ndarray:
    rows = np.where(np.any(c != 0, axis=1))[0]
    cols = np.where(np.any(c != 0, axis=0))[0]
    if rows.size == 0:
        return c[:1, :1].copy()
    return c[: rows[-1] + 1, : cols[-1] + 1].copy()


def _common_shape(a: np.ndarray, b: np.ndarray):
    nz = max(a.shape[0], b.shape[0])
    nw = max(a.shape[1], b.shape[1])
    A = np.zeros((nz, nw), dtype=complex)
    B = np.zeros((nz, nw), dtype=complex)
    A[: a.shape[0], : a.shape[1]] = a
    B[: b.shape[0], : b.shape[1]] = b
    return A, B


def coefficient_distance(a: BivariatePolynomial, b: BivariatePolynomial) -> float:
    """Sum of absolute coefficient differences on the common grid."""
    A, B = _common_shape(a.coeffs, b.coeffs)
    return float(np.sum(np.abs(A - B)))


# ---------------------------------------------------------------------------
# curves and points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    """A point (z, w) on a curve together with its defining residual |p(z, w)|."""

    z: complex
    w: complex
    residual: float = 0.0

    @property
    def at_infinity(self) -> bool:
        return _is_inf(self.z) or _is_inf(self.w)


@dataclass(frozen=True)
class StepControl:
    max_step: float = math.inf
    depth: int = 40


@dataclass(frozen=True)
class SheetPath:
    """A z-plane polyline with a starting curve point fixing the sheet."""

    vertices: tuple
    start: CurvePoint
    step_control: StepControl = StepControl()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))

    @property
    def is_closed(self) -> bool:
        return abs(self.vertices[0] - self.vertices[-1]) < 1e-13

    def reversed(self, end: CurvePoint | None = None) -> "SheetPath":
        """Reverse traversal; closed loops keep their start point."""
        if end is None:
            if not self.is_closed:
                raise ValueError("need the end point to reverse an open path")
            end = self.start
        return SheetPath(self.vertices[::-1], end, self.step_control)


@dataclass(frozen=True)
class Cycle:
    """Formal integer combination of closed sheet paths (a homology class)."""

    loops: tuple  # of (SheetPath, int)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple((p, int(c)) for p, c in self.loops))

    @classmethod
    def from_path(cls, path: SheetPath, name: str = "") -> "Cycle":
        return cls(((path, 1),), name=name)

    def reversed(self) -> "Cycle":
        return Cycle(tuple((p, -c) for p, c in self.loops), name=self.name + "~")

    def __add__(self, other: "Cycle") -> "Cycle":
        return Cycle(self.loops + other.loops, name=f"{self.name}+{other.name}")


@dataclass(frozen=True)
class AlgebraicCurve:
    """A plane algebraic curve with cached branch data.

    Use the constructors :meth:`riemann_sphere`, :meth:`hyperelliptic` or
    :meth:`general` rather than building instances directly.
    """

    p: BivariatePolynomial
    form: str
    genus: int | None
    branch_values: tuple

    # -- constructors --------------------------------------------------------
    @classmethod
    def riemann_sphere(cls) -> "AlgebraicCurve":
        """The sphere, modelled as the single-sheet graph w = 0."""
        return cls(BivariatePolynomial.from_terms([(0, 1, 1.0)]), "rational", 0, ())

    @classmethod
    def hyperelliptic(cls, q_coeffs) -> "AlgebraicCurve":
        """Curve w**2 = q(z) for squarefree q; ``q_coeffs[i]`` multiplies z**i."""
        q = np.asarray(q_coeffs, dtype=complex)
        q = np.trim_zeros(q, "b")
        d = q.size - 1
        if d < 1:
            raise ValueError("q must be nonconstant")
        roots = np.roots(q[::-1])
        scale = max(1.0, float(np.max(np.abs(roots))))
        # np.roots resolves a double root only to ~sqrt(eps)
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                if abs(roots[i] - roots[j]) < 1e-7 * scale:
                    raise ValueError("q must be squarefree (distinct branch values)")
        terms = [(0, 2, 1.0)] + [(i, 0, -q[i]) for i in range(q.size) if q[i] != 0]
        p = BivariatePolynomial.from_terms(terms)
        genus = (d - 1) // 2
        order = np.lexsort((roots.imag, roots.real))
        return cls(p, "hyperelliptic", genus, tuple(complex(r) for r in roots[order]))

    @classmethod
    def general(cls, p: BivariatePolynomial, genus: int | None = None) -> "AlgebraicCurve":
        if p.deg_w < 1:
            raise ValueError("general curve needs deg_w >= 1")
        bv = _discriminant_zeros(p)
        return cls(p, "general", genus, tuple(bv))

    # -- basic structure -----------------------------------------------------
    @property
    def n_sheets(self) -> int:
        return self.p.deg_w

    @property
    def q_coeffs(self) -> np.ndarray:
        """For hyperelliptic curves, the z-coefficients of q with w**2 = q(z)."""
        if self.form != "hyperelliptic":
            raise Unsupported("q is defined for hyperelliptic curves only")
        return -self.p.coeffs[:, 0]

    @property
    def branch_at_infinity(self) -> bool:
        if self.form == "hyperelliptic":
            return (len(self.q_coeffs) - 1) % 2 == 1
        return False

    @property
    def clearance(self) -> float:
        """Default keep-out radius around branch values."""
        b = self.branch_values
        if len(b) >= 2:
            diam = max(abs(u - v) for u in b for v in b)
            return 1e-3 * diam
        if len(b) == 1:
            return 1e-3 * (1.0 + abs(b[0]))
        return 1e-3

    def q_at(self, z):
        return npoly.polyval(z, self.q_coeffs)

    def residual_scale(self) -> float:
        return 1.0 + self.p.max_abs_coeff

    def contains(self, z: complex, w: complex, tol: float = 1e-8) -> bool:
        return abs(self.p(z, w)) <= tol * self.residual_scale() * max(
            1.0, abs(z) ** self.p.deg_z, abs(w) ** self.p.deg_w
        )


def _discriminant_zeros(p: BivariatePolynomial):
    """z-values where p(z, .) has a multiple root or drops degree."""
    pw = p.partial_w()
    if pw.is_zero():
        return []
    bound = p.deg_z * (2 * p.deg_w - 1) + 2
    samples = _resultant_samples(p, pw, bound + 8, radius=1.31)
    coeffs = _poly_from_samples(samples, radius=1.31)
    # degree-drop points of the w-leading coefficient count as branch values too
    lead = p.coeffs[:, -1]
    if np.trim_zeros(lead, "b").size > 1:
        lead_roots = np.roots(np.trim_zeros(lead, "b")[::-1])
    else:
        lead_roots = np.array([])
    if coeffs.size <= 1:
        roots = np.array([])
    else:
        roots = np.roots(coeffs[::-1])
    allr = np.concatenate([roots, lead_roots])
    return _dedupe(allr)


def _resultant_samples(f: BivariatePolynomial, g: BivariatePolynomial, m: int, radius: float):
    zs = radius * np.exp(2j * np.pi * np.arange(m) / m)
    out = np.empty(m, dtype=complex)
    for k, z in enumerate(zs):
        out[k] = _sylvester_det(f.w_coeffs_at(z), g.w_coeffs_at(z))
    return out

def _sylvester_det(a: np.ndarray, b: np.ndarray) -> complex:
    """Resultant of two univariate polynomials given low-to-high coefficients."""
    a = np.trim_zeros(np.asarray(a, dtype=complex), "b")
    b = np.trim_zeros(np.asarray(b, dtype=complex), "b")
    if a.size == 0 or b.size == 0:
        return 0.0
    n, m = a.size - 1, b.size - 1
    if n == 0:
        return complex(a[0] ** m)
    if m == 0:
        return complex(b[0] ** n)
    S = np.zeros((n + m, n + m), dtype=complex)
    for i in range(m):
        S[i, i : i + n + 1] = a[::-1]
    for i in range(n):
        S[m + i, i : i + m + 1] = b[::-1]
    return complex(np.linalg.det(S))


def _poly_from_samples(vals: np.ndarray, radius: float) -> np.ndarray:
    """Recover polynomial coefficients from values at scaled roots of unity."""
    m = vals.size
    # the forward transform matches sampling at exp(+2 pi i k/m)
    c = np.fft.fft(vals) / m
    c = c / radius ** np.arange(m)
    mx = np.max(np.abs(c))
    if mx == 0:
        return np.zeros(1, dtype=complex)
    c[np.abs(c) < 1e-8 * mx] = 0.0
    return np.trim_zeros(c, "b") if np.any(c) else np.zeros(1, dtype=complex)


def _dedupe(roots, tol_scale: float = 1e-8):
    out = []
    if len(roots) == 0:
        return out
    scale = max(1.0, float(np.max(np.abs(roots))))
    for r in sorted(roots, key=lambda t: (t.real, t.imag)):
        if not any(abs(r - s) < tol_scale * scale for s in out):
            out.append(complex(r))
    return out


# ---------------------------------------------------------------------------
# lifting and continuation
# ---------------------------------------------------------------------------

def fiber(curve: AlgebraicCurve, z: complex) -> np.ndarray:
    """All w with p(z, w) = 0, sorted by (re, im)."""
    if curve.form == "rational":
        return np.array([0.0 + 0.0j])
    if curve.form == "hyperelliptic":
        r = cmath.sqrt(curve.q_at(z))
        ws = np.array([r, -r])
    else:
        c = np.trim_zeros(curve.p.w_coeffs_at(z), "b")
        if c.size <= 1:
            return np.array([])
        ws = np.roots(c[::-1])
    order = np.lexsort((np.round(ws.imag, 9), np.round(ws.real, 9)))
    return ws[order]


def lift(curve: AlgebraicCurve, z0: complex, w_guess: complex,
         max_iter: int = 60, check_branch: bool = True) -> CurvePoint:
    """Newton-correct ``w_guess`` onto the fiber of the curve above ``z0``.

    Raises AtBranchPoint when z0 sits inside the branch clearance radius and
    NoConvergence when the Newton iteration stalls.
    """
    z0 = complex(z0)
    if check_branch and curve.branch_values:
        if min(abs(z0 - b) for b in curve.branch_values) < curve.clearance:
            raise AtBranchPoint(f"z = {z0} is within clearance of a branch value")
    if curve.form == "rational":
        return CurvePoint(z0, 0.0, 0.0)
    p, pw = curve.p, curve.p.partial_w()
    w = complex(w_guess)
    scale = curve.residual_scale() * max(1.0, abs(z0) ** p.deg_z)
    for _ in range(max_iter):
        val = p(z0, w)
        if abs(val) <= 1e-14 * scale * max(1.0, abs(w) ** p.deg_w):
            break
        dw = pw(z0, w)
        if dw == 0:
            raise NoConvergence("Newton derivative vanished during lift")
        step = val / dw
        w = w - step
        if abs(step) < 1e-16 * (1.0 + abs(w)):
            break
    res = abs(p(z0, w))
    if res > 1e-10 * scale * max(1.0, abs(w) ** p.deg_w):
        raise NoConvergence(f"lift failed at z = {z0}: residual {res:.3e}")
    return CurvePoint(z0, w, float(res))


def _advance(curve: AlgebraicCurve, z0: complex, w0: complex, z1: complex,
             depth: int = 40) -> complex:
    """Continue w along the straight segment z0 -> z1, preserving the sheet."""
    if curve.form == "rational":
        return 0.0 + 0.0j
    if curve.form == "hyperelliptic":
        q0, q1 = curve.q_at(z0), curve.q_at(z1)
        if abs(q1 - q0) <= 0.5 * abs(q0) and q0 != 0:
            r = cmath.sqrt(q1)
            return r if abs(r - w0) <= abs(-r - w0) else -r
        if depth <= 0:
            raise PathTooCoarse("hyperelliptic continuation exceeded depth limit")
        zm = 0.5 * (z0 + z1)
        wm = _advance(curve, z0, w0, zm, depth - 1)
        return _advance(curve, zm, wm, z1, depth - 1)
    return _advance_general(curve, z0, w0, z1, depth)


def _advance_general(curve, z0, w0, z1, depth):
    p, pz, pw = curve.p, curve.p.partial_z(), curve.p.partial_w()
    dz = z1 - z0
    dwdz_den = pw(z0, w0)
    if dwdz_den == 0:
        raise SheetJump("vanishing w-derivative on path")
    w_pred = w0 - pz(z0, w0) / dwdz_den * dz
    w = w_pred
    scale = curve.residual_scale() * max(1.0, abs(z1) ** p.deg_z)
    ok = False
    for _ in range(10):
        val = p(z1, w)
        if abs(val) <= 1e-13 * scale * max(1.0, abs(w) ** p.deg_w):
            ok = True
            break
        den = pw(z1, w)
        if den == 0:
            break
        w = w - val / den
    if ok:
        others = [r for r in fiber(curve, z1) if abs(r - w) > 1e-13 * (1 + abs(w))]
        sep = min((abs(w - r) for r in others), default=math.inf)
        if abs(w - w_pred) <= 0.35 * sep:
            return w
        if abs(p(z1, w)) > 1e-9 * scale:
            raise SheetJump("residual spiked after correction")
    if depth <= 0:
        raise PathTooCoarse("continuation exceeded depth limit")
    zm = 0.5 * (z0 + z1)
    wm = _advance_general(curve, z0, w0, zm, depth - 1)
    return _advance_general(curve, zm, wm, z1, depth - 1)


def continue_along(curve: AlgebraicCurve, path: SheetPath) -> CurvePoint:
    """Endpoint of predictor-corrector continuation along a polyline."""
    return continue_with_trace(curve, path)[-1]


def continue_with_trace(curve: AlgebraicCurve, path: SheetPath):
    """Continuation returning the CurvePoint at every polyline vertex."""
    verts = path.vertices
    start = path.start
    if abs(verts[0] - start.z) > 1e-10 * (1 + abs(start.z)):
        raise ValueError("path start vertex does not match its start point")
    if not curve.contains(start.z, start.w, 1e-6):
        raise ValueError("start point does not lie on the curve")
    depth = path.step_control.depth
    w = complex(start.w)
    out = [CurvePoint(verts[0], w, float(abs(curve.p(verts[0], w))))]
    for z0, z1 in zip(verts[:-1], verts[1:]):
        n_sub = 1
        if path.step_control.max_step < math.inf:
            n_sub = max(1, int(math.ceil(abs(z1 - z0) / path.step_control.max_step)))
        for k in range(n_sub):
            za = z0 + (z1 - z0) * k / n_sub
            zb = z0 + (z1 - z0) * (k + 1) / n_sub
            w = _advance(curve, za, w, zb, depth)
        out.append(CurvePoint(z1, w, float(abs(curve.p(z1, w)))))
    return out


def monodromy(curve: AlgebraicCurve, loop: SheetPath) -> tuple:
    """Sheet permutation induced by continuation around a closed loop.

    Sheets are labelled by the (re, im)-sorted fiber above the base point;
    entry k of the result is the label reached from sheet k.
    """
    if not loop.is_closed:
        raise ValueError("monodromy needs a closed loop")
    base = loop.vertices[0]
    ws = fiber(curve, base)
    if ws.size != curve.n_sheets:
        raise AtBranchPoint("fiber at base point is deficient")
    perm = []
    scale = 1.0 + float(np.max(np.abs(ws)))
    for w in ws:
        end = continue_along(curve, SheetPath(loop.vertices, CurvePoint(base, w), loop.step_control))
        dists = np.abs(ws - end.w)
        k = int(np.argmin(dists))
        if dists[k] > 1e-6 * scale:
            raise SheetJump("loop endpoint does not match any fiber root")
        perm.append(k)
    if sorted(perm) != list(range(len(ws))):
        raise SheetJump("continuation did not induce a permutation")
    return tuple(perm)


# ---------------------------------------------------------------------------
# path planning
# ---------------------------------------------------------------------------

def plan_polyline(z_from: complex, z_to: complex, obstacles, clearance: float,
                  arc_step: float = math.pi / 24):
    """Straight segment with circular detours around listed obstacle points.

    Endpoints themselves must be clear of every obstacle.
    """
    z_from, z_to = complex(z_from), complex(z_to)
    for b in obstacles:
        if abs(z_from - b) < 0.999 * clearance or abs(z_to - b) < 0.999 * clearance:
            raise PathThroughPole(f"endpoint within clearance of obstacle {b}")
    seg = z_to - z_from
    L = abs(seg)
    if L == 0:
        return [z_from]
    u = seg / L
    hits = []
    for b in obstacles:
        t = ((b - z_from) / u).real
        if t <= 0 or t >= L:
            continue
        d = abs(z_from + t * u - b)
        if d < clearance:
            hits.append((t, b, d))
    hits.sort(key=lambda h: h[0])
    pts = [z_from]
    rad = 2.0 * clearance
    for t, b, d in hits:
        # side of the detour follows the side the segment already favours
        side = ((b - z_from) / u).imag
        sgn = -1.0 if side > 0 else 1.0
        half = math.sqrt(max(rad * rad - d * d, 0.0)) if d < rad else 0.0
        t_in, t_out = t - max(half, rad * 0.5), t + max(half, rad * 0.5)
        p_in = z_from + max(t_in, 0.0) * u
        p_out = z_from + min(t_out, L) * u
        a_in = cmath.phase(p_in - b)
        a_out = cmath.phase(p_out - b)
        delta = (a_out - a_in) % (2 * math.pi)
        if sgn < 0:
            delta = delta - 2 * math.pi
        n = max(2, int(math.ceil(abs(delta) / arc_step)))
        r_in, r_out = abs(p_in - b), abs(p_out - b)
        pts.append(p_in)
        for k in range(1, n):
            s = k / n
            r = r_in + (r_out - r_in) * s
            pts.append(b + r * cmath.exp(1j * (a_in + delta * s)))
        pts.append(p_out)
    pts.append(z_to)
    # drop duplicate consecutive vertices
    out = [pts[0]]
    for q in pts[1:]:
        if abs(q - out[-1]) > 1e-14 * (1.0 + abs(q)):
            out.append(q)
    return out


def circle_path(curve: AlgebraicCurve, center: complex, radius: float,
                start: CurvePoint | None = None, n: int = 96,
                orientation: int = 1, phase: float = 0.0) -> SheetPath:
    """Closed circular loop; the sheet is fixed by ``start`` or by lifting."""
    angles = phase + orientation * 2 * math.pi * np.arange(n + 1) / n
    verts = center + radius * np.exp(1j * angles)
    if start is None:
        ws = fiber(curve, complex(verts[0]))
        start = CurvePoint(complex(verts[0]), complex(ws[0]))
    return SheetPath(tuple(verts), start)


def capsule_path(curve: AlgebraicCurve, za: complex, zb: complex, width: float,
                 n_cap: int = 40, n_side: int = 32) -> SheetPath:
    """Closed loop around the segment [za, zb] at constant offset ``width``.

    Traversal is clockwise-in/counterclockwise as seen from outside: side at
    offset +i*u, half-cap around zb, side at offset -i*u, half-cap around za.
    """
    za, zb = complex(za), complex(zb)
    u = (zb - za) / abs(zb - za)
    nvec = 1j * u
    phase_n = cmath.phase(nvec)
    pts = []
    for k in range(n_side + 1):  # side za->zb at offset +width
        pts.append(za + (zb - za) * k / n_side + width * nvec)
    for k in range(1, n_cap + 1):  # half-cap around zb, +nvec to -nvec
        pts.append(zb + width * cmath.exp(1j * (phase_n - math.pi * k / n_cap)))
    for k in range(1, n_side + 1):  # side zb->za at offset -width
        pts.append(zb + (za - zb) * k / n_side - width * nvec)
    for k in range(1, n_cap + 1):  # half-cap around za, -nvec to +nvec
        pts.append(za + width * cmath.exp(1j * (phase_n + math.pi - math.pi * k / n_cap)))
    verts = tuple(pts)
    lifted = fiber(curve, verts[0])
    start = CurvePoint(verts[0], complex(lifted[-1]))
    return SheetPath(verts, start)


def path_between_points(curve: AlgebraicCurve, start: CurvePoint, target: CurvePoint,
                        extra_obstacles=()) -> SheetPath:
    """A sheet path from ``start`` to ``target`` respecting both sheets.

    A straight (detoured) route is tried first; on a sheet mismatch a loop
    around one branch value is inserted until the landing sheet matches.
    """
    obstacles = list(curve.branch_values) + list(extra_obstacles)
    verts = plan_polyline(start.z, target.z, obstacles, curve.clearance)
    path = SheetPath(tuple(verts), start)
    end = continue_along(curve, path)
    wsep = 1e-6 * (1.0 + abs(target.w))
    if abs(end.w - target.w) <= max(wsep, 1e-8):
        return path
    if curve.form != "hyperelliptic":
        raise Unsupported("sheet-corrected routing is implemented for hyperelliptic curves")
    # a single loop around any one branch value swaps the two sheets
    b = min(curve.branch_values, key=lambda bb: abs(bb - start.z) + abs(bb - target.z))
    rad = max(2.5 * curve.clearance, 0.05 * (1.0 + abs(b)))
    anchor = b + rad * cmath.exp(1j * cmath.phase(start.z - b if start.z != b else 1.0))
    leg1 = plan_polyline(start.z, anchor, [o for o in obstacles if o != b], curve.clearance)
    loop = [anchor * 0 + b + (anchor - b) * cmath.exp(2j * math.pi * k / 64) for k in range(65)]
    leg2 = plan_polyline(anchor, target.z, [o for o in obstacles if o != b], curve.clearance)
    verts = list(leg1) + loop[1:] + list(leg2)[1:]
    path = SheetPath(tuple(verts), start)
    end = continue_along(curve, path)
    if abs(end.w - target.w) > max(wsep, 1e-8):
        raise SheetJump("could not route onto the requested sheet")
    return path


# ---------------------------------------------------------------------------
# normalized-model degrees
# ---------------------------------------------------------------------------

def is_normalized_model(curve: AlgebraicCurve) -> bool:
    """True when deg_z = deg_w + 1, the w-leading coefficient is constant and
    the fiber is totally ramified over infinity (single common pole of z, w)."""
    p = curve.p
    if p.deg_z != p.deg_w + 1 or p.deg_w < 1:
        return False
    lead = np.trim_zeros(p.coeffs[:, -1], "b")
    if lead.size != 1:
        return False
    radius = 4.0 * (1.0 + max((abs(b) for b in curve.branch_values), default=1.0))
    loop = circle_path(curve, 0.0, radius, n=max(128, 24 * p.deg_w))
    try:
        perm = monodromy(curve, loop)
    except (SheetJump, PathTooCoarse, AtBranchPoint):
        return False
    return _cycle_length(perm, 0) == len(perm)


def _cycle_length(perm, k0):
    k, n = perm[k0], 1
    while k != k0:
        k = perm[k]
        n += 1
    return n


def degree_of_projection(curve: AlgebraicCurve, monomial_powers) -> int:
    """Degree of z**l w**j as a meromorphic function on a normalized curve.

    With deg(z) = nu + 1 and deg(w) = nu + 2 sharing a single pole, the
    monomial degree is l (nu + 1) + j (nu + 2).
    """
    l, j = (int(v) for v in monomial_powers)
    if l < 0 or j < 0:
        raise ValueError("powers must be nonnegative")
    if not is_normalized_model(curve):
        raise NotNormalized("curve is not in the single-common-pole normalized shape")
    nu = curve.p.deg_w - 1
    return l * (nu + 1) + j * (nu + 2)


def function_degree_by_counting(curve: AlgebraicCurve, num: BivariatePolynomial,
                                den: BivariatePolynomial, c_values=None) -> int:
    """Degree of num/den on the curve by counting preimages of generic values.

    For each test value c the solutions of {p = 0, num - c den = 0} are
    counted through the degree of the z-resultant; the counts must agree.
    """
    if c_values is None:
        c_values = (cmath.exp(0.7371j), cmath.exp(2.1933j))
    counts = []
    for c in c_values:
        counts.append(_preimage_count(curve, num, den, complex(c)))
    if len(set(counts)) != 1:
        third = _preimage_count(curve, num, den, cmath.exp(4.9241j))
        counts.append(third)
        vals, cts = np.unique(counts, return_counts=True)
        return int(vals[np.argmax(cts)])
    return counts[0]


def _preimage_count(curve: AlgebraicCurve, num, den, c: complex) -> int:
    h = num - c * den
    if curve.form == "rational":
        coeffs = np.trim_zeros(h.coeffs[:, 0], "b")
        mx = np.max(np.abs(h.coeffs)) if np.any(h.coeffs) else 0.0
        if mx == 0:
            return 0
        coeffs = h.coeffs[:, 0].copy()
        coeffs[np.abs(coeffs) < 1e-10 * mx] = 0
        coeffs = np.trim_zeros(coeffs, "b")
        return max(coeffs.size - 1, 0)
    p = curve.p
    if h.is_zero():
        return 0
    bound = p.deg_z * max(h.deg_w, 1) + h.deg_z * max(p.deg_w, 1) + 2
    m = bound + 8
    radius = 1.2891
    if h.deg_w == 0:
        # resultant reduces to h(z)**deg_w(p)
        samples = np.array([
            complex(h(z, 0.0)) ** p.deg_w
            for z in radius * np.exp(2j * np.pi * np.arange(m) / m)
        ])
    else:
        samples = np.array([
            _sylvester_det(p.w_coeffs_at(z), h.w_coeffs_at(z))
            for z in radius * np.exp(2j * np.pi * np.arange(m) / m)
        ])
    coeffs = _poly_from_samples(samples, radius)
    return max(coeffs.size - 1, 0)


def reduce_w(poly: BivariatePolynomial, curve: AlgebraicCurve) -> BivariatePolynomial:
    """Reduce w-powers using the curve relation (hyperelliptic: w**2 -> q(z))."""
    if curve.form == "rational":
        c = poly.coeffs[:, :1]
        if not np.any(c):
            return zero_poly()
        return BivariatePolynomial(c)
    if curve.form != "hyperelliptic":
        return poly
    q = BivariatePolynomial.univariate(curve.q_coeffs)
    cur = poly
    while cur.deg_w >= 2:
        c = cur.coeffs
        low = c[:, :2]
        rest = BivariatePolynomial(low) if np.any(low) else zero_poly()
        out = rest
        for j in range(2, c.shape[1]):
            col = c[:, j]
            if not np.any(col):
                continue
            term = BivariatePolynomial(col.reshape(-1, 1)) * q
            if j - 2 > 0:
                shift = np.zeros((1, j - 1), dtype=complex)
                shift[0, j - 2] = 1.0
                term = term * BivariatePolynomial(shift)
            out = out + term
        cur = out
        if cur.is_zero():
            return cur
    return cur


# ---------------------------------------------------------------------------
# homology of hyperelliptic curves
# ---------------------------------------------------------------------------

def canonical_cycles(curve: AlgebraicCurve):
    """Canonical homology basis [a_1..a_nu, b_1..b_nu] on a hyperelliptic curve.

    Branch values are chained in (re, im) order; a_k encircles chain pair
    (2k-1, 2k) on one sheet and b_k strings together the linking pairs so
    that the intersection pairing is the standard symplectic one.
    """
    if curve.form == "rational":
        return []
    if curve.form != "hyperelliptic":
        raise Unsupported("canonical cycles are implemented for hyperelliptic curves")
    nu = curve.genus
    if nu == 0:
        return []
    b = list(curve.branch_values)
    loops = []
    for i in range(2 * nu):
        za, zb = b[i], b[i + 1]
        other = [x for k, x in enumerate(b) if k not in (i, i + 1)]
        width = _capsule_width(za, zb, other, i)
        loops.append(capsule_path(curve, za, zb, width))
    loops = _orient_chain(curve, loops)
    a_cycles = [Cycle.from_path(loops[2 * k], name=f"a{k + 1}") for k in range(nu)]
    b_cycles = [
        Cycle(tuple((loops[2 * i + 1], 1) for i in range(k, nu)), name=f"b{k + 1}")
        for k in range(nu)
    ]
    return a_cycles + b_cycles


def _capsule_width(za, zb, other, index):
    d_seg = min((_dist_point_segment(x, za, zb) for x in other), default=abs(zb - za))
    base = min(0.3 * d_seg, 0.45 * abs(zb - za))
    width = base * (0.78 if index % 2 else 1.0) * (1.0 + 0.017 * index)
    return max(width, 1e-6)


def _dist_point_segment(x, a, b):
    u = b - a
    t = ((x - a) / u).real if u != 0 else 0.0
    t = min(max(t, 0.0), 1.0)
    return abs(a + t * u - x)


def _orient_chain(curve, loops):
    """Flip loop orientations so consecutive chain intersections are +1."""
    fixed = [loops[0]]
    traces = [continue_with_trace(curve, loops[0])]
    for k in range(1, len(loops)):
        cand = loops[k]
        tr = continue_with_trace(curve, cand)
        s = _loop_intersection(curve, fixed[-1], traces[-1], cand, tr)
        if s == 0 or abs(s) > 1:
            raise SheetJump(f"chain loops {k - 1},{k} intersect {s} times; expected once")
        if s < 0:
            end = tr[-1]
            cand = cand.reversed()
            tr = list(reversed(tr))
        fixed.append(cand)
        traces.append(tr)
    return fixed


def intersection_number(curve: AlgebraicCurve, A: Cycle, B: Cycle) -> int:
    """Signed intersection number of two cycles, by sheet-matched crossings."""
    total = 0
    for pa, ca in A.loops:
        ta = continue_with_trace(curve, pa)
        for pb, cb in B.loops:
            tb = continue_with_trace(curve, pb)
            total += ca * cb * _loop_intersection(curve, pa, ta, pb, tb)
    return total


def _loop_intersection(curve, pa, ta, pb, tb) -> int:
    va, vb = pa.vertices, pb.vertices
    total = 0
    for i in range(len(va) - 1):
        a0, a1 = va[i], va[i + 1]
        wa = ta[i].w
        for j in range(len(vb) - 1):
            b0, b1 = vb[j], vb[j + 1]
            hit = _segment_crossing(a0, a1, b0, b1)
            if hit is None:
                continue
            s, t, z = hit
            w_a = _advance(curve, a0, wa, z)
            w_b = _advance(curve, b0, tb[j].w, z)
            if curve.form == "hyperelliptic":
                same = abs(w_a - w_b) < abs(w_a + w_b)
            else:
                roots = fiber(curve, z)
                same = np.argmin(np.abs(roots - w_a)) == np.argmin(np.abs(roots - w_b))
            if not same:
                continue
            cross = ((a1 - a0).real * (b1 - b0).imag - (a1 - a0).imag * (b1 - b0).real)
            total += 1 if cross > 0 else -1
    return total


def _segment_crossing(a0, a1, b0, b1):
    d1, d2 = a1 - a0, b1 - b0
    den = d1.real * d2.imag - d1.imag * d2.real
    if abs(den) < 1e-15:
        return None
    r = b0 - a0
    s = (r.real * d2.imag - r.imag * d2.real) / den
    t = (r.real * d1.imag - r.imag * d1.real) / den
    eps = 1e-12
    if eps < s < 1 - eps and eps < t < 1 - eps:
        return s, t, a0 + s * d1
    return None


def intersection_matrix(curve: AlgebraicCurve, cycles) -> np.ndarray:
    n = len(cycles)
    M = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            v = intersection_number(curve, cycles[i], cycles[j])
            M[i, j] = v
            M[j, i] = -v
    return M


def check_irreducibility(curve: AlgebraicCurve) -> bool | None:
    """Heuristic irreducibility probe; None means the probe is inconclusive.

    Hyperelliptic curves with squarefree q are always irreducible.  For
    general curves, transitivity of the monodromy action on the sheets is
    tested on loops around each branch value; an intransitive action means
    the polynomial factors and a warning is emitted.
    """
    if curve.form in ("rational", "hyperelliptic"):
        return True
    if not curve.branch_values:
        if curve.n_sheets > 1:
            warnings.warn("unbranched multi-sheet cover: defining polynomial factors")
            return False
        return True
    base_groups = list(range(curve.n_sheets))
    parent = list(range(curve.n_sheets))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    radius_scale = max(abs(b) for b in curve.branch_values) + 1.0
    base = complex(radius_scale * 2.3, 0.17 * radius_scale)
    for b in curve.branch_values:
        rad = 0.45 * min((abs(b - c) for c in curve.branch_values if c != b),
                         default=0.3 * radius_scale)
        loop_circle = [b + rad * cmath.exp(2j * math.pi * k / 72) for k in range(73)]
        try:
            leg = plan_polyline(base, loop_circle[0],
                                [o for o in curve.branch_values if o != b], curve.clearance)
            verts = list(leg) + loop_circle[1:] + list(reversed(leg))[1:]
            ws = fiber(curve, base)
            for k0, w in enumerate(ws):
                end = continue_along(curve, SheetPath(tuple(verts), CurvePoint(base, w)))
                k1 = int(np.argmin(np.abs(ws - end.w)))
                ra, rb = find(k0), find(k1)
                if ra != rb:
                    parent[ra] = rb
        except (SheetJump, PathTooCoarse, AtBranchPoint, NoConvergence):
            return None
    roots = {find(k) for k in base_groups}
    if len(roots) > 1:
        warnings.warn("monodromy acts intransitively: defining polynomial factors")
        return False
    return True
