"""Period matrices, divisor maps and period-closing Newton solves.

On a hyperelliptic curve of genus nu the raw holomorphic differentials are
z**(i-1) dz / w, i = 1..nu.  Normalizing their periods over the a-cycles
yields the dual basis, the b-periods assemble the period matrix, and the
columns of (I, Pi) span the Jacobian lattice.  Divisor sums of basis
integrals give the Abel-type map whose lattice test characterizes principal
divisors.  ``solve_periods`` inverts finite-dimensional families of period
maps by a damped Newton method with finite-difference Jacobians.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import curve as cv
from . import quadrature as qd
from . import wdata as wd
from .curve import AlgebraicCurve, CurvePoint, Cycle, SheetPath
from .errors import (
    NoConvergence,
    SingularAPeriods,
    SingularJacobian,
    Unsupported,
    ValidationRegression,
)
from .wdata import RationalOnCurve, WeierstrassData

_INF = complex(math.inf, 0.0)


# ---------------------------------------------------------------------------
# holomorphic basis and period matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolomorphicBasis:
    """Dual basis xi_k = sum_i C[k, i] z**i dz / w with unit a-periods."""

    curve: AlgebraicCurve
    normalizer: np.ndarray  # (nu, nu) complex
    a_cycles: tuple
    b_cycles: tuple

    @property
    def genus(self) -> int:
        return self.normalizer.shape[0]

    def raw_values(self, z, w):
        """Stack of z**i / w, i = 0..nu-1 (the dz-densities of the raw forms)."""
        zs = np.stack([np.power(z, i) for i in range(self.genus)], axis=-1)
        return zs / np.asarray(w)[..., None]

    def dual_values(self, z, w):
        return self.raw_values(z, w) @ self.normalizer.T


@dataclass(frozen=True)
class PeriodMatrix:
    pi: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pi, dtype=complex)
        p.setflags(write=False)
        object.__setattr__(self, "pi", p)

    @property
    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.pi - self.pi.T))) if self.pi.size else 0.0

    @property
    def min_imag_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.pi.imag))) if self.pi.size else 0.0


@dataclass(frozen=True)
class JacobianLattice:
    """Lattice spanned over the integers by the columns of (I, Pi)."""

    generators: np.ndarray  # (nu, 2 nu) complex

    def __post_init__(self):
        g = np.asarray(self.generators, dtype=complex)
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)
        nu = g.shape[0]
        R = np.vstack([g.real, g.imag])
        if np.linalg.matrix_rank(R) < 2 * nu:
            raise ValueError("lattice generators are not R-linearly independent")

    @classmethod
    def from_period_matrix(cls, pm: PeriodMatrix) -> "JacobianLattice":
        nu = pm.pi.shape[0]
        return cls(np.hstack([np.eye(nu, dtype=complex), pm.pi]))

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        g = self.generators
        R = np.vstack([g.real, g.imag])
        rhs = np.concatenate([np.asarray(v).real, np.asarray(v).imag])
        return np.linalg.solve(R, rhs)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        """Representative of v in the centered fundamental parallelotope."""
        t = self.coordinates(v)
        frac = t - np.round(t)
        return self.generators @ frac

    def distance(self, v: np.ndarray, search: int = 3) -> float:
        """Euclidean distance from v to the nearest lattice point."""
        t = self.coordinates(v)
        base = np.round(t)
        nu2 = self.generators.shape[1]
        offsets = np.array(np.meshgrid(*([np.arange(-search, search + 1)] * nu2),
                                       indexing="ij")).reshape(nu2, -1).T
        cand = self.generators @ (base[None, :] + offsets).T
        d = np.abs(np.asarray(v)[:, None] - cand)
        return float(np.min(np.sqrt(np.sum(d * d, axis=0))))


def period_matrix(curve: AlgebraicCurve, quad_tol: float = 1e-12,
                  cond_limit: float = 1e10):
    """Dual basis and period matrix of a hyperelliptic curve of genus >= 1.

    Raises SingularAPeriods when the raw a-period system is too
    ill-conditioned to normalize.
    """
    if curve.form != "hyperelliptic":
        raise Unsupported("period matrices are implemented for hyperelliptic curves")
    nu = curve.genus
    if nu < 1:
        raise Unsupported("period matrix needs genus >= 1")
    cycles = cv.canonical_cycles(curve)
    a_cycles, b_cycles = cycles[:nu], cycles[nu:]

    def raw(z, w):
        zs = np.stack([np.power(z, i) for i in range(nu)], axis=-1)
        return zs / np.asarray(w)[..., None]

    A = np.array([qd.integrate_cycle(curve, c, raw, quad_tol) for c in a_cycles]).T
    B = np.array([qd.integrate_cycle(curve, c, raw, quad_tol) for c in b_cycles]).T
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularAPeriods(f"a-period matrix condition {cond:.2e}")
    C = np.linalg.inv(A)
    basis = HolomorphicBasis(curve, C, tuple(a_cycles), tuple(b_cycles))
    pm = PeriodMatrix(C @ B)
    return basis, pm


# ---------------------------------------------------------------------------
# divisors and the Abel-type map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Divisor:
    """Formal sum of curve points with nonzero integer multiplicities."""

    entries: tuple  # of (CurvePoint, int)

    def __post_init__(self):
        ents = tuple((p, int(n)) for p, n in self.entries if int(n) != 0)
        object.__setattr__(self, "entries", ents)

    @property
    def degree(self) -> int:
        return sum(n for _, n in self.entries)

    def __mul__(self, other: "Divisor") -> "Divisor":
        return Divisor(self.entries + other.entries)

    def inverse(self) -> "Divisor":
        return Divisor(tuple((p, -n) for p, n in self.entries))

    @classmethod
    def point(cls, p: CurvePoint, n: int = 1) -> "Divisor":
        return cls(((p, n),))


def infinity_point() -> CurvePoint:
    return CurvePoint(_INF, _INF)


def period_data(curve: AlgebraicCurve, quad_tol: float = 1e-12):
    """Memoized (basis, period_matrix, lattice) triple for a curve."""
    cached = getattr(curve, "_period_cache", None)
    if cached is None:
        basis, pm = period_matrix(curve, quad_tol)
        cached = (basis, pm, JacobianLattice.from_period_matrix(pm))
        object.__setattr__(curve, "_period_cache", cached)
    return cached


def abel_map(curve: AlgebraicCurve, basepoint: CurvePoint, D: Divisor,
             basis: HolomorphicBasis | None = None, lattice: JacobianLattice | None = None,
             reduce: bool = True, quad_tol: float = 1e-12):
    """Divisor image sum_j n_j integral_E^{Q_j} xi, reduced modulo the lattice.

    Returns (vector, lattice); with ``reduce=False`` the unreduced vector is
    returned (still together with the lattice).
    """
    if basis is None:
        basis, _, lattice = period_data(curve, quad_tol)
    elif lattice is None:
        raise ValueError("pass the lattice along with a precomputed basis")
    nu = basis.genus
    total = np.zeros(nu, dtype=complex)
    for q, n in D.entries:
        total = total + n * _basis_integral(curve, basis, basepoint, q, quad_tol)
    if reduce:
        total = lattice.reduce(total)
    return total, lattice


def _basis_integral(curve, basis, E: CurvePoint, Q: CurvePoint, quad_tol):
    nu = basis.genus

    def raw(z, w):
        zs = np.stack([np.power(z, i) for i in range(nu)], axis=-1)
        return zs / np.asarray(w)[..., None]

    total = np.zeros(nu, dtype=complex)
    start = E
    if _is_branch_point(curve, E):
        leg, start = _branch_leg(curve, E, nu, quad_tol)
        total = total + leg
    if Q.at_infinity:
        raw_val = _integral_to_infinity(curve, start, raw, nu, quad_tol)
        total = total + np.asarray(raw_val)
    elif _is_branch_point(curve, Q):
        # route to an anchor near Q, then descend against the local-parameter leg
        anchor_leg, anchor = _branch_leg(curve, Q, nu, quad_tol)
        path = cv.path_between_points(curve, start, anchor)
        mid, _ = qd.integrate_path(curve, path, raw, quad_tol)
        total = total + np.asarray(mid) - np.asarray(anchor_leg)
    else:
        path = cv.path_between_points(curve, start, Q)
        raw_val, _ = qd.integrate_path(curve, path, raw, quad_tol)
        total = total + np.asarray(raw_val)
    return basis.normalizer @ total


def _is_branch_point(curve, P: CurvePoint) -> bool:
    if P.at_infinity or curve.form != "hyperelliptic":
        return False
    return any(abs(P.z - b) <= 1e-9 * (1 + abs(b)) for b in curve.branch_values)


def _branch_leg(curve, P: CurvePoint, nu, quad_tol):
    """Integral of the raw forms from a branch point to a nearby anchor.

    Uses the local parameter t with z = z0 + e^{i theta} t^2, where the raw
    densities z**i dz / w are analytic.  Returns (integral, anchor point).
    """
    from numpy.polynomial import polynomial as npoly

    z0 = min(curve.branch_values, key=lambda b: abs(b - P.z))
    others = [b for b in curve.branch_values if abs(b - z0) > 1e-12]
    r = 0.2 * min((abs(b - z0) for b in others), default=1.0)
    theta = 0.41
    t1 = math.sqrt(r)
    q = curve.q_coeffs
    direction = cmath.exp(1j * theta)

    def integrand(ts):
        ts = np.asarray(ts)
        z = z0 + direction * ts * ts
        wv = np.sqrt(npoly.polyval(z, q).astype(complex))
        zs = np.stack([np.power(z, i) for i in range(nu)], axis=-1)
        return (zs / wv[..., None]) * (2.0 * direction * ts)[..., None]

    leg = _complex_line_integral(integrand, 0.0, t1, quad_tol)
    z_anchor = z0 + direction * t1 * t1
    w_anchor = complex(np.sqrt(complex(npoly.polyval(z_anchor, q))))
    anchor = cv.lift(curve, z_anchor, w_anchor, check_branch=False)
    return np.asarray(leg), anchor


def _integral_to_infinity(curve, E: CurvePoint, raw, nu, quad_tol):
    """Integral of the raw differentials from E out to the place over z = inf.

    The head runs to a far junction point on the sheet of E; the tail uses a
    local parameter at infinity (t with z = 1/t**2 for the ramified odd case,
    z = 1/t for even degree) along a ray whose direction keeps the principal
    square root of q continuous.
    """
    from numpy.polynomial import polynomial as npoly

    q = curve.q_coeffs
    deg = len(q) - 1
    radius = 8.0 * (1.0 + max((abs(b) for b in curve.branch_values), default=1.0))
    for direction in (0.37, 0.93, 1.71, 2.39, 3.05):
        z_far = radius * cmath.exp(1j * direction)
        ray = z_far * np.linspace(1.0, 64.0, 48)
        probe = np.sqrt(npoly.polyval(ray, q).astype(complex))
        jumps = np.abs(np.diff(probe)) > np.abs(probe[:-1] + probe[1:])
        if not np.any(jumps):
            break
    far = cv.lift(curve, z_far, cv.fiber(curve, z_far)[0], check_branch=False)
    path = cv.path_between_points(curve, E, far)
    head, end = qd.integrate_path(curve, path, raw, quad_tol)
    head = np.asarray(head)
    w_principal = complex(np.sqrt(complex(npoly.polyval(z_far, q))))
    sgn = 1.0 if abs(w_principal - end.w) <= abs(w_principal + end.w) else -1.0
    if deg % 2 == 1:
        t0 = 1.0 / cmath.sqrt(z_far)  # z = 1/t^2, dz = -2 dt / t^3

        def integrand(ts):
            ts = np.asarray(ts)
            z = 1.0 / (ts * ts)
            wv = sgn * np.sqrt(npoly.polyval(z, q).astype(complex))
            zs = np.stack([np.power(z, i) for i in range(nu)], axis=-1)
            return (zs / wv[..., None]) * (-2.0 / ts ** 3)[..., None]
    else:
        t0 = 1.0 / z_far  # z = 1/t, dz = -dt / t^2

        def integrand(ts):
            ts = np.asarray(ts)
            z = 1.0 / ts
            wv = sgn * np.sqrt(npoly.polyval(z, q).astype(complex))
            zs = np.stack([np.power(z, i) for i in range(nu)], axis=-1)
            return (zs / wv[..., None]) * (-1.0 / ts ** 2)[..., None]

    tail = _complex_line_integral(integrand, t0, 0.0, quad_tol)
    return head + np.asarray(tail)


def _complex_line_integral(f, t_from, t_to, tol):
    """Integrate a vector integrand along the straight segment in the t-plane."""
    dt = t_to - t_from

    def g(ss):
        ss = np.atleast_1d(ss)
        vals = f(t_from + dt * ss)
        return vals * dt

    nodes, weights = np.polynomial.legendre.leggauss(32)

    def panel(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        vals = g(mid + half * nodes)
        return half * np.tensordot(weights, vals, axes=(0, 0))

    def rec(lo, hi, whole, depth, t):
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        err = np.max(np.abs(whole - left - right))
        if err <= t or depth <= 0:
            return left + right
        return rec(lo, mid, left, depth - 1, t / 2) + rec(mid, hi, right, depth - 1, t / 2)

    return rec(0.0, 1.0, panel(0.0, 1.0), 24, tol)


def is_principal(curve: AlgebraicCurve, D: Divisor, basepoint: CurvePoint | None = None,
                 tol: float = 1e-6, quad_tol: float = 1e-12):
    """Degree-and-lattice test for principality of a divisor.

    Returns (verdict, degree, lattice_distance).
    """
    deg = D.degree
    if basepoint is None:
        b0 = curve.branch_values[0]
        shift = 0.31 * min((abs(b - b0) for b in curve.branch_values[1:]), default=1.0)
        z0 = b0 + shift
        basepoint = cv.lift(curve, z0, cv.fiber(curve, z0)[0], check_branch=False)
    vec, lattice = abel_map(curve, basepoint, D, reduce=False, quad_tol=quad_tol)
    dist = lattice.distance(vec)
    return (deg == 0 and dist < tol), deg, dist


def weierstrass_points(curve: AlgebraicCurve):
    """Hyperelliptic ramification points, with the genus-1 case recorded empty.

    For genus >= 2 these are the 2 nu + 2 branch points (including the place
    over infinity for odd-degree models); the count is checked against the
    classical bounds [2 nu - 2, nu (nu^2 - 1)].
    """
    if curve.form != "hyperelliptic":
        raise Unsupported("ramification points are computed for hyperelliptic curves")
    nu = curve.genus
    if nu <= 1:
        return []
    pts = [CurvePoint(b, 0.0) for b in curve.branch_values]
    if curve.branch_at_infinity:
        pts.append(infinity_point())
    lo, hi = 2 * nu - 2, nu * (nu * nu - 1)
    if not (lo <= len(pts) <= hi):
        raise Unsupported(f"count {len(pts)} violates the bounds [{lo}, {hi}]")
    return pts


# ---------------------------------------------------------------------------
# period-closing solves
# ---------------------------------------------------------------------------

@dataclass
class PeriodAnsatz:
    """A finite-dimensional family of 1-forms over a fixed cycle list.

    mode "linear":      theta(x) = (kappa + sum x_j basis_j) dz
    mode "exponential": theta(x) = exp(sum x_j basis_j) kappa dz
    The coefficient vector is complex; ``constraint`` picks which real scalars
    of each cycle period enter the residual ("full", "real" or "imag").
    """

    curve: AlgebraicCurve
    kappa: RationalOnCurve
    basis: list
    cycles: list
    mode: str = "exponential"
    constraint: str = "real"
    quad_tol: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("linear", "exponential"):
            raise ValueError("mode must be 'linear' or 'exponential'")
        if self.constraint not in ("full", "real", "imag"):
            raise ValueError("constraint must be 'full', 'real' or 'imag'")
        n_scalar = len(self.cycles) * (2 if self.constraint == "full" else 1)
        if 2 * len(self.basis) < n_scalar:
            raise ValueError("need at least as many real coefficients as constraints")


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    log: list  # (residual_norm, step_length) per iteration

    def render_log(self) -> str:
        lines = [f"iter {k + 1} residual {r:.3e} step {s:.3e}"
                 for k, (r, s) in enumerate(self.log)]
        return "\n".join(lines)


class _PeriodMap:
    """Cycle periods of the ansatz family on frozen quadrature node tables."""

    def __init__(self, ansatz: PeriodAnsatz, x_ref: np.ndarray, tol_scale: float = 1.0 / 16):
        self.A = ansatz
        f_ref = self._integrand(x_ref)
        tol = ansatz.quad_tol * tol_scale
        self.tables = [qd.sample_cycle(ansatz.curve, c, f_ref, tol) for c in ansatz.cycles]
        self._kappa_cache = [self.A.kappa(zs, ws) for zs, ws, _ in self.tables]
        self._basis_cache = [
            np.stack([b(zs, ws) for b in self.A.basis], axis=-1) if self.A.basis else None
            for zs, ws, _ in self.tables
        ]

    def _integrand(self, x):
        A = self.A
        if A.mode == "linear":
            def f(z, w):
                val = A.kappa(z, w)
                for xj, bj in zip(x, A.basis):
                    val = val + xj * bj(z, w)
                return val
        else:
            def f(z, w):
                s = np.zeros_like(np.asarray(z), dtype=complex)
                for xj, bj in zip(x, A.basis):
                    s = s + xj * bj(z, w)
                return np.exp(s) * A.kappa(z, w)
        return f

    def periods(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(len(self.tables), dtype=complex)
        for i, (zs, ws, cw) in enumerate(self.tables):
            kap = self._kappa_cache[i]
            bas = self._basis_cache[i]
            if self.A.mode == "linear":
                vals = kap + (bas @ x if bas is not None else 0.0)
            else:
                vals = np.exp(bas @ x) * kap if bas is not None else kap
            out[i] = cw @ vals
        return out

    def residual(self, x: np.ndarray, target: np.ndarray) -> np.ndarray:
        p = self.periods(x)
        if self.A.constraint == "full":
            r = np.concatenate([p.real, p.imag]) - \
                np.concatenate([np.asarray(target).real, np.asarray(target).imag])
        elif self.A.constraint == "real":
            r = p.real - np.asarray(target, dtype=float)
        else:
            r = p.imag - np.asarray(target, dtype=float)
        return r


def solve_periods(ansatz: PeriodAnsatz, target, x0=None, tol: float = 1e-10,
                  max_iter: int = 100, fd_step: float = 1e-6,
                  cond_limit: float = 1e8) -> SolveResult:
    """Damped Newton inversion of the ansatz period map from x = 0.

    The Jacobian is central finite differences over the real coordinates of
    the complex coefficient vector; rectangular systems take the minimum-norm
    least-squares step.  Raises SingularJacobian when the initial Jacobian is
    numerically rank-deficient and NoConvergence past ``max_iter``.
    """
    m = len(ansatz.basis)
    x = np.zeros(m, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
    target = np.asarray(target)
    pmap = _PeriodMap(ansatz, x)
    log = []
    refreshed = False
    r = pmap.residual(x, target)
    for it in range(1, max_iter + 1):
        rn = float(np.linalg.norm(r))
        if rn <= tol:
            # confirm on a table refined at the solution before accepting
            if not refreshed:
                pmap = _PeriodMap(ansatz, x)
                refreshed = True
                r = pmap.residual(x, target)
                continue
            return SolveResult(x, it - 1, rn, log)
        J = _fd_jacobian(pmap, x, target, fd_step)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[0] == 0 or sv[0] / max(sv[-1], 1e-300) > cond_limit:
            raise SingularJacobian(f"condition {sv[0] / max(sv[-1], 1e-300):.2e}")
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        dx = step[:m] + 1j * step[m:]
        t = 1.0
        while t > 1e-10:
            r_new = pmap.residual(x + t * dx, target)
            if np.linalg.norm(r_new) <= (1 - 0.5 * t) * rn:
                break
            t *= 0.5
        else:
            raise NoConvergence("backtracking stalled")
        x = x + t * dx
        r = r_new
        refreshed = False
        log.append((float(np.linalg.norm(r_new)), float(t)))
    raise NoConvergence(f"no convergence in {max_iter} iterations")


def _fd_jacobian(pmap: _PeriodMap, x: np.ndarray, target, fd_step: float) -> np.ndarray:
    m = len(x)
    h = fd_step * (1.0 + float(np.linalg.norm(x)))
    r0 = pmap.residual(x, target)
    J = np.zeros((len(r0), 2 * m))
    for j in range(2 * m):
        e = np.zeros(m, dtype=complex)
        if j < m:
            e[j] = h
        else:
            e[j - m] = 1j * h
        rp = pmap.residual(x + e, target)
        rm = pmap.residual(x - e, target)
        J[:, j] = (rp - rm) / (2 * h)
    return J


# ---------------------------------------------------------------------------
# flux prescription on Weierstrass data
# ---------------------------------------------------------------------------

@dataclass
class FluxFamily:
    """Height-density perturbation family with the Gauss map held fixed."""

    directions: list  # RationalOnCurve increments of f3
    fd_step: float = 1e-6


def assemble_components(g: RationalOnCurve, f3: RationalOnCurve,
                        curve: AlgebraicCurve):
    """Build (f1, f2, f3) from Gauss map and height density via the standard
    relations f1 = (1/g - g) f3 / 2, f2 = i (1/g + g) f3 / 2."""
    gn, gd = g.num, g.den
    n1 = (gd * gd - gn * gn) * f3.num * 0.5
    n2 = (gd * gd + gn * gn) * f3.num * 0.5j
    d12 = gn * gd * f3.den
    if curve.form == "rational":
        a1, b1 = wd._cancel_univariate(n1.coeffs[:, 0], d12.coeffs[:, 0])
        a2, b2 = wd._cancel_univariate(n2.coeffs[:, 0], d12.coeffs[:, 0])
        return (RationalOnCurve.from_univariate(a1, b1),
                RationalOnCurve.from_univariate(a2, b2), f3)
    n1 = cv.reduce_w(n1, curve).chop()
    n2 = cv.reduce_w(n2, curve).chop()
    d12 = cv.reduce_w(d12, curve).chop()
    return (RationalOnCurve(n1, d12), RationalOnCurve(n2, d12), f3)


def prescribe_flux(W: WeierstrassData, family: FluxFamily, targets,
                   tol: float = 1e-8, max_iter: int = 100) -> WeierstrassData:
    """Adjust the height density so prescribed cycle fluxes are met.

    ``targets`` is a list of (Cycle, flux 3-vector).  Real periods are
    constrained to stay zero.  The perturbed data is revalidated; failure
    raises ValidationRegression carrying the report.
    """
    g = wd.gauss_map(W)
    f3 = W.F[2]
    m = len(family.directions)
    cycles = [c for c, _ in targets]
    want = np.concatenate([np.asarray(v, dtype=float).reshape(3) for _, v in targets])

    def f3_of(x):
        # common-denominator sum f3 + sum x_k d_k
        num = f3.num
        den = f3.den
        for xk, d in zip(x, family.directions):
            num = num * d.den + d.num * den * complex(xk)
            den = den * d.den
        if W.curve.form == "rational":
            a, b = wd._cancel_univariate(num.coeffs[:, 0], den.coeffs[:, 0])
            return RationalOnCurve.from_univariate(a, b)
        return RationalOnCurve(cv.reduce_w(num, W.curve).chop(),
                               cv.reduce_w(den, W.curve).chop())

    def data_of(x):
        F = assemble_components(g, f3_of(x), W.curve)
        return WeierstrassData(W.signature, W.curve, F, W.translation, W.basepoint)

    # residual layout per cycle: [imag - target, real]
    def res(x):
        data = data_of(x)
        vals = []
        for i, cyc in enumerate(cycles):
            per = wd.cycle_periods(data, cyc)
            vals.append(per.imag - want[3 * i: 3 * i + 3])
            vals.append(per.real)
        return np.concatenate(vals)

    x = np.zeros(m)
    r = res(x)
    for it in range(max_iter):
        rn = float(np.linalg.norm(r))
        if rn <= tol:
            break
        h = family.fd_step * (1.0 + float(np.linalg.norm(x)))
        J = np.zeros((len(r), m))
        for j in range(m):
            e = np.zeros(m)
            e[j] = h
            J[:, j] = (res(x + e) - res(x - e)) / (2 * h)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[0] == 0 or sv[0] / max(sv[-1], 1e-300) > 1e8:
            raise SingularJacobian("flux family Jacobian is singular")
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        t = 1.0
        while t > 1e-10:
            r_new = res(x + t * step)
            if np.linalg.norm(r_new) <= (1 - 0.5 * t) * rn:
                break
            t *= 0.5
        else:
            raise NoConvergence("flux backtracking stalled")
        x = x + t * step
        r = r_new
    else:
        raise NoConvergence(f"flux prescription did not converge in {max_iter} iterations")

    out = data_of(x)
    report = wd.validate(out)
    if not report.passed:
        raise ValidationRegression("prescribed-flux data fails validation",
                                   report=report, data=out)
    return out
