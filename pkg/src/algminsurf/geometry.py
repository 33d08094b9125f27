"""Immersion geometry: evaluation, metric and curvature, flux, meshes.

The immersion is X(q) = x + Re integral_{basepoint}^q F dz along a path that
stays clear of poles and branch values.  The induced metric in the z-chart is
``ds^2 = (1/2) sum |f_j|^2 |dz|^2``; the Gauss curvature comes from the
(g, f3) form of the same data and is always nonpositive.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import curve as cv
from . import quadrature as qd
from . import wdata as wd
from .curve import AlgebraicCurve, CurvePoint, Cycle, SheetPath
from .errors import AtPole, PathThroughPole, Unsupported
from .wdata import WeierstrassData

_INF = complex(math.inf, 0.0)


@dataclass(frozen=True)
class ImmersionPoint:
    position: np.ndarray  # real 3-vector
    source: CurvePoint
    path_id: str = ""

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        p.setflags(write=False)
        object.__setattr__(self, "position", p)


@dataclass(frozen=True)
class MetricSample:
    at: CurvePoint
    ds2_coeff: float
    gauss_curv: float


@dataclass(frozen=True)
class FluxVector:
    cycle_id: str
    value: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.value, dtype=float).reshape(3)
        v.setflags(write=False)
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray   # (n, 3)
    faces: np.ndarray      # (m, 3) int, 0-based
    param_grid: np.ndarray  # (n,) complex source points


def _pole_obstacles(W: WeierstrassData):
    return [p.z for p in wd.polar_set(W, strict=False).points if not p.at_infinity]


def _obstacles(W: WeierstrassData):
    return list(W.curve.branch_values) + _pole_obstacles(W)


def evaluate(W: WeierstrassData, q: CurvePoint, path: SheetPath | None = None,
             tol: float = 1e-12, path_id: str = "") -> ImmersionPoint:
    """Immersion value at q: translation + Re of the path integral of F dz.

    Without an explicit path a straight route from the basepoint with
    automatic detours is used.  Raises PathThroughPole when q or the
    basepoint sits on a pole.
    """
    if path is None:
        obstacles = _obstacles(W)
        clear = max(W.curve.clearance, 1e-9)
        verts = cv.plan_polyline(W.basepoint.z, q.z, obstacles, clear)
        path = SheetPath(tuple(verts), W.basepoint)
    val, end = qd.integrate_path(W.curve, path, lambda z, w: W.component_values(z, w), tol)
    if abs(end.z - q.z) > 1e-9 * (1 + abs(q.z)):
        raise ValueError("path does not end at the requested point")
    pos = W.translation + np.real(np.asarray(val))
    return ImmersionPoint(pos, CurvePoint(end.z, end.w, end.residual), path_id)


# ---------------------------------------------------------------------------
# metric and curvature
# ---------------------------------------------------------------------------

def _derivatives(W: WeierstrassData):
    # derivative rationals are pure functions of W; memoize on the instance
    cached = getattr(W, "_deriv_cache", None)
    if cached is None:
        cached = tuple(wd.curve_derivative(fj, W.curve) for fj in W.F)
        object.__setattr__(W, "_deriv_cache", cached)
    return cached


def _component_and_derivative_values(W: WeierstrassData, z, w):
    f = W.component_values(z, w)
    df = np.stack([dfj(z, w) for dfj in _derivatives(W)], axis=-1)
    return f, df


def metric_at(W: WeierstrassData, q: CurvePoint, consistency_tol: float = 1e-10) -> MetricSample:
    """Conformal metric factor and Gauss curvature at a curve point.

    The factor is computed both as half the component square sum and through
    the (g, f3) expression; the two must agree to ``consistency_tol``
    relative.  Raises AtPole near the polar set.
    """
    lam, K = _metric_fields(W, np.array([q.z]), np.array([q.w]), consistency_tol)
    return MetricSample(q, float(lam[0]), float(K[0]))


def _metric_fields(W: WeierstrassData, z, w, consistency_tol: float | None = 1e-10):
    """Metric factor and curvature on arrays of curve points.

    With a = f1 - i f2 and b = f1 + i f2, conformality gives the Gauss map
    as f3/a and equivalently -b/f3, and the curvature density
    4 |dg| |g| / (|f3| (1 + |g|^2)^2) has the two representation-stable forms
    used below; the better-conditioned one is chosen pointwise.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        f, df = _component_and_derivative_values(W, z, w)
        a = f[..., 0] - 1j * f[..., 1]
        b = f[..., 0] + 1j * f[..., 1]
        f3 = f[..., 2]
    if not np.all(np.isfinite(np.stack([a, b, f3]))):
        raise AtPole("component values are not finite here")
    lam_direct = 0.5 * np.sum(np.abs(f) ** 2, axis=-1)
    lam_gauss = 0.25 * (np.abs(a) + np.abs(b)) ** 2
    if consistency_tol is not None:
        scale = np.maximum(lam_direct, 1e-300)
        rel = np.max(np.abs(lam_direct - lam_gauss) / scale)
        if rel > consistency_tol:
            raise AtPole(f"metric expressions disagree (rel {rel:.2e}); "
                         "conformality or regularity is violated here")
    da = df[..., 0] - 1j * df[..., 1]
    db = df[..., 0] + 1j * df[..., 1]
    f3p = df[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        term_a = 4.0 * np.abs(a) * np.abs(f3p * a - f3 * da) / \
            (np.abs(a) ** 2 + np.abs(f3) ** 2) ** 2
        term_b = 4.0 * np.abs(b) * np.abs(db * f3 - b * f3p) / \
            (np.abs(b) ** 2 + np.abs(f3) ** 2) ** 2
    term = np.where(np.abs(a) >= np.abs(b), term_a, term_b)
    K = -np.square(term)
    return lam_direct, K


def total_curvature(W: WeierstrassData, radius: float = 100.0,
                    n_theta: int = 256) -> tuple:
    """Total Gauss curvature, numerically and from the Gauss-map degree.

    Returns (numeric, exact, tail_bound).  The numeric value integrates
    K dA over |z| <= radius on every sheet; the tail beyond the truncation is
    bounded by the spherical image area of the Gauss map out there.  The
    exact value is -4 pi deg(g) with the degree computed by two agreeing
    methods.
    """
    counted, algebraic, agree = wd.gauss_degree(W)
    if not agree:
        raise Unsupported("Gauss-degree methods disagree; data looks unreduced")
    exact = -4.0 * math.pi * counted
    numeric = _integrate_curvature(W, radius, n_theta)
    tail = _tail_bound(W, counted, radius)
    return numeric, exact, tail


def _integrate_curvature(W: WeierstrassData, radius: float, n_theta: int) -> float:
    curve = W.curve

    def row(r: float) -> float:
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        z = r * np.exp(1j * theta)
        acc = np.zeros(len(z))
        if curve.form == "rational":
            lam, K = _metric_fields(W, z, np.zeros_like(z), consistency_tol=None)
            acc = K * lam
        else:
            for w in _fiber_grid(curve, z):
                lam, K = _metric_fields(W, z, w, consistency_tol=None)
                acc = acc + K * lam
        vals = acc * r
        return float(np.mean(vals) * 2 * np.pi)

    # radial integration in log space, adaptive panels
    lo, hi = math.log(1e-4), math.log(radius)
    f = lambda ts: np.array([row(math.exp(t)) * math.exp(t) for t in np.atleast_1d(ts)])
    return qd.integrate_real_interval(f, lo, hi, tol=1e-8, depth=24)


def _fiber_grid(curve, z):
    if curve.form == "hyperelliptic":
        r = np.sqrt(curve.q_at(z).astype(complex))
        return [r, -r]
    raise Unsupported("numeric total curvature needs the sphere or a hyperelliptic model")


def _tail_bound(W: WeierstrassData, degree: int, radius: float, n: int = 512) -> float:
    """Spherical-cap bound on the curvature mass outside the truncation disk."""
    rng = np.random.default_rng(20260214)
    u = rng.uniform(0, 1, n)
    ang = rng.uniform(0, 2 * np.pi, n)
    z = radius / np.sqrt(u) * np.exp(1j * ang)  # inversion-uniform on |z| > radius
    if W.curve.form == "rational":
        g = wd.gauss_map(W)
        gv = g(z, np.zeros_like(z))
    else:
        g = wd.gauss_map(W)
        gv = np.concatenate([g(z, wv) for wv in _fiber_grid(W.curve, z)])
    # chordal distance from the limiting value at infinity
    g_inf = gv[np.argmax(np.abs(z))]
    chord = 2 * np.abs(gv - g_inf) / np.sqrt((1 + np.abs(gv) ** 2) * (1 + abs(g_inf) ** 2))
    frac = float(np.clip(np.max(chord) / 2.0, 0.0, 1.0)) ** 2
    return 4 * math.pi * degree * frac


# ---------------------------------------------------------------------------
# flux
# ---------------------------------------------------------------------------

def flux(W: WeierstrassData, cycle: Cycle, tol: float = 1e-12) -> FluxVector:
    """Flux through a cycle: the imaginary component periods of F dz."""
    per = wd.cycle_periods(W, cycle)
    return FluxVector(cycle.name, np.imag(per))


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnularGrid:
    r_inner: float
    r_outer: float
    n_r: int
    n_theta: int

    def nodes(self):
        rs = np.geomspace(self.r_inner, self.r_outer, self.n_r)
        th = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        return rs[:, None] * np.exp(1j * th)[None, :], True  # wraps in theta


@dataclass(frozen=True)
class RectGrid:
    x0: float
    x1: float
    y0: float
    y1: float
    n_x: int
    n_y: int

    def nodes(self):
        xs = np.linspace(self.x0, self.x1, self.n_x)
        ys = np.linspace(self.y0, self.y1, self.n_y)
        return xs[:, None] + 1j * ys[None, :], False


def mesh(W: WeierstrassData, grid, out: str | None = None,
         tree: str = "row", tol: float = 1e-12) -> Mesh:
    """Evaluate the immersion over a grid and triangulate it.

    Vertices are integrated along a spanning tree of grid edges rooted at the
    node closest to the basepoint; ``tree`` picks the traversal ("row" or
    "column") so that homotopic alternatives can be compared.  Degenerate
    triangles are dropped.  When ``out`` is given the mesh is also written as
    an OBJ file.
    """
    nodes, wrap = grid.nodes()
    n_i, n_j = nodes.shape
    if n_i * n_j == 0:
        return Mesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int), np.zeros(0, complex))
    obstacles = _obstacles(W)
    clear = max(W.curve.clearance, 1e-9)
    flat = nodes.ravel()
    for z in flat:
        if any(abs(z - o) < clear for o in obstacles):
            raise PathThroughPole(f"grid node {z} violates the pole/branch clearance")

    order, parent = _spanning_tree(n_i, n_j, wrap, tree)
    root = order[0]
    root_z = flat[root]
    verts_x = np.zeros((n_i * n_j, 3))
    wvals = np.zeros(n_i * n_j, dtype=complex)

    route = cv.plan_polyline(W.basepoint.z, root_z, obstacles, clear)
    val, end = qd.integrate_path(W.curve, SheetPath(tuple(route), W.basepoint),
                                 lambda z, w: W.component_values(z, w), tol)
    acc = {root: np.asarray(val)}
    wvals[root] = end.w
    verts_x[root] = W.translation + np.real(acc[root])
    for node in order[1:]:
        par = parent[node]
        z0, z1 = flat[par], flat[node]
        seg = SheetPath((z0, z1), CurvePoint(z0, wvals[par]))
        val, end = qd.integrate_path(W.curve, seg,
                                     lambda z, w: W.component_values(z, w), tol)
        acc[node] = acc[par] + np.asarray(val)
        wvals[node] = end.w
        verts_x[node] = W.translation + np.real(acc[node])

    faces = _grid_faces(n_i, n_j, wrap, verts_x)
    m = Mesh(verts_x, faces, flat.copy())
    if out is not None:
        write_obj(m, out)
    return m


def _spanning_tree(n_i, n_j, wrap, tree):
    def idx(i, j):
        return i * n_j + j

    order, parent = [], {}
    if tree == "row":
        order.append(idx(0, 0))
        for j in range(1, n_j):
            parent[idx(0, j)] = idx(0, j - 1)
            order.append(idx(0, j))
        for i in range(1, n_i):
            for j in range(n_j):
                parent[idx(i, j)] = idx(i - 1, j)
                order.append(idx(i, j))
    elif tree == "column":
        order.append(idx(0, 0))
        for i in range(1, n_i):
            parent[idx(i, 0)] = idx(i - 1, 0)
            order.append(idx(i, 0))
        for j in range(1, n_j):
            for i in range(n_i):
                parent[idx(i, j)] = idx(i, j - 1)
                order.append(idx(i, j))
    else:
        raise ValueError("tree must be 'row' or 'column'")
    return order, parent


def _grid_faces(n_i, n_j, wrap, verts):
    def idx(i, j):
        return i * n_j + j

    faces = []
    j_pairs = [(j, j + 1) for j in range(n_j - 1)]
    if wrap:
        j_pairs.append((n_j - 1, 0))
    for i in range(n_i - 1):
        for j0, j1 in j_pairs:
            quad = (idx(i, j0), idx(i, j1), idx(i + 1, j1), idx(i + 1, j0))
            for tri in ((quad[0], quad[1], quad[2]), (quad[0], quad[2], quad[3])):
                p0, p1, p2 = (verts[t] for t in tri)
                area = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0))
                if area > 1e-14:
                    faces.append(tri)
    return np.array(faces, dtype=int) if faces else np.zeros((0, 3), dtype=int)


def write_obj(m: Mesh, path: str) -> None:
    """ASCII OBJ: 'v x y z' with 9 significant digits, then 1-based faces."""
    lines = []
    for v in m.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for f in m.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# completeness probe
# ---------------------------------------------------------------------------

def completeness_probe(W: WeierstrassData, ray: SheetPath, levels: int = 10):
    """Cumulative intrinsic length along geometric truncations of a ray.

    The ray vertices should approach a puncture (or any target point).  The
    returned dict holds the per-level cumulative lengths and a verdict:
    ``unbounded_consistent`` is True when the lengths keep growing by a
    definite factor across the last levels.
    """
    verts = list(ray.vertices)
    if len(verts) < levels + 1:
        raise ValueError("ray needs at least levels+1 vertices")
    w = complex(ray.start.w)
    lengths = []
    total = 0.0
    cuts = np.linspace(0, len(verts) - 1, levels + 1).astype(int)[1:]
    prev = 0
    for cut in cuts:
        for k in range(prev, cut):
            z0, z1 = verts[k], verts[k + 1]
            total += _segment_length(W, z0, w, z1)
            if W.curve.form != "rational":
                w = cv._advance(W.curve, z0, w, z1)
        prev = cut
        lengths.append(total)
    lengths = np.array(lengths)
    grow = lengths[1:] / np.maximum(lengths[:-1], 1e-300)
    unbounded = bool(np.all(grow[-3:] > 1.1))
    return {"lengths": lengths, "growth": grow, "unbounded_consistent": unbounded}


def _segment_length(W: WeierstrassData, z0: complex, w0: complex, z1: complex) -> float:
    def speed(ts):
        ts = np.atleast_1d(ts)
        z = z0 + (z1 - z0) * ts
        if W.curve.form == "rational":
            wv = np.zeros_like(z)
        else:
            wv = np.array([cv._advance(W.curve, z0, w0, zz) for zz in z])
        f = W.component_values(z, wv)
        lam = 0.5 * np.sum(np.abs(f) ** 2, axis=-1)
        return np.sqrt(lam) * abs(z1 - z0)

    return qd.integrate_real_interval(speed, 0.0, 1.0, tol=1e-10, depth=20)


def geometric_ray(W: WeierstrassData, z_from: complex, target: complex,
                  levels: int = 10, shrink: float = 0.5, n_per_level: int = 8) -> SheetPath:
    """Straight ray from z_from toward ``target`` with geometrically shrinking
    offsets; suitable input for :func:`completeness_probe`."""
    pts = []
    if math.isinf(abs(target)):
        # ray to infinity: geometrically growing radius along the ray direction
        direction = z_from / abs(z_from) if z_from != 0 else 1.0
        for k in range(levels + 1):
            for m in range(n_per_level):
                t = k + m / n_per_level
                pts.append(direction * abs(z_from) * (1.0 / shrink) ** t)
    else:
        gap0 = z_from - target
        for k in range(levels + 1):
            for m in range(n_per_level):
                t = k + m / n_per_level
                pts.append(target + gap0 * shrink ** t)
    start_w = 0.0 if W.curve.form == "rational" else cv.fiber(W.curve, pts[0])[0]
    return SheetPath(tuple(pts), CurvePoint(pts[0], start_w))
