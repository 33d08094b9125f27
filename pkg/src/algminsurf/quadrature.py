"""Adaptive contour integration along sheet-tracked polylines.

Panels are 15-point Gauss-Legendre rules; each polyline edge is split
recursively until the two-half refinement changes the panel value by less
than the requested tolerance.  The sheet variable w is continued through
the quadrature nodes in traversal order, so integrands may depend on both
coordinates of the curve.
"""

from __future__ import annotations

import math

import numpy as np

from .curve import AlgebraicCurve, Cycle, CurvePoint, SheetPath, _advance
from .errors import NoConvergence

_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)

DEFAULT_TOL = 1e-12
MAX_DEPTH = 26


def _panel(curve, z0, w0, z1, f):
    """One Gauss-Legendre panel on [z0, z1]; returns (value, nodes, ws, w_end)."""
    mid = 0.5 * (z0 + z1)
    half = 0.5 * (z1 - z0)
    nodes = mid + half * _GL_X
    if curve.form == "rational":
        wvals = np.zeros_like(nodes)
        w_end = 0.0 + 0.0j
    else:
        wvals = np.empty_like(nodes)
        w = w0
        zprev = z0
        for k, z in enumerate(nodes):
            w = _advance(curve, zprev, w, z)
            wvals[k] = w
            zprev = z
        w_end = _advance(curve, zprev, w, z1)
    vals = np.asarray(f(nodes, wvals))
    if vals.ndim == 1:
        value = half * np.sum(_GL_W * vals)
    else:
        value = half * np.tensordot(_GL_W, vals, axes=(0, 0))
    return value, nodes, wvals, w_end


def _segment(curve, z0, w0, z1, f, tol, depth, sink=None):
    whole, _, _, _ = _panel(curve, z0, w0, z1, f)
    zm = 0.5 * (z0 + z1)
    left, ln, lw, wm = _panel(curve, z0, w0, zm, f)
    right, rn, rw, w_end = _panel(curve, zm, wm, z1, f)
    err = np.max(np.abs(whole - (left + right)))
    if err <= tol or depth <= 0:
        if err > tol and err > 1e3 * tol:
            raise NoConvergence(f"quadrature stalled with error {err:.2e}")
        if sink is not None:
            h1, h2 = 0.5 * (zm - z0), 0.5 * (z1 - zm)
            sink.append((ln, lw, _GL_W * h1))
            sink.append((rn, rw, _GL_W * h2))
        return left + right, w_end
    v1, wm2 = _segment(curve, z0, w0, zm, f, tol / 2, depth - 1, sink)
    v2, w_end = _segment(curve, zm, wm2, z1, f, tol / 2, depth - 1, sink)
    return v1 + v2, w_end


def integrate_path(curve: AlgebraicCurve, path: SheetPath, f,
                   tol: float = DEFAULT_TOL, sink=None):
    """Integrate ``f(z, w) dz`` along a sheet path.

    Returns (value, end_point).  ``f`` receives node arrays and must return
    an array of values, either scalar-per-node or vector-per-node.
    """
    w = complex(path.start.w)
    total = None
    verts = path.vertices
    for z0, z1 in zip(verts[:-1], verts[1:]):
        if z0 == z1:
            continue
        val, w = _segment(curve, z0, w, z1, f, tol, MAX_DEPTH, sink)
        total = val if total is None else total + val
    if total is None:
        total = 0.0
    end = CurvePoint(verts[-1], w, float(abs(curve.p(verts[-1], w))))
    return total, end


def integrate_cycle(curve: AlgebraicCurve, cycle: Cycle, f,
                    tol: float = DEFAULT_TOL):
    """Integrate ``f(z, w) dz`` over a formal combination of closed loops."""
    total = None
    for path, coeff in cycle.loops:
        val, end = integrate_path(curve, path, f, tol)
        if abs(end.w - path.start.w) > 1e-6 * (1.0 + abs(end.w)):
            raise NoConvergence("loop continuation did not close up")
        val = coeff * val
        total = val if total is None else total + val
    return 0.0 if total is None else total


def sample_cycle(curve: AlgebraicCurve, cycle: Cycle, refine_f,
                 tol: float = DEFAULT_TOL):
    """Quadrature node table for a cycle, refined against ``refine_f``.

    Returns (z_nodes, w_nodes, complex_weights); afterwards any integrand g
    can be integrated over the same cycle as ``weights @ g(z_nodes, w_nodes)``
    at the refinement quality of ``refine_f``.
    """
    zs, ws, cw = [], [], []
    for path, coeff in cycle.loops:
        sink = []
        integrate_path(curve, path, refine_f, tol, sink)
        for nodes, wvals, weights in sink:
            zs.append(nodes)
            ws.append(wvals)
            cw.append(coeff * weights)
    if not zs:
        return (np.zeros(0, complex),) * 3
    return np.concatenate(zs), np.concatenate(ws), np.concatenate(cw)


def integrate_real_interval(f, a: float, b: float, tol: float = 1e-11,
                            rel_tol: float = 1e-10, depth: int = 40) -> float:
    """Adaptive Gauss-Legendre for a real-valued integrand on [a, b].

    Panels refine until the two-half update is below ``tol`` absolute or
    ``rel_tol`` relative to the panel value.
    """

    def panel(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return half * float(np.sum(_GL_W * f(mid + half * _GL_X)))

    def rec(lo, hi, whole, d, t):
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        err = abs(whole - left - right)
        if err <= max(t, rel_tol * abs(left + right)) or d <= 0:
            return left + right
        return rec(lo, mid, left, d - 1, t / 2) + rec(mid, hi, right, d - 1, t / 2)

    return rec(a, b, panel(a, b), depth, tol)
