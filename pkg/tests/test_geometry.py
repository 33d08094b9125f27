import cmath
import math

import numpy as np
import pytest

from algminsurf import curve as cv
from algminsurf import gallery
from algminsurf import geometry as gm
from algminsurf import wdata as wd


@pytest.fixture(scope="module")
def enneper():
    return gallery.enneper()


@pytest.fixture(scope="module")
def catenoid():
    return gallery.catenoid()


@pytest.fixture(scope="module")
def doubled():
    return gallery.doubled_enneper()


# -- evaluation ---------------------------------------------------------------

def test_evaluate_at_basepoint_is_translation(enneper):
    p = gm.evaluate(enneper, cv.CurvePoint(0.0, 0.0))
    assert np.allclose(p.position, [0, 0, 0], atol=1e-14)
    shifted = gallery.enneper(translation=(1.0, -2.0, 0.5))
    p2 = gm.evaluate(shifted, cv.CurvePoint(0.0, 0.0))
    assert np.allclose(p2.position, [1.0, -2.0, 0.5], atol=1e-14)


def test_evaluate_enneper_unit_segment(enneper):
    # hand antiderivative of ((1-z^2)/2, i(1+z^2)/2, z) on [0, 1]
    p = gm.evaluate(enneper, cv.CurvePoint(1.0, 0.0))
    assert np.allclose(p.position, [1.0 / 3.0, 0.0, 0.5], atol=1e-12)


def test_evaluate_path_independence(catenoid):
    q = cv.CurvePoint(-2.0 + 0.0j, 0.0)
    # two homotopic routes around the puncture at 0 (same side)
    via_up = cv.SheetPath((1.0, 1.0 + 1.5j, -2.0 + 1.5j, -2.0), catenoid.basepoint)
    via_up2 = cv.SheetPath((1.0, 0.3 + 0.8j, -1.2 + 0.9j, -2.0), catenoid.basepoint)
    p1 = gm.evaluate(catenoid, q, via_up)
    p2 = gm.evaluate(catenoid, q, via_up2)
    assert np.max(np.abs(p1.position - p2.position)) < 1e-8


def test_evaluate_around_pole_differs_by_period(catenoid):
    # routes on opposite sides of z = 0 differ by the imaginary period only
    q = cv.CurvePoint(-2.0 + 0.0j, 0.0)
    up = gm.evaluate(catenoid, q, cv.SheetPath((1.0, 1.0 + 1.5j, -2.0 + 1.5j, -2.0),
                                               catenoid.basepoint))
    dn = gm.evaluate(catenoid, q, cv.SheetPath((1.0, 1.0 - 1.5j, -2.0 - 1.5j, -2.0),
                                               catenoid.basepoint))
    assert np.max(np.abs(up.position - dn.position)) < 1e-8


# -- metric and curvature --------------------------------------------------------

def test_enneper_metric_at_origin(enneper):
    m = gm.metric_at(enneper, cv.CurvePoint(0.0, 0.0))
    assert m.ds2_coeff == pytest.approx(0.25, rel=1e-12)
    assert m.gauss_curv == pytest.approx(-16.0, rel=1e-10)


def test_enneper_metric_closed_form(enneper):
    rng = np.random.default_rng(3)
    for _ in range(25):
        z = complex(*rng.uniform(-1.5, 1.5, 2))
        m = gm.metric_at(enneper, cv.CurvePoint(z, 0.0))
        assert m.ds2_coeff == pytest.approx(0.25 * (1 + abs(z) ** 2) ** 2, rel=1e-11)
        assert m.gauss_curv == pytest.approx(-16.0 / (1 + abs(z) ** 2) ** 4, rel=1e-9)
        assert m.gauss_curv <= 0


def test_catenoid_metric_closed_form(catenoid):
    rng = np.random.default_rng(4)
    for _ in range(25):
        z = complex(*rng.uniform(0.2, 1.8, 2))
        m = gm.metric_at(catenoid, cv.CurvePoint(z, 0.0))
        lam = 0.25 * abs(z) ** -2 * (abs(z) ** -1 + abs(z)) ** 2
        K = -(4 * abs(z) ** 2 / (1 + abs(z) ** 2) ** 2) ** 2
        assert m.ds2_coeff == pytest.approx(lam, rel=1e-11)
        assert m.gauss_curv == pytest.approx(K, rel=1e-9)


def test_metric_consistency_everywhere(enneper, catenoid, doubled):
    rng = np.random.default_rng(5)
    for W in (enneper, catenoid, doubled):
        pts = rng.uniform(-3, 3, (2, 1400)).astype(float)
        z = pts[0] + 1j * pts[1]
        z = z[np.abs(z) > 1e-2][:1000]
        assert len(z) == 1000
        lam, K = gm._metric_fields(W, z, np.zeros_like(z), consistency_tol=1e-10)
        assert np.all(K <= 0)
        assert np.all(lam > 0)


def test_metric_at_pole_raises(catenoid):
    with pytest.raises(Exception):
        gm.metric_at(catenoid, cv.CurvePoint(0.0, 0.0))


# -- flux --------------------------------------------------------------------------

def test_catenoid_neck_flux(catenoid):
    loop = cv.circle_path(catenoid.curve, 0.0, 1.0, start=cv.CurvePoint(1.0, 0.0), n=64)
    fx = gm.flux(catenoid, cv.Cycle.from_path(loop, name="neck"))
    assert np.allclose(fx.value, [0.0, 0.0, 2 * math.pi], atol=1e-10)
    rev = gm.flux(catenoid, cv.Cycle.from_path(loop, name="neck").reversed())
    assert np.allclose(rev.value, -fx.value, atol=1e-12)


def test_enneper_flux_trivial(enneper):
    loop = cv.circle_path(enneper.curve, 0.3, 1.0, n=48)
    fx = gm.flux(enneper, cv.Cycle.from_path(loop))
    assert np.allclose(fx.value, 0.0, atol=1e-11)


def test_flux_additive_under_concatenation(catenoid):
    l1 = cv.circle_path(catenoid.curve, 0.0, 0.5, start=cv.CurvePoint(0.5, 0.0), n=48)
    l2 = cv.circle_path(catenoid.curve, 0.0, 2.0, start=cv.CurvePoint(2.0, 0.0), n=48)
    c1, c2 = cv.Cycle.from_path(l1, "c1"), cv.Cycle.from_path(l2, "c2")
    both = c1 + c2
    v = gm.flux(catenoid, both).value
    assert np.allclose(v, gm.flux(catenoid, c1).value + gm.flux(catenoid, c2).value,
                       atol=1e-12)


# -- total curvature -----------------------------------------------------------------

def test_total_curvature_enneper(enneper):
    numeric, exact, tail = gm.total_curvature(enneper)
    assert exact == pytest.approx(-4 * math.pi, rel=1e-14)
    assert abs(numeric - exact) <= tail + 1e-3 * 4 * math.pi


def test_total_curvature_catenoid(catenoid):
    numeric, exact, tail = gm.total_curvature(catenoid)
    assert exact == pytest.approx(-4 * math.pi)
    assert abs(numeric - exact) <= tail + 1e-3 * 4 * math.pi


def test_total_curvature_doubled(doubled):
    numeric, exact, tail = gm.total_curvature(doubled)
    assert exact == pytest.approx(-8 * math.pi)
    assert abs(numeric - exact) <= tail + 1e-3 * 8 * math.pi


def test_total_curvature_monotone_in_radius(enneper):
    errs = []
    for R in (10.0, 30.0, 100.0):
        numeric, exact, _ = gm.total_curvature(enneper, radius=R)
        errs.append(abs(numeric - exact))
    assert errs[0] > errs[1] > errs[2]


# -- meshes ----------------------------------------------------------------------------

def test_catenoid_mesh_matches_implicit_surface(catenoid, tmp_path):
    grid = gm.AnnularGrid(0.2, 5.0, 64, 64)
    m = gm.mesh(catenoid, grid, tree="row")
    assert len(m.vertices) == 64 * 64
    # implicit catenoid: sqrt((X1-1)^2 + X2^2) = cosh(X3) in these coordinates
    r = np.hypot(m.vertices[:, 0] - 1.0, m.vertices[:, 1])
    assert np.max(np.abs(r - np.cosh(m.vertices[:, 2]))) < 1e-7


def test_mesh_tree_independence(catenoid, enneper):
    grid = gm.AnnularGrid(0.3, 3.0, 12, 16)
    m1 = gm.mesh(catenoid, grid, tree="row")
    m2 = gm.mesh(catenoid, grid, tree="column")
    assert np.max(np.abs(m1.vertices - m2.vertices)) < 1e-8
    grid2 = gm.RectGrid(-1, 1, -1, 1, 8, 8)
    m3 = gm.mesh(enneper, grid2, tree="row")
    m4 = gm.mesh(enneper, grid2, tree="column")
    assert np.max(np.abs(m3.vertices - m4.vertices)) < 1e-8


def test_enneper_disc_mesh(enneper):
    m = gm.mesh(enneper, gm.RectGrid(-1, 1, -1, 1, 32, 32))
    assert len(m.vertices) == 1024
    assert np.all(np.isfinite(m.vertices))


def test_obj_output_deterministic(catenoid, tmp_path):
    grid = gm.AnnularGrid(0.5, 2.0, 6, 8)
    p1, p2 = tmp_path / "a.obj", tmp_path / "b.obj"
    gm.mesh(catenoid, grid, out=str(p1))
    gm.mesh(catenoid, grid, out=str(p2))
    b1, b2 = p1.read_bytes(), p2.read_bytes()
    assert b1 == b2
    text = b1.decode()
    assert text.startswith("v ")
    assert " f " not in text.split("f ", 1)[0]  # vertices first, then faces
    nverts = sum(1 for line in text.splitlines() if line.startswith("v "))
    assert nverts == 48


def test_empty_grid_mesh(catenoid):
    m = gm.mesh(catenoid, gm.RectGrid(1, 1, 1, 1, 0, 0))
    assert len(m.vertices) == 0 and len(m.faces) == 0


# -- completeness probe -------------------------------------------------------------

def test_catenoid_ray_to_puncture_unbounded(catenoid):
    ray = gm.geometric_ray(catenoid, 1.0, 0.0, levels=10)
    rep = gm.completeness_probe(catenoid, ray)
    assert rep["unbounded_consistent"]
    # dominant term 0.5 |dz|/|z|^2 integrates to about 0.5/r
    r_last = abs(ray.vertices[-1])
    assert rep["lengths"][-1] == pytest.approx(0.5 / r_last, rel=0.15)


def test_enneper_ray_to_infinity_unbounded(enneper):
    ray = gm.geometric_ray(enneper, 1.0, complex(math.inf, 0), levels=10)
    rep = gm.completeness_probe(enneper, ray)
    assert rep["unbounded_consistent"]


def test_ray_to_regular_point_bounded(enneper):
    ray = gm.geometric_ray(enneper, 1.0, 0.2 + 0.1j, levels=10)
    rep = gm.completeness_probe(enneper, ray)
    assert not rep["unbounded_consistent"]
    assert rep["lengths"][-1] < 2.0
