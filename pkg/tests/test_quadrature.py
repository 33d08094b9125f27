import cmath
import math

import numpy as np
import pytest

from algminsurf import curve as cv
from algminsurf import quadrature as qd


@pytest.fixture(scope="module")
def sphere():
    return cv.AlgebraicCurve.riemann_sphere()


def test_residue_integral(sphere):
    loop = cv.circle_path(sphere, 0.0, 1.0, n=32)
    val = qd.integrate_cycle(sphere, cv.Cycle.from_path(loop), lambda z, w: 1.0 / z)
    assert val == pytest.approx(2j * math.pi, abs=1e-12)


def test_polynomial_antiderivative(sphere):
    path = cv.SheetPath([0.0, 1.0], cv.CurvePoint(0.0, 0.0))
    val, end = qd.integrate_path(sphere, path, lambda z, w: z * z)
    assert val == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert end.z == 1.0


def test_vector_integrand(sphere):
    path = cv.SheetPath([0.0, 1.0], cv.CurvePoint(0.0, 0.0))
    val, _ = qd.integrate_path(sphere, path, lambda z, w: np.stack([np.ones_like(z), z], axis=-1))
    assert val[0] == pytest.approx(1.0, abs=1e-14)
    assert val[1] == pytest.approx(0.5, abs=1e-14)


def test_sheet_tracked_integral_matches_sqrt_branch():
    # integral of w dz along z in [1, 4] with w = +sqrt(z): (2/3)(8 - 1)
    c = cv.AlgebraicCurve.hyperelliptic([0, 1])
    path = cv.SheetPath([1.0, 4.0], cv.CurvePoint(1.0, 1.0))
    val, end = qd.integrate_path(c, path, lambda z, w: w)
    assert val == pytest.approx(14.0 / 3.0, abs=1e-11)
    assert end.w == pytest.approx(2.0, abs=1e-10)


def test_doubling_refinement_stability():
    # periods move by less than 1e-9 when the tolerance is cut by 4
    c = cv.AlgebraicCurve.hyperelliptic([0, -1, 0, 1])
    cycles = cv.canonical_cycles(c)
    f = lambda z, w: 1.0 / w
    coarse = qd.integrate_cycle(c, cycles[0], f, tol=1e-12)
    fine = qd.integrate_cycle(c, cycles[0], f, tol=2.5e-13)
    assert abs(coarse - fine) < 1e-9


def test_real_interval():
    val = qd.integrate_real_interval(lambda x: np.exp(-x), 0.0, 3.0)
    assert val == pytest.approx(1 - math.exp(-3.0), abs=1e-12)
