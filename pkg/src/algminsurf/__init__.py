"""Algebraic Weierstrass data for complete minimal surfaces.

Subpackages cover plane algebraic curves with sheet tracking (``curve``),
membership validation of surface data (``wdata``), immersion geometry and
meshing (``geometry``), period matrices and period-closing solvers
(``periods``), harmonic-measure parabolicity checks (``parabolic``) and the
space-filling end family with its symmetry analysis (``exotica``).
"""

from . import curve, errors, gallery, geometry, quadrature, wdata

__all__ = [
    "curve",
    "errors",
    "gallery",
    "geometry",
    "quadrature",
    "wdata",
]

__version__ = "0.1.0"
