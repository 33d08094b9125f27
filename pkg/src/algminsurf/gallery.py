"""Built-in reference surfaces used throughout the tests and the CLI."""

from __future__ import annotations

from .wdata import SurfaceSignature, WeierstrassData, from_gauss_height


def enneper(translation=(0.0, 0.0, 0.0)) -> WeierstrassData:
    """Enneper surface: g = z, height density z, one puncture at infinity."""
    return from_gauss_height([0, 1], [1], [0, 1], [1],
                             SurfaceSignature(0, 1, 1), translation, basepoint=0.0)


def catenoid(translation=(0.0, 0.0, 0.0)) -> WeierstrassData:
    """Catenoid: g = z, height density 1/z, punctures at 0 and infinity.

    The basepoint sits at z = 1 because z = 0 is a puncture in these
    classical coordinates.
    """
    return from_gauss_height([0, 1], [1], [1], [0, 1],
                             SurfaceSignature(0, 1, 2), translation, basepoint=1.0)


def doubled_enneper(translation=(0.0, 0.0, 0.0)) -> WeierstrassData:
    """Enneper with doubled Gauss map: g = z**2, height density z**2."""
    return from_gauss_height([0, 0, 1], [1], [0, 0, 1], [1],
                             SurfaceSignature(0, 2, 1), translation, basepoint=0.0)


_BUILTIN = {
    "enneper": enneper,
    "catenoid": catenoid,
    "doubled_enneper": doubled_enneper,
}


def by_name(name: str) -> WeierstrassData:
    key = name.lower().replace("-", "_")
    if key not in _BUILTIN:
        raise KeyError(f"unknown gallery surface {name!r}; have {sorted(_BUILTIN)}")
    return _BUILTIN[key]()


def names():
    return sorted(_BUILTIN)
