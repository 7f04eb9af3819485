"""Built-in smooth test functions for interpolation experiments.

Each function accepts an (m, d) array of points (or a single (d,) point)
and returns m values (or a scalar).
"""

from __future__ import annotations

import numpy as np


def _rows(x):
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    return (xa[None, :] if single else xa), single


def franke(x):
    """Franke's function, the classic 2-d interpolation benchmark."""
    pts, single = _rows(x)
    if pts.shape[1] != 2:
        raise ValueError("franke is defined on 2-d points")
    u, v = pts[:, 0], pts[:, 1]
    out = (
        0.75 * np.exp(-((9 * u - 2) ** 2 + (9 * v - 2) ** 2) / 4)
        + 0.75 * np.exp(-((9 * u + 1) ** 2) / 49 - (9 * v + 1) / 10)
        + 0.5 * np.exp(-((9 * u - 7) ** 2 + (9 * v - 3) ** 2) / 4)
        - 0.2 * np.exp(-((9 * u - 4) ** 2) - (9 * v - 7) ** 2)
    )
    return float(out[0]) if single else out


def gaussian_bump(x):
    """exp(-4 |x - 0.5|^2), smooth in any dimension."""
    pts, single = _rows(x)
    out = np.exp(-4.0 * np.sum((pts - 0.5) ** 2, axis=1))
    return float(out[0]) if single else out


def cosine_product(x):
    """prod_l cos(pi x_l), smooth and sign-changing in any dimension."""
    pts, single = _rows(x)
    out = np.prod(np.cos(np.pi * pts), axis=1)
    return float(out[0]) if single else out


BUILTIN = {
    "franke": franke,
    "gauss": gaussian_bump,
    "cosprod": cosine_product,
}


def get_test_function(name: str):
    try:
        return BUILTIN[name]
    except KeyError:
        raise ValueError(
            f"unknown test function {name!r}; choose from {sorted(BUILTIN)}"
        ) from None
