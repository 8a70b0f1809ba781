"""Pointwise and quadrature kernels evaluated once per right-hand-side call.

Every kernel works on batches: the leading axis indexes independent samples
and the trailing axis indexes grid points (flattened, C order). Two
implementations exist per kernel, a plain numpy one and an ``@njit`` loop
one; the module-level names are bound to the backend chosen in
:mod:`mildflow._backend`.
"""

import numpy as np

from mildflow._backend import BACKEND, HAVE_NUMBA, njit

__all__ = [
    "BACKEND",
    "nonlocal_positive_part",
    "advective_negative_part",
    "autocatalytic",
    "signed_power",
    "implementations",
]


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _nonlocal_positive_part_np(kernel, weights, u, theta):
    excess = np.maximum(u - theta, 0.0) * weights
    return excess @ kernel.T


def _advective_negative_part_np(omega, p, beta_u, nu):
    dot = np.einsum("skj,skj->sj", omega, p)
    expo = 2.0 - nu
    if expo == 0.0:
        mag = np.ones_like(beta_u)
    else:
        mag = np.sqrt(np.einsum("skj,skj->sj", p, p)) ** expo
    return np.maximum(-(dot + beta_u * mag), 0.0)


def _autocatalytic_np(u, v, mu, beta, theta, a):
    up = np.maximum(u, 0.0)
    vp = np.maximum(v, 0.0)
    react = up**mu * vp**beta
    return -react, react - a * vp**theta


def _signed_power_np(u, p):
    return np.sign(u) * np.abs(u) ** p


# --------------------------------------------------------------------------
# loop path (compiled when numba is present)
# --------------------------------------------------------------------------

def _nonlocal_positive_part_loop(kernel, weights, u, theta):
    S, P = u.shape
    excess = np.empty((S, P))
    for s in range(S):
        for j in range(P):
            d = u[s, j] - theta[s, j]
            excess[s, j] = d * weights[j] if d > 0.0 else 0.0
    # the dense quadrature itself goes to BLAS
    return np.dot(excess, kernel.T)


def _advective_negative_part_loop(omega, p, beta_u, nu):
    S, d, P = p.shape
    out = np.empty((S, P))
    expo = 2.0 - nu
    for s in range(S):
        for j in range(P):
            dot = 0.0
            sq = 0.0
            for k in range(d):
                dot += omega[s, k, j] * p[s, k, j]
                sq += p[s, k, j] * p[s, k, j]
            if expo == 0.0:
                mag = 1.0
            else:
                mag = np.sqrt(sq) ** expo
            r = dot + beta_u[s, j] * mag
            out[s, j] = -r if r < 0.0 else 0.0
    return out


def _autocatalytic_loop(u, v, mu, beta, theta, a):
    S, P = u.shape
    fu = np.empty((S, P))
    fv = np.empty((S, P))
    for s in range(S):
        for j in range(P):
            up = u[s, j] if u[s, j] > 0.0 else 0.0
            vp = v[s, j] if v[s, j] > 0.0 else 0.0
            react = up**mu * vp**beta
            fu[s, j] = -react
            fv[s, j] = react - a * vp**theta
    return fu, fv


def _signed_power_loop(u, p):
    S, P = u.shape
    out = np.empty((S, P))
    for s in range(S):
        for j in range(P):
            x = u[s, j]
            if x > 0.0:
                out[s, j] = x**p
            elif x < 0.0:
                out[s, j] = -((-x) ** p)
            else:
                out[s, j] = 0.0
    return out


_NUMPY = {
    "nonlocal_positive_part": _nonlocal_positive_part_np,
    "advective_negative_part": _advective_negative_part_np,
    "autocatalytic": _autocatalytic_np,
    "signed_power": _signed_power_np,
}

_LOOP = {
    "nonlocal_positive_part": _nonlocal_positive_part_loop,
    "advective_negative_part": _advective_negative_part_loop,
    "autocatalytic": _autocatalytic_loop,
    "signed_power": _signed_power_loop,
}

_COMPILED = {name: njit(fn) for name, fn in _LOOP.items()} if HAVE_NUMBA else None


def implementations(backend):
    """Kernel table for ``backend`` ("numpy" or "numba")."""
    if backend == "numpy":
        return dict(_NUMPY)
    if backend == "numba":
        if _COMPILED is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return dict(_COMPILED)
    raise ValueError(f"unknown backend {backend!r}")


_ACTIVE = implementations(BACKEND)


def nonlocal_positive_part(kernel, weights, u, theta):
    """Quadrature of ``(u(y) - theta(y))_+ K(x, y)``; ``u, theta`` are (S, P)."""
    return _ACTIVE["nonlocal_positive_part"](
        np.ascontiguousarray(kernel, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(theta, dtype=np.float64),
    )


def advective_negative_part(omega, p, beta_u, nu):
    """``(omega . p + beta_u |p|^(2-nu))_-`` with ``|p|^0 = 1``; p is (S, d, P)."""
    return _ACTIVE["advective_negative_part"](
        np.ascontiguousarray(omega, dtype=np.float64),
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(beta_u, dtype=np.float64),
        float(nu),
    )


def autocatalytic(u, v, mu, beta, theta, a):
    return _ACTIVE["autocatalytic"](
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(v, dtype=np.float64),
        float(mu),
        float(beta),
        float(theta),
        float(a),
    )


def signed_power(u, p):
    """``u |u|^(p-1)`` with value 0 at ``u = 0``."""
    return _ACTIVE["signed_power"](np.ascontiguousarray(u, dtype=np.float64), float(p))
