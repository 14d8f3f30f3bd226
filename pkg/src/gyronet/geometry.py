"""Gyrovector operations on the Poincare ball and the hyperboloid model.

All functions are pure and operate on numpy arrays whose *last* axis holds the
point coordinates, so they broadcast over arbitrary leading batch axes.  A
Poincare point of dimension n is an array (..., n) with euclidean norm < c; a
hyperboloid point is an array (..., n+1) in Minkowski coordinates with
<x, x>_L = -1 and positive last coordinate.

The ball radius c defaults to 1, which simplifies most formulas; it is kept as
an explicit parameter throughout.
"""

from __future__ import annotations

import numpy as np

# Any result whose norm reaches c*(1 - EPS_BOUNDARY) is radially rescaled back
# onto that shell; prevents atanh overflow during training.
EPS_BOUNDARY = 1e-5
_TINY = 1e-15


def _norm(x, keepdims=True):
    return np.linalg.norm(x, axis=-1, keepdims=keepdims)


def project_to_ball(x, c=1.0):
    """Clamp points radially so that ||x|| <= c*(1 - EPS_BOUNDARY)."""
    x = np.asarray(x, dtype=float)
    maxnorm = c * (1.0 - EPS_BOUNDARY)
    n = _norm(x)
    factor = np.where(n >= maxnorm, maxnorm / np.maximum(n, _TINY), 1.0)
    return x * factor


def in_ball(x, c=1.0):
    return bool(np.all(_norm(np.asarray(x, dtype=float), keepdims=False) < c))


def _check_same_dim(x, y):
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(
            f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}"
        )


def mobius_add(x, y, c=1.0):
    """Mobius addition x (+)_c y on the ball of radius c."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    c2 = c * c
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    num = (1.0 + 2.0 * xy / c2 + y2 / c2) * x + (1.0 - x2 / c2) * y
    den = 1.0 + 2.0 * xy / c2 + x2 * y2 / (c2 * c2)
    return project_to_ball(num / den, c)


def mobius_neg(x):
    """Gyro-inverse of x; plain coordinate negation."""
    return -np.asarray(x, dtype=float)


def gyration(a, b, v, c=1.0):
    """gyr[a,b]v = -(a+b) (+) (a (+) (b (+) v))."""
    return mobius_add(mobius_neg(mobius_add(a, b, c)),
                      mobius_add(a, mobius_add(b, v, c), c), c)


def mobius_scalar_mul(r, x, c=1.0):
    """Mobius scalar multiplication r (x)_c x.

    The zero vector is a fixed point for every r (the formula's x/||x||
    direction is handled explicitly).
    """
    x = np.asarray(x, dtype=float)
    n = _norm(x)
    safe = np.maximum(n, _TINY)
    scaled = c * np.tanh(np.asarray(r, dtype=float) * np.arctanh(np.minimum(n / c, 1.0 - 1e-15)))
    out = np.where(n > 0, scaled * x / safe, np.zeros_like(x))
    return project_to_ball(out, c)


def conformal_factor(x, c=1.0, keepdims=False):
    """lambda_x^c = 2 / (1 - ||x||^2 / c^2); equals 2 at the origin."""
    x = np.asarray(x, dtype=float)
    x2 = np.sum(x * x, axis=-1, keepdims=keepdims)
    return 2.0 / (1.0 - x2 / (c * c))


def exp_map_poincare(x, v, c=1.0):
    """Exponential map of tangent vector v at ball point x."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    nv = _norm(v)
    safe = np.maximum(nv, _TINY)
    lam = conformal_factor(x, c, keepdims=True)
    second = np.tanh(lam * nv / (2.0 * c)) * c * v / safe
    second = np.where(nv > 0, second, np.zeros_like(v))
    return mobius_add(x, second, c)


def log_map_poincare(x, y, c=1.0):
    """Logarithm map: tangent vector at x pointing toward y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = mobius_add(mobius_neg(x), y, c)
    nw = _norm(w)
    safe = np.maximum(nw, _TINY)
    lam = conformal_factor(x, c, keepdims=True)
    out = (2.0 * c / lam) * np.arctanh(np.minimum(nw / c, 1.0 - 1e-15)) * w / safe
    return np.where(nw > 0, out, np.zeros_like(w))


def poincare_distance(x, y, c=1.0):
    """Geodesic distance 2c * atanh(||(-x) (+) y|| / c)."""
    w = mobius_add(mobius_neg(x), y, c)
    n = _norm(w, keepdims=False)
    return 2.0 * c * np.arctanh(np.minimum(n / c, 1.0 - 1e-15))


def transport_from_origin_poincare(x, v, c=1.0):
    """Parallel transport of a tangent vector at the origin to the point x."""
    lam = conformal_factor(np.asarray(x, dtype=float), c, keepdims=True)
    return 2.0 / lam * np.asarray(v, dtype=float)


def mobius_matvec(M, x, c=1.0):
    """Mobius matrix-vector multiplication M^(x)_c applied to ball points.

    M has shape (m, n); x has shape (..., n).  Mx = 0 maps to the origin.
    """
    M = np.asarray(M, dtype=float)
    x = np.asarray(x, dtype=float)
    if M.shape[-1] != x.shape[-1]:
        raise ValueError(f"matrix expects dim {M.shape[-1]}, point has {x.shape[-1]}")
    y = x @ M.T
    nx = _norm(x)
    ny = _norm(y)
    safe_x = np.maximum(nx, _TINY)
    safe_y = np.maximum(ny, _TINY)
    out = c * np.tanh(ny / safe_x * np.arctanh(np.minimum(nx / c, 1.0 - 1e-15))) * y / safe_y
    out = np.where((nx > 0) & (ny > 0), out, np.zeros_like(y))
    return project_to_ball(out, c)


def bias_translate(x, b, c=1.0):
    """Bias translation exp_x(P_{0->x}(log_0(b))); agrees with mobius_add(x, b)."""
    origin = np.zeros_like(np.asarray(b, dtype=float))
    v0 = log_map_poincare(origin, b, c)
    vx = transport_from_origin_poincare(x, v0, c)
    return exp_map_poincare(x, vx, c)


def lift_map(f, x, c=1.0):
    """Lift a euclidean map f to the ball: exp_0(f(log_0(x)))."""
    x = np.asarray(x, dtype=float)
    origin = np.zeros_like(x)
    v = log_map_poincare(origin, x, c)
    fv = np.asarray(f(v), dtype=float)
    origin_out = np.zeros_like(fv)
    return exp_map_poincare(origin_out, fv, c)


# ---------------------------------------------------------------------------
# Hyperboloid model
# ---------------------------------------------------------------------------

def lorentz_inner(u, v, keepdims=False):
    """Lorentzian inner product: spatial dot product minus the product of the
    last (time-like) coordinates."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"length mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    prod = u * v
    return np.sum(prod[..., :-1], axis=-1, keepdims=keepdims) - (
        prod[..., -1:] if keepdims else prod[..., -1]
    )


def hyperboloid_renormalize(x):
    """Recompute the time coordinate from the spatial ones so <x,x>_L = -1."""
    x = np.asarray(x, dtype=float)
    spatial = x[..., :-1]
    time = np.sqrt(1.0 + np.sum(spatial * spatial, axis=-1, keepdims=True))
    return np.concatenate([spatial, time], axis=-1)


def on_hyperboloid(x, tol=1e-9):
    x = np.asarray(x, dtype=float)
    return bool(
        np.all(np.abs(lorentz_inner(x, x) + 1.0) <= tol) and np.all(x[..., -1] > 0)
    )


def hyperboloid_origin(n):
    """The apex (0, ..., 0, 1) of the n-dimensional hyperboloid."""
    o = np.zeros(n + 1)
    o[-1] = 1.0
    return o


def hyperboloid_distance(u, v):
    """acosh(-<u,v>_L); the argument is clamped to >= 1 against fp drift."""
    arg = np.maximum(-lorentz_inner(u, v), 1.0)
    return np.arccosh(arg)


def tangent_project(x, v):
    """Lorentz-orthogonal projection of an ambient vector onto T_x H^n."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return v + lorentz_inner(x, v, keepdims=True) * x


def exp_map_hyperboloid(x, v):
    """Geodesic flow cosh(|v|_L) x + sinh(|v|_L) v/|v|_L for tangent v at x."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    sq = lorentz_inner(v, v, keepdims=True)
    nv = np.sqrt(np.maximum(sq, 0.0))
    safe = np.maximum(nv, _TINY)
    out = np.cosh(nv) * x + np.sinh(nv) * v / safe
    out = np.where(nv > 0, out, x * np.ones_like(out))
    return hyperboloid_renormalize(out)


def log_map_hyperboloid(x, y):
    """Tangent vector at x whose geodesic reaches y; zero when x = y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = hyperboloid_distance(x, y)
    u = y + lorentz_inner(x, y, keepdims=True) * x
    nu = np.sqrt(np.maximum(lorentz_inner(u, u, keepdims=True), 0.0))
    safe = np.maximum(nu, _TINY)
    out = d[..., None] * u / safe
    return np.where(nu > _TINY, out, np.zeros_like(out))


def hyperboloid_parallel_transport(x, y, w):
    """Parallel transport of tangent vector w from T_x H^n to T_y H^n.

    Splits w into its component along the connecting geodesic direction and
    the orthogonal remainder; only the former rotates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    v = log_map_hyperboloid(x, y)
    nv = np.sqrt(np.maximum(lorentz_inner(v, v, keepdims=True), 0.0))
    if np.all(nv <= _TINY):
        return w.copy()
    vhat = v / np.maximum(nv, _TINY)
    wv = lorentz_inner(w, vhat, keepdims=True)
    transported = wv * (np.sinh(nv) * x + np.cosh(nv) * vhat) + (w - wv * vhat)
    return np.where(nv > _TINY, transported, w)


# ---------------------------------------------------------------------------
# Model conversions
# ---------------------------------------------------------------------------

def to_poincare(x):
    """Project a hyperboloid point into the unit ball: spatial / (time + 1)."""
    x = np.asarray(x, dtype=float)
    return x[..., :-1] / (x[..., -1:] + 1.0)


def to_hyperboloid(y):
    """Inverse projection of the ball into the hyperboloid.

    Uses the squared-norm denominator (1 - ||y||^2), which is what makes the
    map the exact inverse of to_poincare.
    """
    y = np.asarray(y, dtype=float)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    num = np.concatenate([2.0 * y, 1.0 + y2], axis=-1)
    return num / (1.0 - y2)
