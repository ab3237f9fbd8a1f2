"""Scalar root finding and one-dimensional extremum search.

Root finding is a safeguarded Newton iteration: a Newton step is taken when it
lands strictly inside the current bracket, otherwise the bracket is bisected.
The vectorised variant runs the same iteration elementwise so the quadrature
routines can invert a monotone map at every node in one pass.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

EPS = np.finfo(float).eps
GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))  # 0.381966...


class RootNotBracketed(ValueError):
    pass


def safe_newton(f, df, lo, hi, x0=None, xtol=0.0, rtol=4 * EPS, ftol=0.0, maxiter=200):
    """Root of ``f`` in ``[lo, hi]`` with a sign change, Newton-polished.

    Stops when ``|f| <= ftol``, when the bracket is narrower than
    ``xtol + rtol*|x|``, or when a Newton step is below that size.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootNotBracketed(f"f({lo})={flo}, f({hi})={fhi} have the same sign")
    if flo > 0:  # orient so that f(lo) < 0 < f(hi)
        sgn = -1.0
    else:
        sgn = 1.0
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    for _ in range(maxiter):
        fx = sgn * f(x)
        if abs(fx) <= ftol or fx == 0.0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        d = sgn * df(x)
        step = fx / d if d != 0 and np.isfinite(d) else math.inf
        xn = x - step
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        tol = xtol + rtol * abs(xn)
        if abs(xn - x) <= tol or hi - lo <= tol:
            return xn
        x = xn
    return x


def newton_bisect_increasing(fun, target, lo, hi, x0=None, maxiter=100):
    """Elementwise solve ``value(x) = target`` for an increasing map.

    ``fun(x)`` returns ``(value, derivative)`` arrays.  ``lo``/``hi`` bracket
    the solution, i.e. ``value(lo) <= target <= value(hi)``.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    if x0 is None:
        x = 0.5 * (lo + hi)
    else:
        x = np.clip(np.broadcast_to(np.asarray(x0, dtype=float), target.shape), lo, hi)
        x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))
    active = np.ones(target.shape, dtype=bool)
    for _ in range(maxiter):
        xa = x[active]
        val, der = fun(xa)
        r = val - target[active]
        la, ha = lo[active], hi[active]
        la = np.where(r < 0, xa, la)
        ha = np.where(r > 0, xa, ha)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - r / der
        bad = ~((xn > la) & (xn < ha)) | ~np.isfinite(xn)
        xn = np.where(bad, 0.5 * (la + ha), xn)
        xn = np.where(r == 0, xa, xn)
        tol = 2 * EPS * np.abs(xn) + 1e-300
        done = (np.abs(xn - xa) <= tol) | (ha - la <= tol) | (r == 0)
        lo[active], hi[active], x[active] = la, ha, xn
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
    return x


def expand_bracket(f, target, step, limit=math.inf, grow=2.0, maxiter=200):
    """Walk ``0 -> step*grow**k`` until ``f >= target``; return ``(inner, outer)``.

    ``f`` must increase with ``|x|`` on the walked ray.  A finite ``limit``
    (signed like ``step``) is approached by halving the remaining distance
    instead of being overshot.
    """
    inner = 0.0
    x = step
    for _ in range(maxiter):
        if math.isfinite(limit) and abs(x) >= abs(limit):
            x = inner + 0.5 * (limit - inner)
        if f(x) >= target:
            return inner, x
        inner = x
        x = x * grow
    raise RootNotBracketed(f"target {target} not reached below {limit}")


def brent_minimize(f, a, b, xtol=1e-10, maxiter=500):
    """Minimum of a unimodal ``f`` on ``[a, b]``: golden section with parabolic steps.

    Returns ``(x, f(x))``.
    """
    x = w = v = a + GOLDEN * (b - a)
    fx = fw = fv = f(x)
    d = e = 0.0
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        tol1 = xtol + 1e-12 * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < m else -tol1
                golden = False
        if golden:
            e = (a - x) if x >= m else (b - x)
            d = GOLDEN * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = f(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def golden_section(f, a, b, xtol=1e-10, maximize=False):
    """Golden-section search for the extremum of a unimodal ``f`` on ``[a, b]``."""
    g = (lambda t: -f(t)) if maximize else f
    x1 = b - (1 - GOLDEN) * (b - a)
    x2 = a + (1 - GOLDEN) * (b - a)
    f1, f2 = g(x1), g(x2)
    while b - a > xtol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - (1 - GOLDEN) * (b - a)
            f1 = g(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + (1 - GOLDEN) * (b - a)
            f2 = g(x2)
    x = 0.5 * (a + b)
    return x, f(x)


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on ``[-1, 1]`` (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
