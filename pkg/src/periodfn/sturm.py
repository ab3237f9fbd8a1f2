"""Real roots of low-degree polynomials by Sturm-sequence isolation.

The sequence is built in exact rational arithmetic from the (exactly
representable) float coefficients, so root counts are reliable even for
clustered or multiple roots.  Each isolated root is then polished in floating
point on the square-free part, which has a sign change at every root.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as P

from .numerics import safe_newton

__all__ = ["SturmSequence", "real_roots", "count_roots"]


def _trim(p):
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def _deriv(p):
    return [p[k] * k for k in range(1, len(p))] or [Fraction(0)]


def _divmod(num, den):
    num = list(num)
    q = [Fraction(0)] * max(1, len(num) - len(den) + 1)
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1] / lead
        q[k] = c
        if c:
            for j, d in enumerate(den):
                num[k + j] -= c * d
    rem = _trim(num[: len(den) - 1] or [Fraction(0)])
    return _trim(q), rem


def _normalize(p):
    lead = abs(p[-1])
    return [c / lead for c in p]


def _horner(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign(v):
    return (v > 0) - (v < 0)


class SturmSequence:
    """Sturm chain of a real polynomial given by ascending coefficients."""

    def __init__(self, coeffs):
        p = _trim([Fraction(float(c)) for c in np.atleast_1d(coeffs)])
        if len(p) < 2:
            raise ValueError("polynomial must have degree >= 1")
        self.poly = p
        chain = [_normalize(p), _normalize(_deriv(p))]
        while True:
            _, r = _divmod(chain[-2], chain[-1])
            if len(r) == 1 and r[0] == 0:
                break
            chain.append(_normalize([-c for c in r]))
        self.chain = chain
        gcd = chain[-1]
        self.squarefree = _divmod(p, gcd)[0] if len(gcd) > 1 else p

    def variations(self, x):
        """Sign changes of the chain at ``x`` (``x`` may be +-inf)."""
        if math.isinf(x):
            signs = [_sign(q[-1]) * (1 if x > 0 or (len(q) - 1) % 2 == 0 else -1)
                     for q in self.chain]
        else:
            fx = Fraction(x)
            signs = [_sign(_horner(q, fx)) for q in self.chain]
        signs = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def count(self, lo, hi):
        """Number of distinct real roots in ``(lo, hi]``."""
        return self.variations(lo) - self.variations(hi)

    def is_root(self, x):
        return _horner(self.poly, Fraction(x)) == 0

    def cauchy_bound(self):
        lead = abs(self.poly[-1])
        return 1.0 + float(max(abs(c) for c in self.poly[:-1]) / lead)


def count_roots(coeffs, lo=-math.inf, hi=math.inf):
    return SturmSequence(coeffs).count(lo, hi)


def real_roots(coeffs, lo=-math.inf, hi=math.inf, tol=1e-12):
    """Distinct real roots in ``(lo, hi]``, ascending.

    Isolation is exact; polishing stops at ``tol`` absolute (or machine
    precision, whichever is reached first).
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size < 2:
        return []
    seq = SturmSequence(c)
    bound = seq.cauchy_bound()
    a = max(lo, -bound - 1.0)
    b = min(hi, bound + 1.0)
    if not a < b:
        return []
    sqf = np.array([float(x) for x in seq.squarefree])
    dsqf = P.polyder(sqf) if sqf.size > 1 else np.zeros(1)
    f = lambda x: P.polyval(x, sqf)
    df = lambda x: P.polyval(x, dsqf)

    roots = []
    stack = [(a, b, seq.count(a, b))]
    while stack:
        u, v, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            if seq.is_root(v):
                roots.append(v)
                continue
            fu, fv = f(u), f(v)
            if fu * fv < 0:
                roots.append(safe_newton(f, df, u, v, xtol=tol * 1e-3))
            else:  # float signs inconclusive: bisect on the exact chain until they are not
                while True:
                    m = 0.5 * (u + v)
                    if seq.count(u, m):
                        v = m
                    else:
                        u = m
                    if seq.is_root(v):
                        roots.append(v)
                        break
                    if f(u) * f(v) < 0:
                        roots.append(safe_newton(f, df, u, v, xtol=tol * 1e-3))
                        break
                    if v - u <= max(tol, 4e-16 * abs(v)):
                        roots.append(0.5 * (u + v))
                        break
            continue
        if v - u <= max(tol, 4e-16 * max(abs(u), abs(v))):
            roots.append(0.5 * (u + v))
            continue
        m = 0.5 * (u + v)
        if seq.is_root(m):
            roots.append(m)
            eps = max(tol, 1e-14 * abs(m), 1e-300)
            stack.append((u, m - eps, seq.count(u, m - eps)))
            stack.append((m + eps, v, seq.count(m + eps, v)))
            continue
        stack.append((u, m, seq.count(u, m)))
        stack.append((m, v, seq.count(m, v)))
    return sorted(float(r) for r in roots)
