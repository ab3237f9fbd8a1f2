"""Independent reference values and evaluators used only by the tests.

Nothing here calls the package's criterion or period code.
"""

import math
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import quad
from scipy.special import ellipk


def pendulum_period(E):
    """``F = 1 - cos x``, ``G = y^2/2``: ``T = 4 K(m)`` with parameter ``m = E/2``."""
    return 4.0 * ellipk(E / 2.0)


def potential_period_quad(F, E, x_minus, x_plus):
    """``G = y^2/2``: ``T = sqrt(2) * int dx / sqrt(E - F)``, with the endpoint
    singularities removed by ``x = mid + half*sin(t)``."""
    mid, half = 0.5 * (x_plus + x_minus), 0.5 * (x_plus - x_minus)

    def f(t):
        x = mid + half * math.sin(t)
        gap = E - F(x)
        return math.sqrt(2.0) * half * math.cos(t) / math.sqrt(gap) if gap > 0 else 0.0

    val, _ = quad(f, -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def polynomial_M(F_coeffs, G_coeffs):
    """Exact polynomial ``M`` built by coefficient arithmetic (ascending order)."""
    F = np.asarray(F_coeffs, float)
    G = np.asarray(G_coeffs, float)
    F1, F2 = P.polyder(F), P.polyder(F, 2)
    F3 = P.polyder(F, 3)
    G1, G2 = P.polyder(G), P.polyder(G, 2)
    mul = P.polymul
    N = P.polysub(P.polysub(6 * mul(F, mul(F2, F2)), 3 * mul(mul(F1, F1), F2)),
                  2 * mul(mul(F, F1), F3))
    S = mul(mul(F, mul(F1, F1)), F2)
    U = mul(G, mul(G1, G1))
    W = P.polysub(mul(G1, G1), 2 * mul(G, G2))

    def M(x, y):
        return P.polyval(x, N) * P.polyval(y, U) + P.polyval(x, S) * P.polyval(y, W)

    return M


def family_coeffs(a, b, c):
    return [0, 0, 0.5, a / 3, b / 4], [0, 0, 0.5, 0, c / 4]


def c1_exact(a, b):
    """``(10 a^2 - 9 b) / 9`` in exact arithmetic."""
    a, b = Fraction(a), Fraction(b)
    return (10 * a * a - 9 * b) / 9


SINH_ARGMIN = 2 + math.sqrt(3)
SINH_BOUND = 4 + 4 * math.sqrt(3)
