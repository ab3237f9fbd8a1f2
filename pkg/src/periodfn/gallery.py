"""Registry of worked example systems with known monotonicity and factored ``M``.

Each entry carries an independent closed-form expression for the criterion
``M`` (written from its own factorization, not from :func:`criterion_M`) so
that the generic evaluator can be cross-checked against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .criterion import REFINE_RTOL, _x_factors, chicone_N
from .errors import InvalidGeometry, NoSignChange, UnknownExample
from .functions import CoshWell, CosineWell, Polynomial, PowerWall, RelativisticKinetic, TranslatedSum
from .hamiltonian import SeparableHamiltonian, validate_center
from .numerics import golden_section

__all__ = [
    "Expectation",
    "ExampleSystem",
    "REGISTRY",
    "builtin",
    "names",
    "ohp_build",
    "ohp_x0",
    "sinh_certified_bound",
    "sinh_argmin",
]

SQRT3 = math.sqrt(3.0)
SINH_ARGMIN = 2.0 + SQRT3
SINH_BOUND = 4.0 + 4.0 * SQRT3


@dataclass(frozen=True)
class Expectation:
    """Expected behaviour of ``T`` on ``(0, E_hi)``.

    ``certify_at`` is the energy at which a sign certificate should be
    checked; it differs from ``E_hi`` only when ``E_hi`` is infinite.
    """

    verdict: str  # "increasing" | "decreasing" | "constant"
    E_hi: float
    certify_at: float

    @property
    def sign(self):
        return {"increasing": 1, "decreasing": -1, "constant": 0}[self.verdict]

    @property
    def certificate_verdict(self):
        return {1: "NonNegative", -1: "NonPositive", 0: "NonNegative"}[self.sign]

    def to_dict(self):
        return {"verdict": self.verdict, "interval": [0.0, self.E_hi],
                "certify_at": self.certify_at}


@dataclass(frozen=True)
class ExampleSystem:
    name: str
    H: SeparableHamiltonian
    expected: Expectation
    closed_form_M: Callable
    provenance: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "system": self.H.to_dict(),
                "expected": self.expected.to_dict(), "provenance": self.provenance,
                "params": self.params}


# ------------------------------------------------------------ closed forms

def _M_linear(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def _M_pendulum(x, y):
    # N(x) = (1 - cos x)^2 (2 - cos x), M = N y^4 / 2
    c = np.cos(x)
    return (1.0 - c) ** 2 * (2.0 - c) * np.asarray(y) ** 4 / 2.0


def _M_pendulum_pair(x, y):
    sx2, sy2 = np.sin(np.asarray(x) / 2.0), np.sin(np.asarray(y) / 2.0)
    trailing = 5.0 + np.cos(2.0 * x) - 2.0 * (np.cos(x) - 2.0) * np.cos(y)
    return 4.0 * (2.0 * sy2**2) * sx2**4 * sy2**2 * trailing


def _M_relativistic(x, y):
    s = np.sqrt(1.0 + np.asarray(y) ** 2)
    return np.asarray(x) ** 4 / 2.0 * (s - 1.0) ** 2 * (s + 2.0) / s**3


def _M_sinh(x, y):
    a, b = np.cosh(x), np.cosh(y)
    return -((a - 1.0) ** 2) * (b - 1.0) ** 2 * (a * a - a * b + 2.0 * b + 2.0)


# ---------------------------------------------------------------- registry

def _linear():
    H = SeparableHamiltonian(Polynomial([0, 0, 0.5]), Polynomial([0, 0, 0.5]))
    return ExampleSystem("linear", H, Expectation("constant", math.inf, 10.0), _M_linear,
                         "harmonic oscillator: M vanishes identically")


def _pendulum():
    H = SeparableHamiltonian(CosineWell(), Polynomial([0, 0, 0.5]))
    return ExampleSystem("pendulum", H, Expectation("increasing", 2.0, 2.0), _M_pendulum,
                         "classical pendulum: N(x) = (1-cos x)^2 (2-cos x) >= 0")


def _pendulum_pair():
    H = SeparableHamiltonian(CosineWell(), CosineWell())
    return ExampleSystem("pendulum-pair", H, Expectation("increasing", 2.0, 2.0),
                         _M_pendulum_pair,
                         "velocity-coupled pendulums: trailing factor nonnegative below the separatrix")


def _relativistic():
    H = SeparableHamiltonian(Polynomial([0, 0, 0.5]), RelativisticKinetic())
    return ExampleSystem("relativistic", H, Expectation("increasing", math.inf, 50.0),
                         _M_relativistic,
                         "relativistic oscillator: M = x^4/2 (G'^2 - 2 G G''), second factor >= 0")


def _sinh():
    H = SeparableHamiltonian(CoshWell(), CoshWell())
    return ExampleSystem("sinh", H, Expectation("decreasing", SINH_BOUND, SINH_BOUND), _M_sinh,
                         "x'=sinh y, y'=-sinh x: bound from minimizing a+b on the zero curve")


OHP_PRESETS = {
    "ohp-log-symmetric": (1.0, 1.0, 3.0, 1.0, 1.0, 1.0),
    "ohp-log": (1.0, 2.0, 4.0, 1.0, 1.0, 1.0),
    "ohp-power-2-1": (1.0, 1.0, 3.0, 1.0, 2.0, 1.0),
    "ohp-power-3-2": (1.0, 1.0, 3.0, 1.0, 3.0, 2.0),
}

_BUILDERS = {
    "linear": _linear,
    "pendulum": _pendulum,
    "pendulum-pair": _pendulum_pair,
    "relativistic": _relativistic,
    "sinh": _sinh,
}
_BUILDERS.update({k: (lambda v=v, k=k: ohp_build(*v, name=k)) for k, v in OHP_PRESETS.items()})

REGISTRY = tuple(_BUILDERS)
_CACHE: dict = {}


def names():
    return REGISTRY


def builtin(name) -> ExampleSystem:
    """Constructed and validated registry entry."""
    if name not in _BUILDERS:
        raise UnknownExample(f"unknown example {name!r}; known: {', '.join(REGISTRY)}")
    if name not in _CACHE:
        sys_ = _BUILDERS[name]()
        report = validate_center(sys_.H)
        if not report.passed:
            raise AssertionError(f"{name}: center validation failed: {report.failed()}")
        _CACHE[name] = sys_
    return _CACHE[name]


# --------------------------------------------------------------------- OHP

def _ohp_potential(a, b, K, m, n):
    """``V(u)`` and its first three derivatives on ``(0, K)``."""
    def phi(s, p):
        return np.log(s) if p == 1.0 else s ** (1.0 - p) / (1.0 - p)

    def V(u, nu=0):
        u = np.asarray(u, dtype=float)
        r = K - u
        if nu == 0:
            return -a * phi(u, m) - b * phi(r, n)
        if nu == 1:
            return -a * u**-m + b * r**-n
        if nu == 2:
            return a * m * u ** (-m - 1) + b * n * r ** (-n - 1)
        return -a * m * (m + 1) * u ** (-m - 2) + b * n * (n + 1) * r ** (-n - 2)
    return V


def _ohp_equilibrium(a, b, K, m, n):
    if m == 1.0 and n == 1.0:
        return a * K / (a + b)
    V = _ohp_potential(a, b, K, m, n)
    lo, hi = K * 1e-12, K * (1 - 1e-12)
    return brentq(lambda u: float(V(u, 1)), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def ohp_build(a, b, L, gamma, m=1.0, n=1.0, name=None) -> ExampleSystem:
    """Potential-type oscillator between two repulsive walls at ``u = 0`` and ``u = L - gamma``.

    The force from the walls is ``a u^-m`` and ``b (L-gamma-u)^-n``.  The
    system is translated so the equilibrium sits at the origin; the expected
    verdict (decreasing) comes from the sign analysis in :func:`ohp_x0`.
    """
    a, b, L, gamma, m, n = map(float, (a, b, L, gamma, m, n))
    if not all(math.isfinite(v) for v in (a, b, L, gamma, m, n)):
        raise InvalidGeometry("parameters must be finite")
    if min(a, b, L, gamma, m, n) <= 0:
        raise InvalidGeometry("a, b, L, gamma, m, n must all be positive")
    if gamma >= L:
        raise InvalidGeometry(f"gamma={gamma} must be smaller than L={L}")
    K = L - gamma
    u0 = _ohp_equilibrium(a, b, K, m, n)
    V = _ohp_potential(a, b, K, m, n)
    if not V(u0, 2) > 0:
        raise InvalidGeometry("equilibrium is not a nondegenerate minimum")
    F = TranslatedSum([PowerWall(a, m, 0.0, +1), PowerWall(b, n, K, -1)], shift=u0,
                      even=(a == b and m == n))
    H = SeparableHamiltonian(F, Polynomial([0, 0, 0.5]))

    k = K - u0

    def wall_rise(w, p, s0, t):
        # w * (phi_p(s0) - phi_p(s0 (1 + t))) without cancellation
        lt = np.log1p(t)
        return -w * lt if p == 1.0 else -w * s0 ** (1 - p) * np.expm1((1 - p) * lt) / (1 - p)

    def closed_M(x, y):
        x = np.asarray(x, dtype=float)
        u = u0 + x
        f0 = wall_rise(a, m, u0, x / u0) + wall_rise(b, n, k, -x / k)
        if m == n == 1.0:
            f1 = (a + b) * x / (u * (k - x))  # the constant term b u0 - a k vanishes
        else:
            f1 = V(u, 1)
        f2, f3 = V(u, 2), V(u, 3)
        N = 6 * f0 * f2 * f2 - 3 * f1 * f1 * f2 - 2 * f0 * f1 * f3
        return N * np.asarray(y) ** 4 / 2.0

    params = {"a": a, "b": b, "L": L, "gamma": gamma, "m": m, "n": n, "u0": u0, "k": k}
    label = name or f"ohp(a={a:g},b={b:g},L={L:g},gamma={gamma:g},m={m:g},n={n:g})"
    sys_ = ExampleSystem(label, H, Expectation("decreasing", math.nan, math.nan), closed_M,
                         "oscillating heat pipe: N < 0 between its first zeros either side",
                         params)
    x0, (xm, xp) = _ohp_roots(sys_)
    E0 = float(min(F(xm), F(xp)))
    params.update({"x_minus": xm, "x_plus": xp, "x0": x0})
    return replace(sys_, expected=Expectation("decreasing", E0, E0), params=params)


SCAN = 400
# Below this fraction of the half-width, F' is the difference of two nearly
# equal wall forces and N = O(x^4) drowns in its rounding error.
NEAR_ORIGIN = 1e-3


def _signed_N(F, x):
    """``sign(N)`` with values inside the rounding band of its terms counted as 0."""
    N, _, mag = _x_factors(F, x, magnitude=True)
    return np.where(np.abs(N) <= REFINE_RTOL * mag, 0, np.sign(N)), N


def _first_positive(F, edge, eps):
    """First zero of ``N`` where it turns positive walking from 0 toward ``edge``."""
    inner = edge - math.copysign(eps, edge)
    xs = np.geomspace(NEAR_ORIGIN, 1.0, SCAN) * inner
    sgn, N = _signed_N(F, xs)
    pos = np.flatnonzero(sgn > 0)
    if pos.size == 0:
        raise NoSignChange(
            f"N stays nonpositive up to x={inner:.6g} (N there {N[-1]:.3g}, edge {edge:.6g})")
    i = int(pos[0])
    neg = np.flatnonzero(sgn[:i] < 0)
    if neg.size == 0:
        raise NoSignChange(f"N is not negative off the origin before x={xs[i]:.6g}")
    j = int(neg[-1])
    return brentq(lambda x: float(chicone_N(F, x)), xs[j], xs[i], xtol=1e-15)


def _ohp_roots(sys_):
    p = sys_.params
    u0, k = p["u0"], p["k"]
    eps = 1e-9 * min(u0, k)
    F = sys_.H.F
    xm = _first_positive(F, -u0, eps)
    xp = _first_positive(F, k, eps)
    x0 = xm if abs(xm) < xp else xp
    r = abs(x0)
    probe = np.linspace(-r, r, 2001)[1:-1]
    sgn, _ = _signed_N(F, probe[np.abs(probe) >= NEAR_ORIGIN * r])
    if np.any(sgn > 0):
        raise NoSignChange("N is positive somewhere inside the symmetric interval")
    return x0, (xm, xp)


def ohp_x0(sys_: ExampleSystem) -> float:
    """Zero of ``N`` closest to the origin; ``N <= 0`` on ``[-|x0|, |x0|]``."""
    if "u0" not in sys_.params:
        raise InvalidGeometry(f"{sys_.name} was not built by ohp_build")
    return _ohp_roots(sys_)[0]


# -------------------------------------------------------------------- sinh

def _S(a):
    return a + (a * a + 2.0) / (a - 2.0)


def sinh_argmin():
    """Minimizer of ``S(a) = a + (a^2+2)/(a-2)`` over ``a > 2``.

    Golden section, then Newton on ``S'(a) = 1 + (a^2-4a-2)/(a-2)^2``
    with ``S'' = 12/(a-2)^3``.
    """
    a, _ = golden_section(_S, 2.0 + 1e-6, 50.0, xtol=1e-8)
    for _ in range(8):
        d = a - 2.0
        step = (1.0 + (a * a - 4.0 * a - 2.0) / d**2) / (12.0 / d**3)
        a -= step
        if abs(step) < 1e-15 * a:
            break
    return a


def sinh_certified_bound(check=True):
    """Largest ``E0`` with ``a^2 - ab + 2b + 2 >= 0`` on ``a + b - 2 <= E0``
    (``a = cosh x``, ``b = cosh y``): the minimum of ``a + b`` on the zero
    curve ``b = (a^2+2)/(a-2)``, less 2."""
    a = sinh_argmin()
    bound = _S(a) - 2.0
    if check:
        assert abs(a - SINH_ARGMIN) <= 1e-9, a
        assert abs(bound - SINH_BOUND) <= 1e-9, bound
    return bound
