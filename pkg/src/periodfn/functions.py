"""Closed family of one-variable potentials with analytic derivatives.

Every member evaluates itself and its first three derivatives in closed
form.  Values near the minimum are computed in cancellation-free form
(``2 sin^2(x/2)`` instead of ``1 - cos x`` and so on) because the period
quadrature takes square roots of tiny potential values.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConfigError, DomainError

__all__ = [
    "SmoothFunction",
    "Polynomial",
    "CosineWell",
    "CoshWell",
    "RelativisticKinetic",
    "PowerWall",
    "TranslatedSum",
    "function_from_spec",
]

_INF = math.inf


class SmoothFunction:
    """Base class.  Subclasses implement ``_eval(x, nu)`` for ``nu`` in 0..3."""

    family = "abstract"

    def __init__(self, even=False, domain=(-_INF, _INF)):
        self.even = bool(even)
        lo, hi = domain
        if not lo < hi:
            raise ValueError(f"empty domain {domain!r}")
        self.domain = (float(lo), float(hi))

    @property
    def bounded_domain(self):
        return math.isfinite(self.domain[0]) or math.isfinite(self.domain[1])

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        return (x > lo) & (x < hi)

    def _check(self, x):
        if self.bounded_domain and not np.all(self.contains(x)):
            raise DomainError(
                f"{self.family}: argument outside admissible interval {self.domain}"
            )

    def __call__(self, x, nu=0):
        if nu not in (0, 1, 2, 3):
            raise ValueError("derivative order must be 0..3")
        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=float)
        self._check(x)
        out = self._eval(x, nu)
        return float(out) if scalar else out

    def derivs(self, x):
        """Return ``(f, f', f'', f''')`` at ``x``."""
        return tuple(self(x, nu) for nu in range(4))

    def increment(self, base, dx):
        """``f(base + dx) - f(base)``; subclasses override when cancellation bites."""
        return self(np.asarray(base) + dx) - self(base)

    def limit(self, x):
        """Value at ``x``, or the one-sided limit when ``x`` is a domain edge."""
        return self(x)

    def _eval(self, x, nu):
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    def to_dict(self):
        d = {"family": self.family, "params": self.params()}
        if self.bounded_domain:
            d["domain"] = list(self.domain)
        return d

    def __repr__(self):
        return f"{type(self).__name__}({self.params()!r})"


class Polynomial(SmoothFunction):
    """``sum_k coeffs[k] * x**k`` (ascending coefficients)."""

    family = "polynomial"

    def __init__(self, coeffs, even=None):
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        self.coeffs = c
        if even is None:
            even = not np.any(c[1::2])
        super().__init__(even=even)
        self._d = [c]
        for _ in range(3):
            self._d.append(P.polyder(self._d[-1]) if self._d[-1].size > 1 else np.zeros(1))

    def _eval(self, x, nu):
        return P.polyval(x, self._d[nu])

    def increment(self, base, dx):
        # exact Taylor shift: f(b+d) - f(b) = sum_{k>=1} f^(k)(b) d^k / k!
        base = np.asarray(base, dtype=float)
        dx = np.asarray(dx, dtype=float)
        d = self.coeffs
        total = np.zeros(np.broadcast(base, dx).shape)
        for k in range(1, self.coeffs.size):
            d = P.polyder(d)
            total = total + P.polyval(base, d) * dx**k / math.factorial(k)
        return total

    def params(self):
        return {"coeffs": self.coeffs.tolist()}


class CosineWell(SmoothFunction):
    """``amplitude * (1 - cos(frequency * x))``."""

    family = "trig-cos"

    def __init__(self, amplitude=1.0, frequency=1.0):
        super().__init__(even=True)
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)

    def _eval(self, x, nu):
        A, k = self.amplitude, self.frequency
        u = k * x
        if nu == 0:
            return 2.0 * A * np.sin(0.5 * u) ** 2
        if nu == 1:
            return A * k * np.sin(u)
        if nu == 2:
            return A * k**2 * np.cos(u)
        return -A * k**3 * np.sin(u)

    def params(self):
        return {"amplitude": self.amplitude, "frequency": self.frequency}


class CoshWell(SmoothFunction):
    """``amplitude * (cosh(frequency * x) - 1)``."""

    family = "cosh"

    def __init__(self, amplitude=1.0, frequency=1.0):
        super().__init__(even=True)
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)

    def _eval(self, x, nu):
        A, k = self.amplitude, self.frequency
        u = k * x
        if nu == 0:
            return 2.0 * A * np.sinh(0.5 * u) ** 2
        if nu == 1:
            return A * k * np.sinh(u)
        if nu == 2:
            return A * k**2 * np.cosh(u)
        return A * k**3 * np.sinh(u)

    def params(self):
        return {"amplitude": self.amplitude, "frequency": self.frequency}


class RelativisticKinetic(SmoothFunction):
    """``amplitude * (sqrt(1 + (frequency*y)^2) - 1)``."""

    family = "sqrt-relativistic"

    def __init__(self, amplitude=1.0, frequency=1.0):
        super().__init__(even=True)
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)

    def _eval(self, x, nu):
        A, k = self.amplitude, self.frequency
        u = k * x
        s = np.sqrt(1.0 + u * u)
        if nu == 0:
            return A * u * u / (s + 1.0)
        if nu == 1:
            return A * k * u / s
        if nu == 2:
            return A * k**2 / s**3
        return -3.0 * A * k**3 * u / s**5

    def params(self):
        return {"amplitude": self.amplitude, "frequency": self.frequency}


class PowerWall(SmoothFunction):
    """Repulsive wall ``-weight * phi_m(s)`` with ``s = orientation * (x - edge) > 0``.

    ``phi_m(s) = log(s)`` for ``m == 1`` and ``s**(1-m) / (1-m)`` otherwise, so
    the force ``-d/ds`` equals ``weight * s**(-m)``.  ``orientation=+1`` places
    the wall on the left of its domain, ``-1`` on the right.
    """

    def __init__(self, weight, exponent, edge=0.0, orientation=1):
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if weight <= 0 or exponent <= 0:
            raise ValueError("weight and exponent must be positive")
        self.weight = float(weight)
        self.exponent = float(exponent)
        self.edge = float(edge)
        self.orientation = int(orientation)
        dom = (self.edge, _INF) if orientation == 1 else (-_INF, self.edge)
        super().__init__(even=False, domain=dom)

    @property
    def family(self):
        return "log-potential" if self.exponent == 1.0 else "power-law"

    def _phi(self, s):
        m = self.exponent
        if m == 1.0:
            return np.log(s)
        return s ** (1.0 - m) / (1.0 - m)

    def _eval(self, x, nu):
        w, m, o = self.weight, self.exponent, self.orientation
        s = o * (x - self.edge)
        if nu == 0:
            return -w * self._phi(s)
        if nu == 1:
            return -w * o * s ** (-m)
        if nu == 2:
            return w * m * s ** (-m - 1.0)
        return -w * o * m * (m + 1.0) * s ** (-m - 2.0)

    def increment(self, base, dx):
        w, m, o = self.weight, self.exponent, self.orientation
        s0 = o * (np.asarray(base, dtype=float) - self.edge)
        t = np.log1p(o * np.asarray(dx, dtype=float) / s0)
        if m == 1.0:
            return -w * t
        return -w * s0 ** (1.0 - m) * np.expm1((1.0 - m) * t) / (1.0 - m)

    def limit(self, x):
        if x == self.edge:
            return _INF if self.exponent >= 1.0 else 0.0
        return self(x)

    def params(self):
        return {
            "weight": self.weight,
            "exponent": self.exponent,
            "edge": self.edge,
            "orientation": self.orientation,
        }


class TranslatedSum(SmoothFunction):
    """``sum_i t_i(x + shift) - sum_i t_i(shift)`` on the shifted common domain."""

    family = "translated-sum"

    def __init__(self, terms, shift=0.0, even=False):
        self.terms = list(terms)
        if not self.terms:
            raise ValueError("at least one term required")
        self.shift = float(shift)
        lo = max(t.domain[0] for t in self.terms) - self.shift
        hi = min(t.domain[1] for t in self.terms) - self.shift
        super().__init__(even=even, domain=(lo, hi))

    def _eval(self, x, nu):
        if nu == 0:
            return sum(t.increment(self.shift, x) for t in self.terms)
        return sum(t(x + self.shift, nu) for t in self.terms)

    def limit(self, x):
        if x in self.domain:
            return sum(t.limit(x + self.shift) for t in self.terms) - sum(
                t(self.shift) for t in self.terms
            )
        return self(x)

    def params(self):
        return {"shift": self.shift, "terms": [t.to_dict() for t in self.terms]}


_FACTORIES = {
    "polynomial": lambda p: Polynomial(p["coeffs"], even=p.get("even")),
    "trig-cos": lambda p: CosineWell(p.get("amplitude", 1.0), p.get("frequency", 1.0)),
    "cosh": lambda p: CoshWell(p.get("amplitude", 1.0), p.get("frequency", 1.0)),
    "sqrt-relativistic": lambda p: RelativisticKinetic(
        p.get("amplitude", 1.0), p.get("frequency", 1.0)
    ),
    "log-potential": lambda p: PowerWall(
        p["weight"], 1.0, p.get("edge", 0.0), p.get("orientation", 1)
    ),
    "power-law": lambda p: PowerWall(
        p["weight"], p["exponent"], p.get("edge", 0.0), p.get("orientation", 1)
    ),
    "translated-sum": lambda p: TranslatedSum(
        [function_from_spec(t) for t in p["terms"]], p.get("shift", 0.0)
    ),
}


def function_from_spec(spec):
    """Build a function from ``{"family": tag, "params": {...}}``.

    An optional ``"domain": [lo, hi]`` entry must agree with the family's own
    admissible interval; it is checked, not imposed.
    """
    if isinstance(spec, SmoothFunction):
        return spec
    try:
        family = spec["family"]
        params = spec.get("params", {})
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed function spec: {spec!r}") from exc
    if family not in _FACTORIES:
        raise ConfigError(f"unknown function family {family!r}")
    try:
        f = _FACTORIES[family](params)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for {family}: {params!r} ({exc})") from exc
    dom = spec.get("domain")
    if dom is not None and not np.allclose(dom, f.domain, rtol=1e-12, atol=0):
        raise ConfigError(f"declared domain {dom} disagrees with {f.domain}")
    return f
