"""Separable Hamiltonians ``H(x, y) = F(x) + G(y)`` and their energy geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, EnergyOutOfAnnulus, NoConjugate
from .functions import Polynomial, SmoothFunction
from .numerics import EPS, RootNotBracketed, expand_bracket, safe_newton
from .sturm import real_roots

__all__ = [
    "SeparableHamiltonian",
    "TurningPoints",
    "AnnulusBound",
    "BranchLimit",
    "Check",
    "ValidationReport",
    "validate_center",
    "turning_points",
    "annulus_energy_bound",
    "conjugate_point",
    "branch_limit",
    "branch_solve",
]

DEFAULT_HORIZON = 1e6
EVEN_PROBES = 64
EVEN_TOL = 1e-10


@dataclass(frozen=True)
class BranchLimit:
    """Where the monotone branch of a potential on one side of 0 ends.

    ``kind`` is ``"critical-point"``, ``"domain-edge"`` or ``"unbounded"``;
    ``value`` is the potential there (possibly ``inf``).
    """

    side: int
    abscissa: float
    value: float
    kind: str


@dataclass(frozen=True)
class TurningPoints:
    energy: float
    x_minus: float
    x_plus: float
    y_plus: float


@dataclass(frozen=True)
class AnnulusBound:
    E_star: float
    kind: str  # critical-point-of-F | critical-point-of-G | domain-edge | unbounded
    abscissa: float = math.inf

    @property
    def bounded(self):
        return math.isfinite(self.E_star)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual}
                for c in self.checks
            ],
        }


def branch_limit(f: SmoothFunction, side: int, horizon=DEFAULT_HORIZON) -> BranchLimit:
    """End of the increasing branch of ``f`` on ``side`` (+1 or -1) of the origin."""
    lo, hi = f.domain
    edge = hi if side > 0 else lo
    if isinstance(f, Polynomial) and f.coeffs.size > 2:
        d = np.polynomial.polynomial.polyder(f.coeffs)
        if side > 0:
            crit = [r for r in real_roots(d, 0.0, math.inf) if r > 0]
            x = min(crit) if crit else None
        else:
            crit = [r for r in real_roots(d, -math.inf, 0.0) if r < 0]
            x = max(crit) if crit else None
        if x is not None:
            x = float(x)
            return BranchLimit(side, x, float(f(x)), "critical-point")
        return BranchLimit(side, side * math.inf, math.inf, "unbounded")

    reach = min(horizon, abs(edge)) if math.isfinite(edge) else horizon
    if math.isfinite(edge):
        reach = reach * (1 - 1e-12)
    t = np.geomspace(1e-8 * min(1.0, reach), reach, 4000)
    with np.errstate(over="ignore", invalid="ignore"):
        slope = side * f(side * t, 1)
    bad = np.flatnonzero(~(slope > 0))
    if bad.size:
        i = bad[0]
        if i == 0:
            return BranchLimit(side, 0.0, 0.0, "critical-point")
        a, b = side * t[i - 1], side * t[i]
        x = float(safe_newton(lambda s: f(s, 1), lambda s: f(s, 2), min(a, b), max(a, b)))
        return BranchLimit(side, x, float(f(x)), "critical-point")
    if math.isfinite(edge) and abs(edge) <= horizon:
        return BranchLimit(side, edge, float(f.limit(edge)), "domain-edge")
    return BranchLimit(side, side * math.inf, math.inf, "unbounded")


def branch_solve(f: SmoothFunction, side: int, value: float, limit: BranchLimit):
    """Abscissa on ``side`` where the increasing branch of ``f`` reaches ``value``."""
    if not value < limit.value:
        raise RootNotBracketed(f"value {value} not attained before {limit}")
    if value == 0.0:
        return 0.0
    f2 = f(0.0, 2)
    guess = side * math.sqrt(2.0 * value / f2) if f2 > 0 else side * 1e-3
    g = lambda x: f(x) - value
    if limit.kind == "critical-point":
        a, b = sorted((0.0, limit.abscissa))
    else:
        lim = limit.abscissa
        inner, outer = expand_bracket(lambda x: f(x), value, guess, lim)
        a, b = sorted((inner, outer))
    return safe_newton(g, lambda x: f(x, 1), a, b, x0=guess)


class SeparableHamiltonian:
    """``H(x, y) = F(x) + G(y)`` with a center at the origin.

    Construction does not validate; call :func:`validate_center` for a report.
    Derived geometry (branch limits, annulus bound) is computed lazily and
    cached on the instance; it depends only on the immutable ``F`` and ``G``.
    """

    def __init__(self, F: SmoothFunction, G: SmoothFunction, tol=1e-10, horizon=DEFAULT_HORIZON):
        self.F = F
        self.G = G
        self.tol = float(tol)
        self.horizon = float(horizon)

    def __call__(self, x, y):
        return self.F(x) + self.G(y)

    def vector_field(self, x, y):
        return self.G(y, 1), -self.F(x, 1)

    @cached_property
    def branches(self):
        return {
            "F-": branch_limit(self.F, -1, self.horizon),
            "F+": branch_limit(self.F, +1, self.horizon),
            "G+": branch_limit(self.G, +1, self.horizon),
        }

    @cached_property
    def annulus(self) -> AnnulusBound:
        return annulus_energy_bound(self)

    def to_dict(self):
        return {"F": self.F.to_dict(), "G": self.G.to_dict()}

    def __repr__(self):
        return f"SeparableHamiltonian(F={self.F!r}, G={self.G!r})"


def _safe(fn, *args):
    try:
        return float(fn(*args))
    except DomainError:
        return math.nan


def validate_center(H: SeparableHamiltonian) -> ValidationReport:
    """Check the standing hypotheses of a nondegenerate center with even ``G``."""
    tol = H.tol
    checks = []
    for name, fn, nu in (("F(0)=0", H.F, 0), ("G(0)=0", H.G, 0),
                         ("F'(0)=0", H.F, 1), ("G'(0)=0", H.G, 1)):
        v = _safe(fn, 0.0, nu)
        checks.append(Check(name, bool(abs(v) <= tol), abs(v)))
    for name, fn in (("F''(0)>0", H.F), ("G''(0)>0", H.G)):
        v = _safe(fn, 0.0, 2)
        checks.append(Check(name, bool(v > tol), v))

    Y = 1.0
    try:
        lim = branch_limit(H.G, +1, H.horizon)
        if math.isfinite(lim.abscissa) and lim.abscissa > 0:
            Y = lim.abscissa
    except (RootNotBracketed, DomainError, ValueError):
        pass
    lo, hi = H.G.domain
    Y = min(Y, 0.999 * min(hi, -lo))
    y = Y * np.arange(1, EVEN_PROBES + 1) / EVEN_PROBES
    try:
        gp, gm = H.G(y), H.G(-y)
        dev = float(np.max(np.abs(gp - gm) / (1.0 + np.abs(gp))))
    except DomainError:
        dev = math.nan
    sampled = bool(dev <= EVEN_TOL)
    checks.append(Check("G even (sampled)", sampled, dev))
    checks.append(Check("G even (declared flag matches samples)", H.G.even and sampled,
                        0.0 if H.G.even == sampled else 1.0))
    return ValidationReport(tuple(checks))


def annulus_energy_bound(H: SeparableHamiltonian) -> AnnulusBound:
    """Least energy at which the level set meets a critical point or a domain edge."""
    best = AnnulusBound(math.inf, "unbounded")
    for key, lim in H.branches.items():
        if lim.value < best.E_star:
            if lim.kind == "critical-point":
                kind = f"critical-point-of-{key[0]}"
            elif lim.kind == "domain-edge":
                kind = "domain-edge"
            else:
                continue
            best = AnnulusBound(lim.value, kind, lim.abscissa)
        elif lim.kind == "domain-edge" and best.kind == "unbounded":
            best = AnnulusBound(math.inf, "domain-edge", lim.abscissa)
    return best


def turning_points(H: SeparableHamiltonian, E: float) -> TurningPoints:
    """Axis crossings ``x_-(E) < 0 < x_+(E)`` and ``y_+(E) > 0`` of the level ``H = E``."""
    E = float(E)
    E_star = H.annulus.E_star
    # within a few ulps of E_star the level is the boundary orbit itself
    if not (0.0 < E < E_star * (1.0 - 16 * EPS)):
        raise EnergyOutOfAnnulus(f"E={E} outside (0, {E_star})")
    b = H.branches
    return TurningPoints(
        energy=E,
        x_minus=branch_solve(H.F, -1, E, b["F-"]),
        x_plus=branch_solve(H.F, +1, E, b["F+"]),
        y_plus=branch_solve(H.G, +1, E, b["G+"]),
    )


def conjugate_point(F: SmoothFunction, x0: float, horizon=DEFAULT_HORIZON) -> float:
    """Point ``r`` on the other side of 0, nearest to it, with ``F(r) = F(x0)``."""
    if x0 == 0:
        return 0.0
    side = -1 if x0 > 0 else 1
    target = float(F(x0))
    lim = branch_limit(F, side, horizon)
    if lim.kind == "critical-point" and abs(target - lim.value) <= 16 * EPS * abs(lim.value):
        return lim.abscissa  # symmetric levels: the conjugate is the other critical point
    if not target < lim.value:
        raise NoConjugate(f"F never reaches {target} on the {'+' if side > 0 else '-'} side")
    return branch_solve(F, side, target, lim)
