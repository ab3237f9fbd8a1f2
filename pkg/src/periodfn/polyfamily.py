"""The cubic-quartic family ``H = x^2/2 + a x^3/3 + b x^4/4 + y^2/2 + c y^4/4``.

For this family the criterion factors as

    M(x, y) = x^4 y^4 / 24 * (A(x) P(y) - B(x) Q(y))

with explicit polynomials A, B, P, Q.  Everything here is built on that
factorisation: the thresholds in ``c``, the tangency construction, and the
case classifier that decides where ``T`` is provably monotone.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (CaseMismatch, NoBracket, NonPositiveLinearPart, NoRootInAnnulus,
                     PeriodFnError)
from .functions import Polynomial
from .hamiltonian import SeparableHamiltonian, conjugate_point
from .numerics import brent_minimize
from .sturm import real_roots

__all__ = [
    "FamilyParams",
    "NormalizationInput",
    "ABPQ",
    "FamilyGeometry",
    "FamilyClassification",
    "FExtremum",
    "Tangency",
    "normalize",
    "abpq",
    "geometry",
    "thresholds",
    "sigma_root",
    "f_extremum",
    "tangency",
    "tangency_c0",
    "classify",
    "CASES",
    "VERDICTS",
]

CASES = ("A", "B", "C", "D", "E.i", "E.ii", "F.i", "F.ii", "F.critical", "G.i", "G.ii",
         "unclassified")
VERDICTS = ("constant", "increasing", "decreasing", "indeterminate-near-origin",
            "outside-theorem")
EQ_RTOL = 1e-12
SCAN_POINTS = 10_000


def _close(u, v, rtol=EQ_RTOL):
    return abs(u - v) <= rtol * max(abs(u), abs(v), 1e-300)


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class FamilyParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for k in ("a", "b", "c"):
            v = float(getattr(self, k))
            if not math.isfinite(v):
                raise ValueError(f"{k} must be finite")
            object.__setattr__(self, k, v)

    @property
    def F(self):
        return Polynomial([0.0, 0.0, 0.5, self.a / 3.0, self.b / 4.0])

    @property
    def G(self):
        return Polynomial([0.0, 0.0, 0.5, 0.0, self.c / 4.0])

    def hamiltonian(self, **kw):
        return SeparableHamiltonian(self.F, self.G, **kw)

    @property
    def delta(self):
        return self.a * self.a - 4.0 * self.b

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NormalizationInput:
    """Raw coefficients of ``a1 x^2/2 + a2 x^3/3 + a3 x^4/4 + b1 y^2/2 + b2 y^4/4``."""

    a1: float
    a2: float
    a3: float
    b1: float
    b2: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.b1 > 0):
            raise NonPositiveLinearPart(f"need a1 > 0 and b1 > 0, got a1={self.a1}, b1={self.b1}")

    @property
    def time_scale(self):
        """Raw time is normalized time divided by this."""
        return math.sqrt(self.a1 * self.b1)

    def normalized_energy(self, E_raw):
        return E_raw / self.a1

    def raw_period(self, T_normalized):
        return T_normalized / self.time_scale

    def hamiltonian(self, **kw):
        F = Polynomial([0.0, 0.0, self.a1 / 2, self.a2 / 3, self.a3 / 4])
        G = Polynomial([0.0, 0.0, self.b1 / 2, 0.0, self.b2 / 4])
        return SeparableHamiltonian(F, G, **kw)


def normalize(n: NormalizationInput) -> FamilyParams:
    """Rescale ``y`` by ``sqrt(b1/a1)`` and time by ``sqrt(a1 b1)``."""
    if not isinstance(n, NormalizationInput):
        n = NormalizationInput(*n)
    return FamilyParams(n.a2 / n.a1, n.a3 / n.a1, n.a1 * n.b2 / n.b1**2)


# ---------------------------------------------------------------- A, B, P, Q

@dataclass(frozen=True)
class ABPQ:
    """Ascending coefficient vectors; ``B`` is kept both factored and expanded."""

    A: np.ndarray
    B_factors: tuple
    B: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    def eval_A(self, x):
        return P.polyval(x, self.A)

    def eval_B(self, x):
        out = 1.0
        for f in self.B_factors:
            out = out * P.polyval(x, f)
        return out

    def eval_P(self, y):
        return P.polyval(y, self.P)

    def eval_Q(self, y):
        return P.polyval(y, self.Q)

    def f(self, x):
        """``A(x)/B(x)``."""
        return self.eval_A(x) / self.eval_B(x)

    def criterion(self, x, y):
        """``x^4 y^4 / 24 * (A P - B Q)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return x**4 * y**4 / 24.0 * (self.eval_A(x) * self.eval_P(y) - self.eval_B(x) * self.eval_Q(y))


def abpq(p: FamilyParams) -> ABPQ:
    a, b, c = p.a, p.b, p.c
    A = np.array([
        10 * a * a - 9 * b,
        a * (30 * b + 4 * a * a),
        b * (36 * b + 16 * a * a),
        24 * a * b * b,
        9 * b**3,
    ])
    pp = np.array([1.0, a, b])
    factors = (np.array([6.0, 4 * a, 3 * b]), P.polymul(pp, pp), np.array([1.0, 2 * a, 3 * b]))
    B = P.polymul(P.polymul(factors[0], factors[1]), factors[2])
    one_c = np.array([1.0, 0.0, c])
    Py = P.polymul(P.polymul(one_c, one_c), np.array([2.0, 0.0, c]))
    Qy = np.array([3 * c, 0.0, c * c])
    return ABPQ(A, factors, B, Py, Qy)


# ---------------------------------------------------------------- geometry

@dataclass(frozen=True)
class FamilyGeometry:
    """Critical structure of ``F``; ``x0`` bounds the annulus when ``Delta >= 0``."""

    delta: float
    p_roots: tuple
    x0: float | None
    r0: float | None
    E0: float

    @property
    def bounded(self):
        return self.x0 is not None

    @property
    def interval(self):
        """Sublevel interval ``[min(x0, r0), max(x0, r0)]`` of the annulus boundary."""
        if self.x0 is None:
            return (-math.inf, math.inf)
        return (min(self.x0, self.r0), max(self.x0, self.r0))

    def to_dict(self):
        return {"delta": self.delta, "p_roots": list(self.p_roots), "x0": self.x0,
                "r0": self.r0, "E0": self.E0}


def geometry(p: FamilyParams) -> FamilyGeometry:
    a, b = p.a, p.b
    F = p.F
    if b == 0:
        roots = (-1.0 / a,) if a != 0 else ()
    else:
        roots = tuple(real_roots([1.0, a, b]))
    if not roots:
        return FamilyGeometry(p.delta, (), None, None, math.inf)
    neg = [r for r in roots if r < 0]
    pos = [r for r in roots if r > 0]
    cands = ([max(neg)] if neg else []) + ([min(pos)] if pos else [])
    # smaller level bounds the annulus first; ties go to the negative side
    x0 = min(cands, key=lambda r: (F(r), r))
    r0 = float(conjugate_point(F, x0))
    return FamilyGeometry(p.delta, roots, float(x0), r0, float(F(x0)))


# ---------------------------------------------------------------- f = A/B extrema

@dataclass(frozen=True)
class FExtremum:
    x: float
    value: float
    at_boundary: bool


def _scan_points(lo, hi, scale, n):
    if math.isfinite(lo) and math.isfinite(hi):
        return np.linspace(lo, hi, n), (lambda t: t), lo, hi
    # compactify the infinite end(s): x = base + scale * t/(1-|t|)
    if math.isfinite(lo):
        t = np.linspace(0.0, 1.0, n + 1)[:-1]
        m = lambda t: lo + scale * t / (1.0 - t)
        return m(t), m, 0.0, t[-1]
    if math.isfinite(hi):
        t = np.linspace(0.0, 1.0, n + 1)[:-1]
        m = lambda t: hi - scale * t / (1.0 - t)
        return m(t), m, 0.0, t[-1]
    t = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    m = lambda t: scale * t / (1.0 - np.abs(t))
    return m(t), m, t[0], t[-1]


def f_extremum(p: FamilyParams, interval, kind="min", positive_B=True, xtol=1e-12):
    """Extremum of ``A/B`` on ``interval`` by dense scan plus Brent polish.

    Points where ``B <= 0`` are excluded when ``positive_B`` is set.  The
    result is flagged when the winner sits at an end of the interval.
    """
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    ab = abpq(p)
    lo, hi = map(float, interval)
    scale = 1.0 / math.sqrt(max(abs(p.b), p.a * p.a, 1e-12))
    xs, xmap, tlo, thi = _scan_points(lo, hi, scale, SCAN_POINTS)
    sgn = 1.0 if kind == "min" else -1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        Bv = ab.eval_B(xs)
        vals = sgn * ab.eval_A(xs) / Bv
    if positive_B:
        vals = np.where(Bv > 0, vals, np.inf)
    if not np.any(np.isfinite(vals)):
        raise CaseMismatch("no admissible points for the extremum of A/B")
    i = int(np.argmin(vals))
    tgrid = np.linspace(tlo, thi, xs.size) if xmap is not None else None
    if i == 0 or i == xs.size - 1:
        x = float(xs[i])
        return FExtremum(x, float(ab.f(x)), True)

    def g(t):
        x = xmap(t)
        Bx = ab.eval_B(x)
        if positive_B and not Bx > 0:
            return math.inf
        return sgn * ab.eval_A(x) / Bx

    t, _ = brent_minimize(g, tgrid[i - 1], tgrid[i + 1], xtol=xtol)
    x = float(xmap(t))
    return FExtremum(x, float(ab.f(x)), False)


# ---------------------------------------------------------------- thresholds

def _c_of(ab, x):
    return 2.0 * ab.eval_A(x) / (3.0 * ab.eval_B(x))


def c1_threshold(p: FamilyParams):
    """``2A(0)/(3B(0)) = (10a^2 - 9b)/9``."""
    return (10.0 * p.a * p.a - 9.0 * p.b) / 9.0


def _a_roots(p):
    return real_roots(abpq(p).A)


def _gi_points(p):
    """``x1`` (root of A nearest 0) and its conjugate ``x0`` for case G.i."""
    roots = _a_roots(p)
    if len(roots) < 1:
        raise CaseMismatch("A has no real roots")
    x1 = min(roots, key=abs)
    x0 = float(conjugate_point(p.F, x1))
    return float(x1), x0


def _cd_threshold(p, g):
    """``(c0, r, valid)`` for cases C and D; ``valid`` is False when A < 0
    somewhere in the annulus interval where ``B <= 0``."""
    ab = abpq(p)
    lo, hi = g.interval
    ext = f_extremum(p, (lo, hi), "min")
    xs = np.linspace(lo, hi, SCAN_POINTS)
    Bv, Av = ab.eval_B(xs), ab.eval_A(xs)
    bad = (Bv <= 0) & (Av < -1e-12 * np.maximum(np.abs(Av), 1.0))
    return 2.0 * ext.value / 3.0, ext, not bad.any()


def thresholds(p: FamilyParams, g: FamilyGeometry | None = None):
    """``(c0, c1)`` for cases C, D and G.i."""
    g = geometry(p) if g is None else g
    ab = abpq(p)
    c1 = c1_threshold(p)
    if p.b == 0 and p.a != 0:
        return float(_c_of(ab, g.r0)), c1
    if p.b != 0 and p.delta >= 0:
        c0, _, _ = _cd_threshold(p, g)
        return float(c0), c1
    if p.a != 0 and p.a * p.a / 4 < p.b <= p.a * p.a / 3:
        _, x0 = _gi_points(p)
        return float(_c_of(ab, x0)), c1
    raise CaseMismatch(f"no (c0, c1) thresholds for {p}")


def sigma_root(p: FamilyParams, interval=None):
    """Root of ``sigma = 2A - 3cB`` bounding the region where the sign near the
    origin persists: among roots in ``interval`` the one with the lowest level ``F``."""
    ab = abpq(p)
    if interval is None:
        g = geometry(p)
        if g.bounded:
            interval = g.interval
        elif p.a != 0 and p.a * p.a / 4 < p.b:
            x1, x0 = _gi_points(p)
            interval = (min(x1, x0), max(x1, x0))
        else:
            raise NoRootInAnnulus("no bounded reference interval for sigma")
    lo, hi = interval
    sigma = P.polysub(2.0 * ab.A, 3.0 * p.c * ab.B)
    pad = 1e-9 * max(1.0, abs(lo), abs(hi))
    roots = [r for r in real_roots(sigma, lo - pad, hi + pad) if r != 0.0]
    if not roots:
        raise NoRootInAnnulus(f"sigma has no root in [{lo}, {hi}]")
    F = p.F
    return float(min(roots, key=lambda r: (F(r), r)))


# ---------------------------------------------------------------- tangency

@dataclass(frozen=True)
class Tangency:
    c0: float
    x_m: float
    f_m: float
    E0: float
    y_m: float


def _y_m(c, E0):
    # positive root of y^2/2 + c y^4/4 = E0, written without cancellation
    y2 = 4.0 * E0 / (1.0 + math.sqrt(1.0 + 4.0 * c * E0))
    return math.sqrt(y2)


def _x_m(p):
    if p.a == 0:
        ab = abpq(p)
        x0 = max(r for r in real_roots(ab.A) if r > 0)
        return f_extremum(p, (x0, math.inf), "max")
    left = f_extremum(p, (-math.inf, 0.0), "max")
    right = f_extremum(p, (0.0, math.inf), "max")
    return max(left, right, key=lambda e: e.value)


def tangency(p: FamilyParams, ctol=1e-13) -> Tangency:
    """Threshold ``c0`` where the level ``H = F(x_m)`` touches ``M = 0``.

    ``x_m`` maximises ``A/B``; ``y_m(c)`` solves ``G(y_m) = F(x_m)``; ``c0``
    solves ``A(x_m)/B(x_m) = Q(y_m)/P(y_m)`` by bisection over a doubling bracket.
    """
    ext = _x_m(p)
    f_m = ext.value
    if not f_m > 0:
        raise NoBracket(f"max of A/B is {f_m} <= 0; no tangency")
    E0 = float(p.F(ext.x))

    def resid(c):
        ab = abpq(FamilyParams(p.a, p.b, c))
        y = _y_m(c, E0)
        return ab.eval_Q(y) / ab.eval_P(y) - f_m

    lo, hi = 0.0, 1.0
    while resid(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise NoBracket("tangency residual keeps its sign up to c = 1e6")
    while hi - lo > ctol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if resid(mid) < 0:
            lo = mid
        else:
            hi = mid
    c0 = 0.5 * (lo + hi)
    return Tangency(c0, ext.x, f_m, E0, _y_m(c0, E0))


def tangency_c0(p: FamilyParams) -> float:
    return tangency(p).c0


# ---------------------------------------------------------------- classification

@dataclass(frozen=True)
class FamilyClassification:
    params: FamilyParams
    case: str
    verdict: str
    E0: float | None = None  # certified interval is (0, E0)
    thresholds: dict = field(default_factory=dict)
    geometry: FamilyGeometry | None = None
    points: dict = field(default_factory=dict)  # named abscissas used by the case
    annotation: str = ""
    remark: dict | None = None  # sub-interval and expected sign between the c thresholds

    @property
    def interval(self):
        return None if self.E0 is None else (0.0, self.E0)

    @property
    def classified(self):
        return self.verdict in ("constant", "increasing", "decreasing")

    def to_dict(self):
        return {
            "a": self.params.a,
            "b": self.params.b,
            "c": self.params.c,
            "case": self.case,
            "verdict": self.verdict,
            "interval": None if self.E0 is None else [0.0, self.E0],
            "thresholds": dict(self.thresholds),
            "geometry": None if self.geometry is None else self.geometry.to_dict(),
            "points": dict(self.points),
            "annotation": self.annotation,
            "remark": self.remark,
        }


def _remark(p, c0, c1, interval=None):
    """Sub-interval and expected sign for ``c`` beyond the theorem's threshold."""
    if _close(p.c, c1):
        return "indeterminate-near-origin", None
    sign = "increasing" if p.c < c1 else "decreasing"
    try:
        xc = sigma_root(p, interval)
    except NoRootInAnnulus:
        return "outside-theorem", {"expected": sign, "x_c": None, "E_c": None}
    return "outside-theorem", {"expected": sign, "x_c": xc, "E_c": float(p.F(xc))}


def _tangency_or_none(p):
    try:
        return tangency(p)
    except NoBracket:
        return None


def _no_tangency(p, g, label):
    return FamilyClassification(p, "unclassified", "outside-theorem", None, {}, g, {},
                                annotation=f"nearest case {label}: no tangency c0 exists")


def classify(p: FamilyParams) -> FamilyClassification:
    """Total dispatch over the family; every point gets a record.

    Parameters whose geometry cannot be resolved in floating point (critical
    points beyond overflow, say) get an unclassified record naming the failure.
    """
    if not isinstance(p, FamilyParams):
        p = FamilyParams(*p)
    try:
        return _classify(p)
    except (ArithmeticError, ValueError, PeriodFnError) as exc:
        return FamilyClassification(p, "unclassified", "outside-theorem",
                                    annotation=f"numerical failure: {type(exc).__name__}: {exc}")


def _classify(p):
    a, b, c = p.a, p.b, p.c
    if c < 0:
        return FamilyClassification(p, "unclassified", "outside-theorem",
                                    annotation="c < 0 is not covered")
    if a == 0 and b == 0:
        if c == 0:
            return FamilyClassification(p, "A", "constant", math.inf)
        return FamilyClassification(p, "B", "decreasing", math.inf)

    g = geometry(p)
    ab = abpq(p)
    c1 = c1_threshold(p)

    if b == 0 or p.delta >= 0:
        label = "C" if b == 0 else "D"
        if b == 0:
            ext = None
            c0 = float(_c_of(ab, g.r0))
            valid = True
            r = g.r0
        else:
            c0, ext, valid = _cd_threshold(p, g)
            r = ext.x
        th = {"c0": c0, "c1": c1}
        pts = {"x0": g.x0, "r0": g.r0, "r": r}
        if not valid:
            return FamilyClassification(
                p, "unclassified", "outside-theorem", None, th, g, pts,
                annotation=f"nearest case {label}: A < 0 where B <= 0 inside the annulus")
        if c <= c0:
            return FamilyClassification(p, label, "increasing", g.E0, th, g, pts)
        verdict, rem = _remark(p, c0, c1, g.interval)
        return FamilyClassification(p, "unclassified", verdict, None, th, g, pts,
                                    annotation=f"nearest case {label}: c above c0", remark=rem)

    # Delta < 0: global center, b > 0
    if a == 0:
        if c == 0:
            x0 = max(r for r in real_roots(ab.A) if r > 0)
            return FamilyClassification(p, "E.i", "decreasing", float(p.F(x0)), {}, g,
                                        {"x0": float(x0)})
        t = _tangency_or_none(p)
        if t is None:
            return _no_tangency(p, g, "E.ii")
        pts = {"x_m": t.x_m, "y_m": _y_m(c, t.E0)}
        if c >= t.c0:
            return FamilyClassification(p, "E.ii", "decreasing", t.E0, {"c0": t.c0}, g, pts)
        return FamilyClassification(p, "unclassified", "outside-theorem", None, {"c0": t.c0}, g,
                                    pts, annotation="nearest case E.ii: c below tangency c0")

    if c == 0:
        roots = _a_roots(p)
        if _close(b, 10.0 * a * a / 9.0):
            return FamilyClassification(p, "F.critical", "indeterminate-near-origin", None, {}, g,
                                        {"A_roots": roots})
        if b < 10.0 * a * a / 9.0:
            x1 = min(roots, key=abs)
            return FamilyClassification(p, "F.i", "increasing", float(p.F(x1)), {}, g,
                                        {"x1": float(x1), "A_roots": roots})
        x2, x1 = max(r for r in roots if r < 0), min(r for r in roots if r > 0)
        E0 = float(min(p.F(x1), p.F(x2)))
        return FamilyClassification(p, "F.ii", "decreasing", E0, {}, g,
                                    {"x1": float(x1), "x2": float(x2)},
                                    annotation="interval uses the lower of F(x1), F(x2)")

    if b <= a * a / 3.0:
        x1, x0 = _gi_points(p)
        th = {"c0": float(_c_of(ab, x0)), "c1": c1}
        pts = {"x1": x1, "x0": x0}
        E0 = float(p.F(x1))
        if not ab.eval_B(x0) > 0:
            return FamilyClassification(p, "G.i", "indeterminate-near-origin", None, th, g, pts,
                                        annotation="B(x0) <= 0: threshold undefined")
        if c <= th["c0"]:
            return FamilyClassification(p, "G.i", "increasing", E0, th, g, pts)
        verdict, rem = _remark(p, th["c0"], c1, (min(x1, x0), max(x1, x0)))
        return FamilyClassification(p, "unclassified", verdict, None, th, g, pts,
                                    annotation="nearest case G.i: c above c0", remark=rem)

    t = _tangency_or_none(p)
    if t is None:
        return _no_tangency(p, g, "G.ii")
    pts = {"x_m": t.x_m, "y_m": _y_m(c, t.E0)}
    if c >= t.c0:
        return FamilyClassification(p, "G.ii", "decreasing", t.E0, {"c0": t.c0}, g, pts)
    return FamilyClassification(p, "unclassified", "outside-theorem", None, {"c0": t.c0}, g, pts,
                                annotation="nearest case G.ii: c below tangency c0")
