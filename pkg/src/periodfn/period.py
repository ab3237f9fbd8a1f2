"""Period function ``T(E)`` by three independent routes, plus derivative and curve tools.

Routes
------
``theta``  smooth angular integrand; x and y are recovered from
           ``sign(x) sqrt(F(x)) = sqrt(E) sin(theta)`` and
           ``sqrt(G(y)) = sqrt(E) cos(theta)``, integrated with adaptive
           composite Gauss-Legendre.
``raw``    ``2 * int dx / G'(y(x))`` between the turning points with a
           tanh-sinh transform that absorbs the inverse square-root ends.
``ode``    direct integration of the flow and timing of the return to the
           x-axis (scipy DOP853 with event location).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DomainError,
    DriftExceeded,
    EnergyOutOfAnnulus,
    EventNotFound,
    PeriodFnError,
    QuadratureFailure,
)
from .hamiltonian import SeparableHamiltonian, turning_points
from .numerics import EPS, brent_minimize, gauss_legendre, newton_bisect_increasing

__all__ = [
    "PeriodSample",
    "DerivativeSample",
    "PeriodCurve",
    "Extremum",
    "ThetaIntegrandState",
    "theta_integrand",
    "period",
    "period_theta",
    "period_raw",
    "return_time_oracle",
    "period_derivative",
    "sample_period_curve",
    "locate_period_extremum",
    "METHODS",
]

METHODS = {
    "theta": "theta-quadrature",
    "raw": "raw-quadrature",
    "ode": "ode-oracle",
}
DEFAULT_TOL = 1e-10
DEFAULT_BUDGET = 4096
GL_ORDER = 16
_TINY = 1e-150


@dataclass(frozen=True)
class PeriodSample:
    E: float
    T: float
    method: str
    err: float
    partition: tuple | None = field(default=None, repr=False, compare=False)
    drift: float | None = None

    def to_dict(self):
        d = {"E": self.E, "T": self.T, "method": self.method, "err": self.err}
        if self.drift is not None:
            d["drift"] = self.drift
        return d


@dataclass(frozen=True)
class DerivativeSample:
    E: float
    value: float
    err: float
    step: float
    levels: int
    T: float

    @property
    def sign(self):
        """+1, -1, or 0 when ``|dT/dE|`` is within three error estimates of zero."""
        if abs(self.value) <= 3.0 * self.err:
            return 0
        return 1 if self.value > 0 else -1

    def to_dict(self):
        return {"E": self.E, "dTdE": self.value, "err": self.err, "step": self.step,
                "levels": self.levels}


@dataclass(frozen=True)
class PeriodCurve:
    samples: tuple
    derivatives: tuple  # aligned with samples; None where the stencil left the annulus
    gaps: tuple  # (E, reason) pairs
    method: str

    @property
    def energies(self):
        return np.array([s.E for s in self.samples])

    @property
    def periods(self):
        return np.array([s.T for s in self.samples])

    @property
    def sign_pattern(self):
        """One character per sample: ``+``, ``-``, ``0`` (flat) or ``?`` (no derivative)."""
        out = []
        for d in self.derivatives:
            if d is None:
                out.append("?")
            else:
                out.append({1: "+", -1: "-", 0: "0"}[d.sign])
        return "".join(out)

    def segments(self):
        """Maximal runs of equal derivative sign as ``(E_first, E_last, sign_char)``."""
        runs = []
        for s, ch in zip(self.samples, self.sign_pattern):
            if runs and runs[-1][2] == ch:
                runs[-1][1] = s.E
            else:
                runs.append([s.E, s.E, ch])
        return [tuple(r) for r in runs]

    def sign_changes(self):
        signs = [c for c in self.sign_pattern if c in "+-"]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


@dataclass(frozen=True)
class Extremum:
    energy: float | None
    kind: str | None  # "min" | "max" | None
    period: float | None
    flag: str  # interior | monotone-increasing | monotone-decreasing | degenerate-flat

    def to_dict(self):
        return {"energy": self.energy, "kind": self.kind, "T": self.period, "flag": self.flag}


class ThetaIntegrandState:
    """Everything needed to evaluate the angular integrand at one energy.

    Holds the turning points and the limits ``h'(0)``, ``k'(0)`` of the
    square-root charts ``h = sign(x) sqrt(F)``, ``k = sqrt(G)``.  Instances are
    immutable; the inverse charts are solved afresh on every call.
    """

    def __init__(self, H: SeparableHamiltonian, E: float):
        self.H = H
        self.E = float(E)
        self.turning = turning_points(H, E)
        self.hp0 = math.sqrt(0.5 * H.F(0.0, 2))
        self.kp0 = math.sqrt(0.5 * H.G(0.0, 2))
        self.sqrtE = math.sqrt(self.E)

    @property
    def small_z_limit(self):
        """``sqrt(z) / G'(y)`` as ``z -> 0``."""
        return 1.0 / math.sqrt(2.0 * self.H.G(0.0, 2))

    # h(x) = sign(x) sqrt(F(x)) and its derivative
    def _h(self, x):
        F = self.H.F
        f0 = np.maximum(F(x), 0.0)
        f1 = F(x, 1)
        h = np.copysign(np.sqrt(f0), x)
        small = np.abs(x) < _TINY
        with np.errstate(divide="ignore", invalid="ignore"):
            hp = np.where(small, self.hp0, f1 / (2.0 * h))
        return h, hp

    def _k(self, y):
        G = self.H.G
        g0 = np.maximum(G(y), 0.0)
        g1 = G(y, 1)
        k = np.sqrt(g0)
        small = np.abs(y) < _TINY
        with np.errstate(divide="ignore", invalid="ignore"):
            kp = np.where(small, self.kp0, g1 / (2.0 * k))
        return k, kp

    def x_of_r(self, r):
        r = np.asarray(r, dtype=float)
        tp = self.turning
        lo = np.where(r > 0, 0.0, tp.x_minus)
        hi = np.where(r > 0, tp.x_plus, 0.0)
        x = newton_bisect_increasing(self._h, r, lo, hi, x0=r / self.hp0)
        return np.where(r == 0, 0.0, x)

    def y_of_q(self, q):
        """Positive ``y`` with ``sqrt(G(y)) = q``."""
        q = np.asarray(q, dtype=float)
        y = newton_bisect_increasing(self._k, q, 0.0, self.turning.y_plus, x0=q / self.kp0)
        return np.where(q == 0, 0.0, y)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.sqrtE * np.sin(theta)
        q = self.sqrtE * np.abs(np.cos(theta))
        x = self.x_of_r(r)
        y = self.y_of_q(q)
        _, hp = self._h(x)
        _, kp = self._k(y)
        # sqrt(z) / (h'(x) G'(y)) written through k' = G'/(2 sqrt(G))
        return 1.0 / (2.0 * hp * kp)


def theta_integrand(H: SeparableHamiltonian, E: float, theta):
    """Reduced angular integrand; ``T(E) = 2 * int_{-pi/2}^{pi/2}`` of it."""
    state = ThetaIntegrandState(H, E)
    out = state(theta)
    return float(out) if np.ndim(theta) == 0 else out


def _gl_panels(fn, a, b, nodes, weights):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * nodes
    vals = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    return h * (vals @ weights)


def _adaptive_gl(fn, lo, hi, tol, budget, panels=4, n=GL_ORDER):
    """Adaptive composite Gauss-Legendre; returns ``(value, err, fine_edges)``.

    Each panel carries a whole-panel estimate and the sum over its halves;
    their difference is the panel's error estimate.  Panels whose share of the
    error exceeds their share of the interval are halved until the total
    estimate drops below ``tol`` or ``budget`` integrand evaluations are spent.
    """
    xg, wg = gauss_legendre(n)
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1], edges[1:]
    m = 0.5 * (a + b)
    whole = _gl_panels(fn, a, b, xg, wg)
    left = _gl_panels(fn, a, m, xg, wg)
    right = _gl_panels(fn, m, b, xg, wg)
    evals = 3 * n * panels
    length = hi - lo
    while True:
        err = np.abs(whole - (left + right))
        if not np.all(np.isfinite(left + right)):
            raise QuadratureFailure("non-finite integrand values")
        total_err = float(err.sum())
        if total_err <= tol:
            break
        sel = err > tol * (b - a) / length
        if not sel.any():
            sel[np.argmax(err)] = True
        cost = 4 * n * int(sel.sum())
        if evals + cost > budget:
            raise QuadratureFailure(
                f"error estimate {total_err:.3g} above {tol:.3g} after {evals} evaluations"
            )
        evals += cost
        ka, kb, km = a[~sel], b[~sel], m[~sel]
        kw, kl, kr = whole[~sel], left[~sel], right[~sel]
        sa, sb, sm = a[sel], b[sel], m[sel]
        na = np.concatenate([sa, sm])
        nb = np.concatenate([sm, sb])
        nw = np.concatenate([left[sel], right[sel]])
        nm = 0.5 * (na + nb)
        nl = _gl_panels(fn, na, nm, xg, wg)
        nr = _gl_panels(fn, nm, nb, xg, wg)
        a = np.concatenate([ka, na])
        b = np.concatenate([kb, nb])
        m = np.concatenate([km, nm])
        whole = np.concatenate([kw, nw])
        left = np.concatenate([kl, nl])
        right = np.concatenate([kr, nr])
    fine = np.unique(np.concatenate([a, m, b]))
    return float(np.sum(left + right)), total_err, tuple(fine.tolist())


def _fixed_gl(fn, edges, n=GL_ORDER):
    xg, wg = gauss_legendre(n)
    e = np.asarray(edges, dtype=float)
    return float(np.sum(_gl_panels(fn, e[:-1], e[1:], xg, wg)))


def period_theta(H, E, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET, partition=None):
    """Theta-quadrature period.  With ``partition`` the panel layout is fixed
    (no adaptivity, zero reported error), which makes ``T`` smooth in ``E``."""
    state = ThetaIntegrandState(H, E)
    half_pi = 0.5 * math.pi
    if partition is not None:
        T = 2.0 * _fixed_gl(state, partition)
        return PeriodSample(float(E), T, METHODS["theta"], 0.0, tuple(partition))
    val, err, fine = _adaptive_gl(state, -half_pi, half_pi, 0.5 * tol, budget)
    return PeriodSample(float(E), 2.0 * val, METHODS["theta"], 2.0 * err, fine)


# ---------------------------------------------------------------- raw route

_TS_TMAX = 4.0


def _ts_nodes(h):
    """tanh-sinh nodes on (-1, 1) as ``(u, dist_to_-1, dist_to_+1, weight)``."""
    t = np.arange(-_TS_TMAX, _TS_TMAX + 0.5 * h, h)
    s = 0.5 * math.pi * np.sinh(t)
    u = np.tanh(s)
    ch = np.cosh(s)
    # 1 - tanh(s) = 2 / (exp(2s) + 1), evaluated without cancellation
    d_hi = 2.0 / (np.exp(2.0 * s) + 1.0)
    d_lo = 2.0 / (np.exp(-2.0 * s) + 1.0)
    w = h * 0.5 * math.pi * np.cosh(t) / ch**2
    return u, d_lo, d_hi, w


def period_raw(H, E, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Raw-quadrature period ``2 * int_{x-}^{x+} dx / G'(y(x))``."""
    E = float(E)
    tp = turning_points(H, E)
    F, G = H.F, H.G
    xm, xp = tp.x_minus, tp.x_plus
    half = 0.5 * (xp - xm)
    kp0 = math.sqrt(0.5 * G(0.0, 2))
    fp = F.derivs(xp)
    fm = F.derivs(xm)

    def gap(dist, side):
        # E - F near a turning point, expanded about the exact root so that the
        # rounding of the computed turning point does not clip the endpoint
        _, f1, f2, f3 = fp if side > 0 else fm
        d = -dist if side > 0 else dist
        return -(f1 * d + 0.5 * f2 * d * d + f3 * d**3 / 6.0)

    def integrand(u, d_lo, d_hi):
        x = np.where(d_hi < d_lo, xp - half * d_hi, xm + half * d_lo)
        w = E - F(x)
        near_p = half * d_hi < 1e-5 * half
        near_m = half * d_lo < 1e-5 * half
        if near_p.any():
            w = np.where(near_p, gap(half * d_hi, +1), w)
        if near_m.any():
            w = np.where(near_m, gap(half * d_lo, -1), w)
        w = np.maximum(w, 0.0)
        q = np.sqrt(w)

        def chart(y):
            g0 = np.maximum(G(y), 0.0)
            k = np.sqrt(g0)
            with np.errstate(divide="ignore", invalid="ignore"):
                kp = np.where(np.abs(y) < _TINY, kp0, G(y, 1) / (2.0 * k))
            return k, kp

        y = newton_bisect_increasing(chart, q, 0.0, tp.y_plus, x0=q / kp0)
        _, kp = chart(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1.0 / (kp * q)
        return np.where(q > 0, out, 0.0)

    prev = None
    evals = 0
    h = 0.5
    while True:
        u, d_lo, d_hi, w = _ts_nodes(h)
        evals += u.size
        S = half * float(np.sum(w * integrand(u, d_lo, d_hi)))
        if prev is not None:
            err = abs(S - prev)
            if err <= tol:
                return PeriodSample(E, S, METHODS["raw"], err)
        if evals > budget:
            raise QuadratureFailure(f"tanh-sinh did not settle within {budget} evaluations")
        prev = S
        h *= 0.5


# ---------------------------------------------------------------- ODE oracle

def return_time_oracle(H, E, tol=1e-11, half="lower", time_budget=None):
    """Period from the flow: start on the x-axis at a turning point, time the
    return of ``y`` to zero, and double it (the level set is symmetric in y)."""
    E = float(E)
    tp = turning_points(H, E)
    F, G = H.F, H.G
    omega = math.sqrt(F(0.0, 2) * G(0.0, 2))
    if time_budget is None:
        time_budget = 200.0 * 2.0 * math.pi / omega
    if half == "lower":
        start, direction = (tp.x_plus, 0.0), 1.0
    elif half == "upper":
        start, direction = (tp.x_minus, 0.0), -1.0
    else:
        raise ValueError("half must be 'lower' or 'upper'")

    def rhs(_t, s):
        return (G(s[1], 1), -F(s[0], 1))

    def crossing(_t, s):
        return s[1]

    crossing.terminal = True
    crossing.direction = direction
    scale = max(abs(tp.x_minus), tp.x_plus, tp.y_plus)
    try:
        sol = solve_ivp(rhs, (0.0, time_budget), start, method="DOP853", rtol=tol,
                        atol=tol * scale, events=crossing)
    except DomainError as exc:
        raise EventNotFound(f"trajectory left the admissible region: {exc}") from exc
    if sol.status != 1 or not sol.t_events[0].size:
        raise EventNotFound(f"no return to the x-axis within t={time_budget:.6g}")
    t_half = float(sol.t_events[0][0])
    xs = np.append(sol.y[0], sol.y_events[0][0][0])
    ys = np.append(sol.y[1], sol.y_events[0][0][1])
    drift = float(np.max(np.abs(F(xs) + G(ys) - E)) / E)
    if drift > 100.0 * tol:
        raise DriftExceeded(f"relative energy drift {drift:.3g} exceeds {100 * tol:.3g}")
    T = 2.0 * t_half
    return PeriodSample(E, T, METHODS["ode"], T * max(drift, tol), drift=drift)


def period(H, E, method="theta", tol=None, **kw):
    """Dispatch to one of the three routes (``theta``, ``raw``, ``ode``)."""
    method = {v: k for k, v in METHODS.items()}.get(method, method)
    if method == "theta":
        return period_theta(H, E, tol=DEFAULT_TOL if tol is None else tol, **kw)
    if method == "raw":
        return period_raw(H, E, tol=DEFAULT_TOL if tol is None else tol, **kw)
    if method == "ode":
        return return_time_oracle(H, E, tol=1e-11 if tol is None else tol, **kw)
    raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")


# ---------------------------------------------------------------- derivative

RICHARDSON_LEVELS = 4


def period_derivative(H, E, tol=DEFAULT_TOL, levels=RICHARDSON_LEVELS):
    """``dT/dE`` by central differences with Richardson extrapolation.

    The smallest step is ``max(1e-6 E, 1e-9)``, capped at ``E/32`` so the
    widest stencil stays inside ``(0, E_star)``; coarser levels double it.  All
    stencil points reuse the panel layout adapted at ``E`` so the quadrature
    noise does not vary between them.
    """
    E = float(E)
    h0 = min(max(1e-6 * E, 1e-9), E / 2 ** (levels + 1))  # widest step at most E/4
    steps = [h0 * 2 ** (levels - 1 - k) for k in range(levels)]
    widest = steps[0]
    if not (0.0 < E - widest and E + widest < H.annulus.E_star):
        raise EnergyOutOfAnnulus(f"difference stencil E±{widest:.3g} leaves the annulus")
    base = period_theta(H, E, tol=tol)
    part = base.partition
    D = []
    for h in steps:
        tp = period_theta(H, E + h, partition=part).T
        tm = period_theta(H, E - h, partition=part).T
        D.append((tp - tm) / (2.0 * h))
    R = [D[:]]
    for j in range(1, levels):
        prev = R[-1]
        R.append([prev[k] + (prev[k] - prev[k - 1]) / (4**j - 1) for k in range(1, len(prev))])
    value = R[-1][0]
    trunc = abs(value - R[-2][-1])
    roundoff = 64.0 * EPS * abs(base.T) / h0
    return DerivativeSample(E, float(value), float(trunc + roundoff), h0, levels, base.T)


# ---------------------------------------------------------------- curves

_SAMPLE_FAILURES = (PeriodFnError, ValueError, ArithmeticError)


def _sample_one(H, E, method, tol, derivative):
    try:
        s = period(H, E, method=method, tol=tol)
    except _SAMPLE_FAILURES as exc:
        return None, None, f"{type(exc).__name__}: {exc}"
    d = None
    if derivative:
        try:
            d = period_derivative(H, E)
        except _SAMPLE_FAILURES:
            d = None
    return s, d, None


def sample_period_curve(H, E_grid, method="theta", tol=None, derivative=True, workers=1):
    """Evaluate ``T`` (and ``dT/dE``) on a strictly increasing grid.

    Failing points are recorded in ``gaps`` instead of aborting the curve.
    With ``workers > 1`` points are evaluated concurrently; results do not
    depend on the worker count.
    """
    grid = [float(e) for e in np.atleast_1d(np.asarray(E_grid, dtype=float))]
    if any(not b > a for a, b in zip(grid, grid[1:])):
        raise ValueError("energy grid must be strictly increasing")
    job = lambda e: _sample_one(H, e, method, tol, derivative)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, grid))
    else:
        results = [job(e) for e in grid]
    samples, derivs, gaps = [], [], []
    for e, (s, d, why) in zip(grid, results):
        if s is None:
            gaps.append((e, why))
        else:
            samples.append(s)
            derivs.append(d)
    tag = METHODS.get(method, method)
    return PeriodCurve(tuple(samples), tuple(derivs), tuple(gaps), tag)


SCAN_POINTS = 17
FLAT_RTOL = 1e-9


def locate_period_extremum(H, E_lo, E_hi, xtol=1e-6, tol=DEFAULT_TOL):
    """Interior extremum of ``T`` on ``[E_lo, E_hi]`` or a monotone/flat flag.

    A coarse scan picks the candidate bracket; Brent's method (golden section
    with parabolic steps) then refines it.
    """
    E_lo, E_hi = float(E_lo), float(E_hi)
    E_star = H.annulus.E_star
    if math.isfinite(E_star):
        E_hi = min(E_hi, E_star * (1.0 - 1e-6))
    if not 0.0 < E_lo < E_hi:
        raise EnergyOutOfAnnulus(f"empty bracket ({E_lo}, {E_hi}) inside (0, {E_star})")
    Tf = lambda e: period_theta(H, e, tol=tol).T
    grid = np.linspace(E_lo, E_hi, SCAN_POINTS)
    T = np.array([Tf(e) for e in grid])
    if T.max() - T.min() <= FLAT_RTOL * abs(T.mean()):
        return Extremum(None, None, None, "degenerate-flat")
    for kind, i in (("min", int(np.argmin(T))), ("max", int(np.argmax(T)))):
        if 0 < i < SCAN_POINTS - 1:
            g = Tf if kind == "min" else (lambda e: -Tf(e))
            x, fx = brent_minimize(g, grid[i - 1], grid[i + 1], xtol=xtol)
            return Extremum(float(x), kind, float(fx if kind == "min" else -fx), "interior")
    flag = "monotone-increasing" if T[-1] > T[0] else "monotone-decreasing"
    return Extremum(None, None, None, flag)
