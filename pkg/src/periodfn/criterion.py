"""Sign functions controlling monotonicity of the period, and sampled sign certificates.

For ``H = F(x) + G(y)`` the criterion is

    M(x, y) = N(x) G G'^2 + F F'^2 F'' (G'^2 - 2 G G'')
    N(x)    = 6 F F''^2 - 3 F'^2 F'' - 2 F F' F'''

so ``M`` is a sum of two products of a function of ``x`` and a function of
``y``.  Certificates exploit this: on a tensor grid both factors are evaluated
once per axis and combined with outer products.

Certificates are *sampled*, not proofs.  Every output says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnergyOutOfAnnulus, NoCertifiedRegion
from .functions import Polynomial, RelativisticKinetic, SmoothFunction
from .hamiltonian import SeparableHamiltonian, branch_limit, branch_solve
from .numerics import EPS

__all__ = [
    "CriterionValue",
    "SignCertificate",
    "CertifiedEnergy",
    "chicone_N",
    "criterion_M",
    "criterion_parts",
    "relativistic_margin",
    "chicone_interval",
    "sign_certificate",
    "max_certified_energy",
    "VERDICTS",
]

VERDICTS = ("NonNegative", "NonPositive", "Mixed", "Indeterminate")
SIGN_TAGS = {"NonNegative": 1, "NonPositive": -1}

DEFAULT_RESOLUTION = 512
DEFAULT_DEPTH = 4
REFINE_RTOL = 1e-12  # |M| below this fraction of the term magnitudes: refine the cell
SIGN_RTOL = 32 * EPS  # beyond this fraction a sample counts as signed
PROBE_DECADES = 6
PROBE_RESOLUTION = 64
VANISH_PROBE_DECADES = 12
ROUNDING_REASON = "sign below rounding resolution"
REFINE_BUDGET_FACTOR = 4  # refinement may cost this many base grids
UNRESOLVED_FRACTION = 0.01  # one-signed verdicts need nearly all samples resolved


# ---------------------------------------------------------------- pointwise

def chicone_N(F: SmoothFunction, x):
    f0, f1, f2, f3 = F.derivs(x)
    return 6.0 * f0 * f2 * f2 - 3.0 * f1 * f1 * f2 - 2.0 * f0 * f1 * f3


def _x_factors(F, x, magnitude=False):
    f0, f1, f2, f3 = F.derivs(x)
    t1, t2, t3 = 6.0 * f0 * f2 * f2, 3.0 * f1 * f1 * f2, 2.0 * f0 * f1 * f3
    N = t1 - t2 - t3
    S = f0 * f1 * f1 * f2
    if magnitude:
        return N, S, np.abs(t1) + np.abs(t2) + np.abs(t3)
    return N, S


def _y_factors(G, y, magnitude=False):
    g0, g1, g2 = G(y), G(y, 1), G(y, 2)
    U = g0 * g1 * g1
    s1, s2 = g1 * g1, 2.0 * g0 * g2
    W = s1 - s2
    if magnitude:
        return U, W, np.abs(s1) + np.abs(s2)
    return U, W


def _is_quadratic_kinetic(G):
    return isinstance(G, Polynomial) and np.array_equal(G.coeffs, [0.0, 0.0, 0.5])


@dataclass(frozen=True)
class CriterionValue:
    """``M = N*U + S*W`` with ``U = G G'^2`` and ``W = G'^2 - 2 G G''``."""

    x: object
    y: object
    M: object
    N: object  # N(x) y^4 / 2 reduction applies only for G = y^2/2; None otherwise
    term_N: object  # N(x)
    term_S: object  # F F'^2 F''
    U: object
    W: object

    def to_dict(self):
        f = lambda v: None if v is None else np.asarray(v).tolist()
        return {"x": f(self.x), "y": f(self.y), "M": f(self.M), "N": f(self.N),
                "breakdown": {"N(x)": f(self.term_N), "F*F'^2*F''": f(self.term_S),
                              "G*G'^2": f(self.U), "G'^2-2GG''": f(self.W)}}


def criterion_parts(H: SeparableHamiltonian, x, y):
    """``(M, scale)``; ``scale`` sums the magnitudes of every unexpanded term,
    so ``|M| <= 1e-12 * scale`` means ``M`` is zero to rounding."""
    N, S, Nmag = _x_factors(H.F, x, magnitude=True)
    U, W, Wmag = _y_factors(H.G, y, magnitude=True)
    return N * U + S * W, Nmag * np.abs(U) + np.abs(S) * Wmag


def criterion_M(H: SeparableHamiltonian, x, y) -> CriterionValue:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    N, S = _x_factors(H.F, x)
    U, W = _y_factors(H.G, y)
    M = N * U + S * W
    scal = lambda v: float(v) if np.ndim(v) == 0 else v
    return CriterionValue(
        x=scal(x), y=scal(y), M=scal(M),
        N=scal(N) if _is_quadratic_kinetic(H.G) else None,
        term_N=scal(N), term_S=scal(S), U=scal(U), W=scal(W),
    )


def relativistic_margin(y, amplitude=1.0, frequency=1.0):
    """``G'^2 - 2 G G''`` for ``G = sqrt(1+y^2) - 1``: direct value and closed form."""
    G = RelativisticKinetic(amplitude, frequency)
    _, W = _y_factors(G, y)
    s = np.sqrt(1.0 + (frequency * np.asarray(y, dtype=float)) ** 2)
    closed = amplitude**2 * frequency**2 * (s - 1.0) ** 2 * (s + 2.0) / s**3
    if np.ndim(y) == 0:
        return float(W), float(closed)
    return W, closed


def _axis_interval(f, E0, sides=(-1, 1), horizon=1e6):
    out = []
    for side in sides:
        lim = branch_limit(f, side, horizon)
        if E0 < lim.value * (1 - 16 * EPS):
            out.append(float(branch_solve(f, side, E0, lim)))
        elif E0 <= lim.value * (1 + 1e-12) and math.isfinite(lim.abscissa):
            # indistinguishable from the critical level in floating point
            out.append(float(lim.abscissa))
        else:
            raise EnergyOutOfAnnulus(
                f"level {E0} not attained on the {'+' if side > 0 else '-'} branch "
                f"(bound {lim.value} at {lim.abscissa})"
            )
    return out


def chicone_interval(F: SmoothFunction, E0):
    """``[x_-(E0), x_+(E0)]``, the sublevel interval ``{F <= E0}`` around 0."""
    if not E0 > 0:
        raise EnergyOutOfAnnulus("E0 must be positive")
    lo, hi = _axis_interval(F, float(E0))
    return lo, hi


# ---------------------------------------------------------------- certificates

@dataclass(frozen=True)
class SignCertificate:
    verdict: str
    E0: float
    resolution: int
    depth: int
    witnesses: dict = field(default_factory=dict)
    margin: float = math.nan
    vanishes: bool = False
    samples: int = 0
    reason: str = ""
    closed: bool = True  # False when E0 = E_star and only H < E0 was sampled

    sampled = True  # every certificate is grid-sampled, never a proof

    def supports(self, sign):
        """Does this certificate establish ``sign`` (a verdict tag, or +1/-1)?"""
        want = SIGN_TAGS.get(sign, sign)
        if self.vanishes:
            return True
        return SIGN_TAGS.get(self.verdict) == want

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "E0": self.E0,
            "resolution": self.resolution,
            "refinement_depth": self.depth,
            "witnesses": self.witnesses,
            "margin": self.margin,
            "vanishes": self.vanishes,
            "samples": self.samples,
            "reason": self.reason,
            "region": "H <= E0" if self.closed else "H < E0",
            "sampled": True,
        }


class _Tally:
    """Order-independent reduction of sampled signs and witnesses."""

    def __init__(self, thresh_rtol):
        self.rtol = thresh_rtol
        self.count = 0
        self.pos = 0
        self.neg = 0
        self.nonfinite = 0
        self.unresolved = 0  # finite, off the axes, inside the rounding band
        self.margin = math.inf
        self.best = {}  # "max+", "min-", "outer+", "outer-" -> (key, x, y, M, H)

    def _keep(self, tag, key, x, y, M, Hv):
        cur = self.best.get(tag)
        if cur is None or key > cur[0]:
            self.best[tag] = (key, float(x), float(y), float(M), float(Hv))

    def add(self, x, y, M, scale, Hv, away):
        if x.size == 0:
            return
        self.count += x.size
        fin = np.isfinite(M) & np.isfinite(scale)
        self.nonfinite += int((~fin).sum())
        thr = self.rtol * scale
        pos = fin & (M > thr)
        neg = fin & (M < -thr)
        self.pos += int(pos.sum())
        self.neg += int(neg.sum())
        self.unresolved += int((fin & ~pos & ~neg & away).sum())
        nz = (pos | neg) & away
        if nz.any():
            self.margin = min(self.margin, float(np.min(np.abs(M[nz]))))
        for mask, sgn, tag in ((pos, 1.0, "+"), (neg, -1.0, "-")):
            if mask.any():
                i = np.flatnonzero(mask)
                j = i[np.argmax(sgn * M[i])]
                self._keep("extreme" + tag, sgn * M[j], x[j], y[j], M[j], Hv[j])
                j = i[np.argmax(Hv[i])]
                self._keep("outer" + tag, Hv[j], x[j], y[j], M[j], Hv[j])

    def witnesses(self):
        return {k: {"x": v[1], "y": v[2], "M": v[3], "H": v[4]}
                for k, v in sorted(self.best.items())}


def _certificate_box(H, E0):
    E_star = H.annulus.E_star
    if not E0 > 0:
        raise EnergyOutOfAnnulus("E0 must be positive")
    if E0 > E_star * (1 + 1e-12):
        raise EnergyOutOfAnnulus(f"E0={E0} above the annulus bound {E_star}")
    closed = E0 < E_star
    xm, xp = _axis_interval(H.F, E0)
    (yp,) = _axis_interval(H.G, E0, sides=(1,))
    return xm, xp, yp, closed


def sign_certificate(H: SeparableHamiltonian, E0, resolution=DEFAULT_RESOLUTION,
                     refinement_depth=DEFAULT_DEPTH, probe_origin=True) -> SignCertificate:
    """Sampled verdict on the sign of ``M`` over ``{H <= E0}`` minus the axes.

    Cell centres of a ``resolution``-square grid on the bounding box are
    tested; cells that are numerically zero, disagree in sign with a
    neighbour, or straddle the level curve are split 2x2 up to
    ``refinement_depth`` times.  A Mixed result whose sign pattern persists
    at every probed smaller energy is reported as Indeterminate: the sign is
    then not settled arbitrarily close to the centre.
    """
    E0 = float(E0)
    n = int(resolution)
    depth = int(refinement_depth)
    if n < 2 or depth < 0:
        raise ValueError("resolution must be >= 2 and depth >= 0")
    xm, xp, yp, closed = _certificate_box(H, E0)
    F, G = H.F, H.G

    xe = np.linspace(xm, xp, n + 1)
    ye = np.linspace(-yp, yp, n + 1)
    xc = 0.5 * (xe[:-1] + xe[1:])
    yc = 0.5 * (ye[:-1] + ye[1:])
    dx, dy = xe[1] - xe[0], ye[1] - ye[0]
    ax_tol_x, ax_tol_y = 1e-12 * (xp - xm), 1e-12 * yp

    with np.errstate(all="ignore"):
        Nx, Sx, Nmag = _x_factors(F, xc, magnitude=True)
        Uy, Wy, Wmag = _y_factors(G, yc, magnitude=True)
        Fc, Gc = F(xc), G(yc)
        # corner energies, clipped to stay inside open domains
        Fe = F(np.clip(xe, *_inner(F.domain)))
        Ge = G(np.clip(ye, *_inner(G.domain)))
    a = np.outer(Nx, Uy)
    b = np.outer(Sx, Wy)
    M = a + b
    scale = np.outer(Nmag, np.abs(Uy)) + np.outer(np.abs(Sx), Wmag)
    Hc = Fc[:, None] + Gc[None, :]
    inside = (Hc <= E0) if closed else (Hc < E0)
    off_axis = (np.abs(xc)[:, None] > ax_tol_x) & (np.abs(yc)[None, :] > ax_tol_y)
    keep = inside & off_axis
    away = (np.abs(xc)[:, None] >= dx) & (np.abs(yc)[None, :] >= dy)

    X = np.broadcast_to(xc[:, None], M.shape)
    Y = np.broadcast_to(yc[None, :], M.shape)
    tally = _Tally(SIGN_RTOL)
    tally.add(X[keep], Y[keep], M[keep], scale[keep], Hc[keep], away[keep])

    vanishes_base = tally.count > 0 and tally.pos == 0 and tally.neg == 0 and tally.nonfinite == 0

    # cells to refine
    Hcorner = np.minimum.reduce([Fe[:-1, None] + Ge[None, :-1], Fe[1:, None] + Ge[None, :-1],
                                 Fe[:-1, None] + Ge[None, 1:], Fe[1:, None] + Ge[None, 1:]])
    Hcorner_max = np.maximum.reduce([Fe[:-1, None] + Ge[None, :-1], Fe[1:, None] + Ge[None, :-1],
                                     Fe[:-1, None] + Ge[None, 1:], Fe[1:, None] + Ge[None, 1:]])
    Hcorner = np.minimum(Hcorner, Hc)
    straddle = (Hcorner <= E0) & ~(Hcorner_max <= E0) & off_axis
    with np.errstate(invalid="ignore"):
        sgn = np.where(M > REFINE_RTOL * scale, 1, np.where(M < -REFINE_RTOL * scale, -1, 0))
    sgn = np.where(keep & np.isfinite(M), sgn, 0)
    disagree = np.zeros_like(keep)
    for axis in (0, 1):
        s0 = np.take(sgn, range(0, n - 1), axis=axis)
        s1 = np.take(sgn, range(1, n), axis=axis)
        d = (s0 * s1) < 0
        pad_lo = [(0, 0), (0, 0)]
        pad_hi = [(0, 0), (0, 0)]
        pad_lo[axis] = (0, 1)
        pad_hi[axis] = (1, 0)
        disagree |= np.pad(d, pad_lo) | np.pad(d, pad_hi)
    with np.errstate(invalid="ignore"):
        near_zero = keep & ~(np.abs(M) > REFINE_RTOL * scale)
    flagged = straddle | (disagree & keep)
    if not vanishes_base:
        flagged |= near_zero
    ci, cj = np.nonzero(flagged)

    budget = REFINE_BUDGET_FACTOR * n * n
    spent = 0
    exhausted = False
    unresolved_nonfinite = 0
    cx, cy = xc[ci], yc[cj]
    hx, hy = np.full(ci.size, 0.5 * dx), np.full(ci.size, 0.5 * dy)
    final_nonfinite = not np.all(np.isfinite(M[keep]))
    for level in range(1, depth + 1):
        if cx.size == 0:
            final_nonfinite = False
            break
        if spent + 4 * cx.size > budget:
            exhausted = True
            break
        spent += 4 * cx.size
        qx, qy = 0.5 * hx, 0.5 * hy
        kx = np.concatenate([cx - qx, cx + qx, cx - qx, cx + qx])
        ky = np.concatenate([cy - qy, cy - qy, cy + qy, cy + qy])
        kqx = np.concatenate([qx] * 4)
        kqy = np.concatenate([qy] * 4)
        with np.errstate(all="ignore"):
            Mk, sk = criterion_parts(H, kx, ky)
            Hk = F(kx) + G(ky)
            lo_corner = F(_toward_zero(kx, kqx, F.domain)) + G(_toward_zero(ky, kqy, G.domain))
            hi_corner = F(_away_zero(kx, kqx, F.domain)) + G(_away_zero(ky, kqy, G.domain))
        ins = (Hk <= E0) if closed else (Hk < E0)
        off = (np.abs(kx) > ax_tol_x) & (np.abs(ky) > ax_tol_y)
        kk = ins & off
        awk = (np.abs(kx) >= dx) & (np.abs(ky) >= dy)
        tally.add(kx[kk], ky[kk], Mk[kk], sk[kk], Hk[kk], awk[kk])
        with np.errstate(invalid="ignore"):
            nz = kk & ~(np.abs(Mk) > REFINE_RTOL * sk)
        st = (lo_corner <= E0) & ~(hi_corner <= E0) & off
        nonfin = kk & ~np.isfinite(Mk)
        nxt = st | nz if not vanishes_base else st
        nxt |= nonfin
        unresolved_nonfinite = int(nonfin.sum())
        final_nonfinite = unresolved_nonfinite > 0
        cx, cy, hx, hy = kx[nxt], ky[nxt], kqx[nxt], kqy[nxt]

    common = dict(E0=E0, resolution=n, depth=depth, witnesses=tally.witnesses(),
                  margin=tally.margin if math.isfinite(tally.margin) else math.nan,
                  samples=tally.count, closed=closed)
    if tally.count == 0:
        return SignCertificate("Indeterminate", reason="no samples inside the region", **common)
    if final_nonfinite:
        return SignCertificate("Indeterminate", reason="non-finite criterion values", **common)
    if tally.pos and tally.neg:
        if probe_origin and _mixed_at_all_scales(H, E0):
            return SignCertificate("Indeterminate", reason="sign undetermined near origin",
                                   **common)
        return SignCertificate("Mixed", reason="both signs sampled", **common)
    if exhausted:
        return SignCertificate("Indeterminate", reason="refinement budget exhausted", **common)
    if (tally.pos or tally.neg) and tally.unresolved > UNRESOLVED_FRACTION * tally.count:
        return SignCertificate("Indeterminate", reason=ROUNDING_REASON, **common)
    if tally.pos:
        return SignCertificate("NonNegative", **common)
    if tally.neg:
        return SignCertificate("NonPositive", **common)
    if probe_origin and _signed_at_larger_scale(H, E0):
        # M is analytic: it cannot vanish near the centre yet be signed further out
        return SignCertificate("Indeterminate", reason=ROUNDING_REASON, **common)
    return SignCertificate("NonNegative", vanishes=True, reason="criterion vanishes on samples",
                           **common)


def _inner(domain):
    lo, hi = domain
    lo = lo + abs(lo) * 1e-12 + 1e-300 if math.isfinite(lo) else -math.inf
    hi = hi - abs(hi) * 1e-12 - 1e-300 if math.isfinite(hi) else math.inf
    return lo, hi


def _toward_zero(c, h, domain):
    # corner closest to the axis; H is monotone in |x| and |y| on the box
    t = np.where(np.abs(c) <= h, 0.0, c - np.sign(c) * h)
    return np.clip(t, *_inner(domain))


def _away_zero(c, h, domain):
    return np.clip(c + np.sign(c) * h, *_inner(domain))


def _signed_at_larger_scale(H, E0):
    """Walk up by decades (inside the annulus) looking for resolved signs."""
    cap = 0.5 * H.annulus.E_star
    for k in range(1, VANISH_PROBE_DECADES + 1):
        E = E0 * 10.0**k
        if E > cap:
            E = cap
        if not E > E0:
            return False
        cert = sign_certificate(H, E, resolution=PROBE_RESOLUTION, refinement_depth=0,
                                probe_origin=False)
        if not cert.vanishes:
            return True
        if E == cap:
            return False
    return False


def _mixed_at_all_scales(H, E0):
    """Mixed at every probed smaller energy, down to where rounding hides the sign."""
    for k in range(1, PROBE_DECADES + 1):
        cert = sign_certificate(H, E0 * 10.0**-k, resolution=PROBE_RESOLUTION,
                                refinement_depth=2, probe_origin=False)
        if cert.verdict == "Mixed":
            continue
        return cert.vanishes or (cert.verdict == "Indeterminate"
                                 and cert.reason == ROUNDING_REASON)
    return True


# ---------------------------------------------------------------- largest energy

@dataclass(frozen=True)
class CertifiedEnergy:
    sign: str
    E0: float
    bracket: tuple  # (last pass, first fail); first fail is None when E_hi passed
    tangency: dict | None
    certificate: SignCertificate

    def to_dict(self):
        return {"sign": self.sign, "E0": self.E0, "bracket": list(self.bracket),
                "tangency_witness": self.tangency, "certificate": self.certificate.to_dict()}


UNBOUNDED_SEARCH_CAP = 100.0


def max_certified_energy(H: SeparableHamiltonian, sign, E_hi=None, resolution=DEFAULT_RESOLUTION,
                         refinement_depth=DEFAULT_DEPTH, rtol=1e-3) -> CertifiedEnergy:
    """Largest ``E0 <= E_hi`` whose certificate supports ``sign``, by geometric bisection.

    The tangency witness is the outermost sample of the opposite sign in the
    certificate just above the returned energy.
    """
    if sign not in SIGN_TAGS:
        raise ValueError(f"sign must be one of {sorted(SIGN_TAGS)}")
    E_star = H.annulus.E_star
    if E_hi is None:
        E_hi = E_star if math.isfinite(E_star) else UNBOUNDED_SEARCH_CAP
    E_hi = float(min(E_hi, E_star))
    cert = lambda E: sign_certificate(H, E, resolution, refinement_depth)

    top = cert(E_hi)
    if top.supports(sign):
        return CertifiedEnergy(sign, E_hi, (E_hi, None), None, top)
    lo = hi = None
    fail_cert = top
    E = E_hi
    for _ in range(12):
        E_next = E / 10.0
        c = cert(E_next)
        if c.supports(sign):
            lo, lo_cert = E_next, c
            hi = E
            break
        E, fail_cert = E_next, c
    if lo is None:
        raise NoCertifiedRegion(f"no energy down to {E:.3g} certifies {sign}")
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        c = cert(mid)
        if c.supports(sign):
            lo, lo_cert = mid, c
        else:
            hi, fail_cert = mid, c
    opposite = "+" if SIGN_TAGS[sign] < 0 else "-"
    tangency = fail_cert.witnesses.get("outer" + opposite)
    return CertifiedEnergy(sign, lo, (lo, hi), tangency, lo_cert)
