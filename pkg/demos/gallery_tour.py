"""Walk through the builtin systems: period curve, derivative sign and certificate.

    python demos/gallery_tour.py
"""

import math

import numpy as np

from periodfn import gallery
from periodfn.criterion import sign_certificate
from periodfn.period import period_derivative, period_theta


def tour(name):
    ex = gallery.builtin(name)
    H, want = ex.H, ex.expected
    top = min(want.certify_at, 10.0)
    if math.isfinite(H.annulus.E_star):
        top = min(top, 0.95 * H.annulus.E_star)
    print(f"\n{name}: {ex.provenance}")
    print(f"  claimed {want.verdict} up to E = {want.E_hi:g}")
    for E in np.geomspace(top * 1e-2, top, 5):
        d = period_derivative(H, E)
        print(f"  E = {E:10.4g}   T = {period_theta(H, E).T:.10f}   dT/dE = {d.value:+.3e} (+/- {d.err:.1e})")
    cert = sign_certificate(H, want.certify_at, resolution=256)
    print(f"  certificate at E = {want.certify_at:g}: {cert.verdict}"
          + (" (M vanishes)" if cert.vanishes else ""))


if __name__ == "__main__":
    for name in gallery.names():
        tour(name)
