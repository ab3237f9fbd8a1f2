"""Acceptance criteria 1-10.

Run under pytest for a per-criterion summary, or directly with
``python tests/test_acceptance.py`` for one PASS/FAIL line each.
"""

import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from oracles import SINH_ARGMIN, SINH_BOUND, c1_exact  # noqa: E402
from periodfn import gallery  # noqa: E402
from periodfn.criterion import (chicone_N, criterion_parts, max_certified_energy,  # noqa: E402
                                sign_certificate)
from periodfn.errors import NoCertifiedRegion  # noqa: E402
from periodfn.functions import CoshWell, CosineWell, Polynomial  # noqa: E402
from periodfn.hamiltonian import SeparableHamiltonian, turning_points  # noqa: E402
from periodfn.period import (locate_period_extremum, period_derivative,  # noqa: E402
                             period_theta, return_time_oracle)
from periodfn.polyfamily import (FamilyParams, abpq, classify, sigma_root,  # noqa: E402
                                 tangency, thresholds)

FLAT = {"constant": 0, "increasing": 1, "decreasing": -1}


def _energies(H, top, count):
    E_star = H.annulus.E_star
    if math.isfinite(E_star):
        top = min(top, 0.95 * E_star)
    return np.geomspace(top * 1e-3, top, count)


def test_criterion_1_isochronous_baseline():
    start = time.perf_counter()
    H = FamilyParams(0, 0, 0).hamiltonian()
    for E in (0.01, 0.1, 1.0, 10.0):
        assert abs(period_theta(H, E).T - 2 * math.pi) <= 1e-8
    assert time.perf_counter() - start < 1.0


FAMILY_POINTS = [(1, 0, 0.1), (1, 0, 2), (-1, 0.2, 0.1), (0, 1, 0.5), (1, 0.5, 0),
                 (1, 2, 0), (3, 3, 1), (2, 2, 3), (0, -1, 0.5), (1.5, 0.7, 4)]


def test_criterion_2_cross_method_agreement():
    start = time.perf_counter()
    systems = [gallery.builtin(n).H for n in gallery.names()]
    systems += [FamilyParams(*p).hamiltonian() for p in FAMILY_POINTS]
    worst = 0.0
    for H in systems:
        for E in _energies(H, 2.0, 5):
            t = period_theta(H, E).T
            worst = max(worst, abs(return_time_oracle(H, E).T - t) / t)
    assert worst <= 1e-6
    assert time.perf_counter() - start < 60.0


def test_criterion_3_chicone_reduction():
    rng = np.random.default_rng(11)
    half_square = Polynomial([0, 0, 0.5])
    potentials = [Polynomial([0, 0, 0.5, 1 / 3]), Polynomial([0, 0, 0.5, 0.2, 0.25]),
                  CosineWell(), CoshWell(), gallery.builtin("ohp-log").H.F]
    for F in potentials:
        H = SeparableHamiltonian(F, half_square)
        tp = turning_points(H, 0.9 * min(H.annulus.E_star, 1.0))
        x = rng.uniform(tp.x_minus, tp.x_plus, 1000)
        y = rng.uniform(-tp.y_plus, tp.y_plus, 1000)
        M, _ = criterion_parts(H, x, y)
        ref = chicone_N(F, x) * y**4 / 2
        dev = np.abs(M - ref) / np.maximum(np.abs(ref), 1e-300)
        dev[ref == 0] = np.abs(M[ref == 0])
        assert dev.max() <= 1e-10


def test_criterion_4_threshold_values():
    c0, c1 = thresholds(FamilyParams(1, 0, 0))
    assert abs(c0 - 2 / 9) <= 1e-14 * 2 / 9
    assert abs(c1 - float(c1_exact(1, 0))) <= 1e-14 * 10 / 9
    p = FamilyParams(1, 0, 1)
    x_c = sigma_root(p)
    assert abs(x_c - 0.025147) <= 1e-4
    assert abs(p.F(x_c) - 0.000321) <= 1e-5


def test_criterion_5_period_minimum():
    ext = locate_period_extremum(FamilyParams(1, 0, 2).hamiltonian(), 0.007106, 1 / 6)
    assert ext.kind == "min"
    assert abs(ext.energy - 0.0427) <= 0.002


def test_criterion_6_tangency_numbers():
    t = tangency(FamilyParams(2, 2, 0))
    assert abs(t.x_m - (-0.0748706245)) <= 1e-6
    assert abs(t.E0 - 0.0025387196) <= 1e-8
    assert abs(t.c0 - 2.8004647) <= 1e-5
    c0, c1 = thresholds(FamilyParams(3, 3, 0))
    assert c1 == 7.0
    assert abs(c0 - 1.798) <= 1e-3
    cl = classify(FamilyParams(3, 3, 1))
    x1 = cl.points["x1"]
    assert abs(abpq(cl.params).eval_A(x1)) <= 1e-12
    assert abs(x1 + 1 / 3) <= 1e-12
    assert abs(cl.points["x0"] - 0.1958) <= 1e-3


def test_criterion_7_sinh_bound():
    sinh = gallery.builtin("sinh").H
    r = max_certified_energy(sinh, "NonPositive", E_hi=20.0)
    assert abs(r.E0 - SINH_BOUND) <= 0.05
    assert abs(gallery.sinh_argmin() - SINH_ARGMIN) <= 1e-9


def _sweep(count=200, seed=20261016):
    rng = np.random.default_rng(seed)
    records = []
    while len(records) < count:
        a, b = rng.uniform(-3, 3, 2)
        c = rng.uniform(0, 6)
        slice_ = rng.integers(4)
        if slice_ == 1:
            b, c = 0.0, rng.uniform(0, 0.5)
        elif slice_ == 2:
            c = 0.0
        elif slice_ == 3:
            a = 0.0
        cl = classify(FamilyParams(a, b, c))
        if cl.classified:
            records.append(cl)
    return records


def test_criterion_8_sign_matches_dynamics():
    passed = failed = 0
    for cl in _sweep():
        H = cl.params.hamiltonian()
        want = FLAT[cl.verdict]
        top = 0.95 * min(cl.E0, 1.0)
        for E in np.geomspace(top * 1e-3, top, 10):
            try:
                d = period_derivative(H, E)
            except ArithmeticError:
                failed += 1
                continue
            if want == 0:
                ok = abs(d.value) <= max(3 * d.err, 1e-8)
            elif d.sign == 0:
                continue  # numerically flat
            else:
                ok = d.sign == want
            passed += ok
            failed += not ok
    assert passed + failed > 0
    assert passed / (passed + failed) >= 0.98


def test_criterion_9_increasing_examples():
    pair = gallery.builtin("pendulum-pair").H
    rel = gallery.builtin("relativistic").H
    assert sign_certificate(pair, 2.0).verdict == "NonNegative"
    assert sign_certificate(rel, 50.0).verdict == "NonNegative"
    for H, top in ((pair, 2.0), (rel, 50.0)):
        for E in _energies(H, top, 10):
            d = period_derivative(H, E)
            assert d.value > 0 and d.sign == 1


def test_criterion_10_indeterminate_boundary():
    p = FamilyParams(1, 10 / 9, 0)
    assert classify(p).verdict == "indeterminate-near-origin"
    H = p.hamiltonian()
    for E0 in np.geomspace(1e-12, 0.99 * min(H.annulus.E_star, 10.0), 12):
        cert = sign_certificate(H, E0, resolution=128)
        assert cert.verdict in ("Indeterminate", "Mixed")
    with pytest.raises(NoCertifiedRegion):
        max_certified_energy(H, "NonNegative")
    with pytest.raises(NoCertifiedRegion):
        max_certified_energy(H, "NonPositive")


if __name__ == "__main__":
    tests = sorted((int(k.split("_")[2]), k, f) for k, f in dict(globals()).items()
                   if k.startswith("test_criterion_"))
    for num, name, fn in tests:
        label = name.split("_", 3)[3].replace("_", " ")
        start = time.perf_counter()
        try:
            fn()
            verdict = "PASS"
        except Exception as exc:  # report and keep going
            verdict = f"FAIL ({type(exc).__name__}: {exc})"
        print(f"criterion {num:2d}: {verdict}  {label}  [{time.perf_counter() - start:.1f}s]")
