import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import family_coeffs, polynomial_M
from periodfn.criterion import (chicone_interval, chicone_N, criterion_M, criterion_parts,
                                max_certified_energy, relativistic_margin, sign_certificate)
from periodfn.errors import EnergyOutOfAnnulus, NoCertifiedRegion
from periodfn.functions import (CoshWell, CosineWell, Polynomial, PowerWall, RelativisticKinetic,
                                TranslatedSum)
from periodfn.hamiltonian import SeparableHamiltonian
from periodfn.polyfamily import FamilyParams

Q = Polynomial([0, 0, 0.5])
rng = np.random.default_rng(7)

POTENTIALS = [
    Polynomial([0, 0, 0.5, 1 / 3]),
    Polynomial([0, 0, 0.5, -0.4, 0.3]),
    CosineWell(),
    CoshWell(2.0, 0.5),
    TranslatedSum([PowerWall(1, 1, 0, 1), PowerWall(2, 1, 3, -1)], shift=1.0),
]


@pytest.mark.parametrize("F", POTENTIALS, ids=lambda f: f.family)
def test_reduces_to_potential_criterion(F):
    H = SeparableHamiltonian(F, Q)
    lo, hi = max(F.domain[0], -2.0) * 0.95, min(F.domain[1], 2.0) * 0.95
    x, y = rng.uniform(lo, hi, 1000), rng.uniform(-2, 2, 1000)
    cv = criterion_M(H, x, y)
    np.testing.assert_array_equal(cv.N, chicone_N(F, x))
    dev = np.abs(cv.M - chicone_N(F, x) * y**4 / 2)
    assert np.all(dev <= 1e-10 * (1 + np.abs(cv.M)))


def test_reduction_field_absent_for_other_kinetic_terms():
    cv = criterion_M(SeparableHamiltonian(Q, RelativisticKinetic()), 0.3, 0.4)
    assert cv.N is None


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(0, 5))
def test_matches_exact_polynomial_arithmetic(a, b, c):
    H = FamilyParams(a, b, c).hamiltonian()
    ref = polynomial_M(*family_coeffs(a, b, c))
    x, y = rng.uniform(-0.5, 0.5, 200), rng.uniform(-0.5, 0.5, 200)
    M, scale = criterion_parts(H, x, y)
    assert np.all(np.abs(M - ref(x, y)) <= 1e-12 * scale + 1e-300)


def test_breakdown_sums_to_M():
    H = SeparableHamiltonian(CosineWell(), CoshWell())
    cv = criterion_M(H, 0.7, -0.4)
    assert cv.M == cv.term_N * cv.U + cv.term_S * cv.W
    d = cv.to_dict()
    assert set(d["breakdown"]) == {"N(x)", "F*F'^2*F''", "G*G'^2", "G'^2-2GG''"}


def test_relativistic_margin_closed_form():
    y = np.linspace(-30, 30, 101)
    direct, closed = relativistic_margin(y)
    np.testing.assert_allclose(direct, closed, rtol=1e-9, atol=1e-15)
    assert np.all(closed >= 0)


def test_chicone_interval_of_the_cubic():
    F = Polynomial([0, 0, 0.5, 1 / 3])
    assert chicone_interval(F, 1 / 6) == (-1.0, 0.5)
    lo, hi = chicone_interval(F, 0.1)
    assert F(lo) == pytest.approx(0.1, rel=1e-13) and F(hi) == pytest.approx(0.1, rel=1e-13)
    with pytest.raises(EnergyOutOfAnnulus):
        chicone_interval(F, 0.2)


def _family(a, b, c):
    return FamilyParams(a, b, c).hamiltonian()


@pytest.mark.parametrize("H,E0,verdict", [
    (_family(0, 0, 1), 10.0, "NonPositive"),
    (_family(1, 0, 2 / 9), 1 / 6, "NonNegative"),
    (_family(2, 2, 3), 0.0025, "NonPositive"),
    (SeparableHamiltonian(CosineWell(), CosineWell()), 2.0, "NonNegative"),
    (SeparableHamiltonian(Q, RelativisticKinetic()), 50.0, "NonNegative"),
    (SeparableHamiltonian(CoshWell(), CoshWell()), 10.9, "NonPositive"),
], ids=["B", "C-boundary", "G.ii", "pendulum-pair", "relativistic", "sinh"])
def test_one_signed_certificates(H, E0, verdict):
    cert = sign_certificate(H, E0)
    assert cert.verdict == verdict
    assert cert.sampled and cert.to_dict()["sampled"] is True
    bad = "extreme+" if verdict == "NonPositive" else "extreme-"
    assert bad not in cert.witnesses


def test_linear_center_vanishes_identically():
    cert = sign_certificate(SeparableHamiltonian(Q, Q), 5.0)
    assert cert.vanishes and cert.supports(1) and cert.supports(-1)


def test_mixed_certificate_exposes_both_signs():
    cert = sign_certificate(_family(1, 0, 1), 1 / 6)
    assert cert.verdict == "Mixed"
    assert cert.witnesses["extreme+"]["M"] > 0 > cert.witnesses["extreme-"]["M"]
    for w in cert.witnesses.values():
        assert w["H"] <= 1 / 6


def test_indeterminate_near_origin():
    cert = sign_certificate(_family(1, 10 / 9, 0), 1.0)
    assert cert.verdict == "Indeterminate"
    assert "origin" in cert.reason


def test_mixed_is_nested_in_energy():
    H = _family(1, 0, 1)
    E = 0.001
    assert sign_certificate(H, E).verdict == "Mixed"
    for bigger in (0.003, 0.03, 0.15):
        assert sign_certificate(H, bigger, resolution=128).verdict == "Mixed"


def test_threshold_flip_in_case_C():
    below = sign_certificate(_family(1, 0, 2 / 9 - 0.05), 1 / 6)
    above = sign_certificate(_family(1, 0, 2 / 9 + 0.05), 1 / 6)
    assert below.verdict == "NonNegative" and above.verdict == "Mixed"


def test_max_certified_energy_reaches_sigma_level():
    r = max_certified_energy(_family(1, 0, 1), "NonNegative", resolution=256)
    assert r.E0 == pytest.approx(0.000321494, rel=5e-3)
    assert r.certificate.supports("NonNegative")
    assert r.tangency is not None and r.tangency["M"] < 0


def test_max_certified_energy_failure_and_arguments():
    with pytest.raises(ValueError):
        max_certified_energy(_family(1, 0, 1), "positive")
    with pytest.raises(NoCertifiedRegion):
        max_certified_energy(_family(1, 10 / 9, 0), "NonNegative", resolution=64)
