import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodfn.errors import EnergyOutOfAnnulus
from periodfn.functions import CoshWell, CosineWell, Polynomial, RelativisticKinetic
from periodfn.hamiltonian import (SeparableHamiltonian, annulus_energy_bound, conjugate_point,
                                  turning_points, validate_center)
from periodfn.polyfamily import FamilyParams

Q = Polynomial([0, 0, 0.5])
CUBIC = FamilyParams(1, 0, 0).hamiltonian()


def test_cubic_annulus_ends_at_the_saddle_level():
    bound = annulus_energy_bound(CUBIC)
    assert bound.E_star == pytest.approx(1 / 6, rel=1e-15)
    assert bound.abscissa == pytest.approx(-1.0, abs=1e-12)
    assert bound.kind.startswith("critical-point")


def test_pendulum_annulus_is_two():
    H = SeparableHamiltonian(CosineWell(), Q)
    assert H.annulus.E_star == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("H", [SeparableHamiltonian(Q, Q),
                               SeparableHamiltonian(CoshWell(), CoshWell()),
                               SeparableHamiltonian(Q, RelativisticKinetic())])
def test_global_centers_are_unbounded(H):
    assert math.isinf(H.annulus.E_star)


def test_validate_center_rejects_odd_kinetic_term():
    H = SeparableHamiltonian(Q, Polynomial([0, 0, 0.5, 0.1]))
    report = validate_center(H)
    assert not report.passed
    assert any("even" in name for name in report.failed())


def test_validate_center_rejects_degenerate_center():
    report = validate_center(SeparableHamiltonian(Polynomial([0, 0, 0, 0, 1]), Q))
    assert "F''(0)>0" in report.failed()


def test_turning_points_outside_annulus():
    with pytest.raises(EnergyOutOfAnnulus):
        turning_points(CUBIC, 0.2)
    with pytest.raises(EnergyOutOfAnnulus):
        turning_points(CUBIC, 0.0)


@given(E=st.floats(1e-8, 0.1666))
def test_turning_points_solve_the_level(E):
    tp = turning_points(CUBIC, E)
    assert tp.x_minus < 0 < tp.x_plus and tp.y_plus > 0
    F, G = CUBIC.F, CUBIC.G
    for v in (F(tp.x_minus), F(tp.x_plus), G(tp.y_plus)):
        assert abs(v - E) <= 1e-12 * max(1.0, E)


@given(E1=st.floats(1e-6, 0.16), E2=st.floats(1e-6, 0.16))
def test_turning_points_are_monotone(E1, E2):
    if E1 == E2:
        return
    lo, hi = sorted((E1, E2))
    a, b = turning_points(CUBIC, lo), turning_points(CUBIC, hi)
    assert a.x_plus <= b.x_plus and a.x_minus >= b.x_minus
    if hi > lo * (1 + 1e-9):  # strict once the gap exceeds root resolution
        assert a.x_plus < b.x_plus and a.x_minus > b.x_minus


@given(x=st.floats(-0.99, 0.49).filter(lambda v: abs(v) > 1e-3))
def test_conjugate_point_is_an_involution(x):
    # the annulus spans (-1, 1/2): every such x has a conjugate
    F = CUBIC.F
    r = conjugate_point(F, x)
    assert np.sign(r) == -np.sign(x)
    assert conjugate_point(F, r) == pytest.approx(x, abs=1e-10)


def test_conjugate_point_snaps_to_critical_level():
    # F(0.5) equals the saddle level 1/6; the conjugate is the saddle abscissa itself
    assert conjugate_point(CUBIC.F, 0.5) == pytest.approx(-1.0, abs=1e-12)
