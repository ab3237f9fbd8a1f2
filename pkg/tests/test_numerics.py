import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodfn.numerics import (RootNotBracketed, brent_minimize, expand_bracket, gauss_legendre,
                               golden_section, safe_newton)
from periodfn.sturm import count_roots, real_roots


def test_safe_newton_polishes_to_rounding():
    r = safe_newton(lambda x: x * x - 2, lambda x: 2 * x, 0.0, 2.0)
    assert abs(r - math.sqrt(2)) <= 4e-16


def test_safe_newton_requires_bracket():
    with pytest.raises(RootNotBracketed):
        safe_newton(lambda x: x * x + 1, lambda x: 2 * x, 0.0, 2.0)


def test_expand_bracket_contains_target():
    lo, hi = expand_bracket(lambda x: x**3, 50.0, 0.1)
    assert lo**3 < 50.0 <= hi**3


def test_minimizers_agree():
    f = lambda x: (x - 1.234) ** 2 + 3
    assert brent_minimize(f, 0, 5)[0] == pytest.approx(1.234, abs=1e-8)
    # the argmin of a smooth minimum is only determined to about sqrt(eps)
    assert golden_section(f, 0, 5, xtol=1e-10)[0] == pytest.approx(1.234, abs=1e-7)


def test_gauss_legendre_integrates_degree_31_exactly():
    x, w = gauss_legendre(16)
    assert np.sum(w * x**30) == pytest.approx(2 / 31, rel=1e-14)


def test_sturm_counts_and_locates():
    # (x - 1)(x + 2)(x - 0.5) = x^3 + 0.5 x^2 - 2.5 x + 1
    coeffs = [1.0, -2.5, 0.5, 1.0]
    assert count_roots(coeffs) == 3
    np.testing.assert_allclose(real_roots(coeffs), [-2.0, 0.5, 1.0], atol=1e-12)
    assert count_roots(coeffs, 0.0, 0.9) == 1


def test_sturm_excludes_open_endpoint():
    assert real_roots([0, 1, 0, -1], 0, math.inf) == [pytest.approx(1.0, abs=1e-15)]


def test_sturm_double_root():
    roots = real_roots([1.0, -2.0, 1.0])  # (x - 1)^2
    assert len(roots) == 1 and roots[0] == pytest.approx(1.0, abs=1e-7)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4, unique=True))
def test_sturm_recovers_separated_roots(rs):
    rs = sorted(rs)
    if any(b - a < 1e-3 for a, b in zip(rs, rs[1:])):
        return
    coeffs = np.polynomial.polynomial.polyfromroots(rs)
    found = real_roots(coeffs)
    assert len(found) == len(rs)
    np.testing.assert_allclose(found, rs, atol=1e-8)
