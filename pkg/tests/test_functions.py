import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodfn.errors import ConfigError, DomainError
from periodfn.functions import (CoshWell, CosineWell, Polynomial, PowerWall,
                                RelativisticKinetic, TranslatedSum, function_from_spec)

FAMILIES = [
    (Polynomial([0, 0, 0.5, 1 / 3, -0.25]), (-1.5, 1.5)),
    (CosineWell(1.3, 0.7), (-3.0, 3.0)),
    (CoshWell(0.8, 1.2), (-2.0, 2.0)),
    (RelativisticKinetic(2.0, 0.5), (-5.0, 5.0)),
    (PowerWall(1.5, 1.0, 0.0, 1), (0.2, 4.0)),
    (PowerWall(0.7, 2.5, 3.0, -1), (-1.0, 2.8)),
    (TranslatedSum([PowerWall(1, 1, 0, 1), PowerWall(2, 1, 3, -1)], shift=1.0), (-0.8, 1.8)),
]


@pytest.mark.parametrize("f,box", FAMILIES, ids=lambda v: getattr(v, "family", ""))
@given(t=st.floats(0.05, 0.95))
def test_analytic_derivatives_match_central_differences(f, box, t):
    x = box[0] + t * (box[1] - box[0])
    reach = min(x - f.domain[0], f.domain[1] - x, 1.0)  # distance to a singular edge
    h = 1e-3 * reach
    for nu in (1, 2, 3):
        g = lambda u: f(u, nu - 1)
        fd = (g(x - 2 * h) - 8 * g(x - h) + 8 * g(x + h) - g(x + 2 * h)) / (12 * h)
        exact = f(x, nu)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_cosine_well_small_values_keep_relative_precision():
    x = 1e-9
    assert CosineWell()(x) == pytest.approx(x * x / 2, rel=1e-15)
    assert CoshWell()(x) == pytest.approx(x * x / 2, rel=1e-15)
    assert RelativisticKinetic()(x) == pytest.approx(x * x / 2, rel=1e-15)


def test_polynomial_increment_is_exact_taylor_shift():
    p = Polynomial([0, 0, 0.5, 1 / 3, 0.25])
    assert p.increment(0.3, -0.1) == pytest.approx(p(0.2) - p(0.3), rel=1e-14)


def test_power_wall_increment_matches_difference():
    w = PowerWall(1.0, 2.0, 0.0, 1)
    assert w.increment(1.0, 1e-3) == pytest.approx(w(1.001) - w(1.0), rel=1e-9)


def test_domain_enforced_for_walls():
    w = PowerWall(1.0, 1.0, 0.0, 1)
    with pytest.raises(DomainError):
        w(-0.1)
    assert w.limit(0.0) == math.inf


def test_translated_sum_is_zero_at_origin_and_shifted_domain():
    f = TranslatedSum([PowerWall(1, 1, 0, 1), PowerWall(2, 1, 3, -1)], shift=1.0)
    assert f(0.0) == 0.0
    assert f.domain == (-1.0, 2.0)


def test_even_flag_inferred_for_polynomials():
    assert Polynomial([0, 0, 0.5, 0, 1]).even
    assert not Polynomial([0, 0, 0.5, 1]).even


@pytest.mark.parametrize("f", [f for f, _ in FAMILIES], ids=lambda f: f.family)
def test_spec_round_trip(f):
    g = function_from_spec(f.to_dict())
    xs = np.linspace(0.1, 0.5, 5) * (1 if f.domain[1] > 0.5 else -1)
    xs = xs[f.contains(xs)]
    np.testing.assert_allclose(g(xs), f(xs), rtol=1e-15)


@pytest.mark.parametrize("bad", [{}, {"family": "nope"}, {"family": "power-law", "params": {}},
                                 {"family": "log-potential", "params": {"weight": 1},
                                  "domain": [-1, 1]}])
def test_bad_specs_raise_config_error(bad):
    with pytest.raises(ConfigError):
        function_from_spec(bad)
