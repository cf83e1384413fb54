import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoscope.constants import B_PI, C_PI, D_PI, HOPF_PRODUCT
from thermoscope.errors import DomainError
from thermoscope.kernels import ProblemParams, transfer_function
from thermoscope.popov import (PopovLine, beta_hat, critical_inequality, critical_params_delta,
                               critical_params_interval, critical_params_line, critical_points, curve_arrays,
                               delta_terms, line_curve, popov_set_line, t_function, t_pole,
                               transform_inequality, verify_criterion)

# delta = 0.5 oracle: mpmath findroot on Im G(i w) and mp.diff tangent slope (40 digits)
DELTA_HALF = (44.06921723383003504334, 138.7657129614416887925, 0.033375393133216269667)


def test_constants():
    assert B_PI == pytest.approx(9 * math.pi**2 / 8, abs=0)
    assert C_PI == pytest.approx(3 * math.pi / math.sqrt(2) * math.exp(3 * math.pi / 4), rel=1e-15)
    assert HOPF_PRODUCT == pytest.approx(B_PI / D_PI, rel=1e-15)


def test_line_curve_matches_transfer_function():
    w = np.geomspace(0.01, 1e3, 50)
    x, y = line_curve(1.3, w)
    xg, yg = curve_arrays(ProblemParams("inf", 1.3), w)
    assert np.allclose(x, xg, atol=1e-15) and np.allclose(y, yg, atol=1e-14)


def test_popov_set_line_alternates():
    pts = popov_set_line(1.0, 4)
    for p in pts:
        assert abs(transfer_function(ProblemParams("inf", 1.0), 1j * p.omega).imag) < 1e-14
    assert [p.family for p in pts] == ["+", "-", "+", "-"]
    assert pts[0].omega == pytest.approx(B_PI)


@given(st.floats(0.2, 5.0))
def test_line_critical_scaling(x0):
    c = critical_params_line(x0)
    assert c.product == pytest.approx(HOPF_PRODUCT, rel=1e-13)
    assert c.beta1 * x0 == pytest.approx(C_PI, rel=1e-14)


@given(st.floats(0.1, 10.0), st.floats(1.0, 200.0), st.floats(-1, 1), st.floats(-1, 1))
def test_F_monotone_in_beta(q, beta, x, y):
    # larger gain raises the line's intercept, so F increases with beta
    assert PopovLine(q, beta * 1.5).F(x, y) >= PopovLine(q, beta).F(x, y)


def test_popov_line_rejects_nonpositive():
    with pytest.raises(DomainError):
        PopovLine(0.0, 1.0)


def test_delta_terms_reproduce_transfer_function():
    d = 0.3
    w = np.array([0.5, 5.0, 20.0, 50.0])
    t = delta_terms(d, w)
    g = transfer_function(ProblemParams(1.0, 1.0 - d), 1j * w)
    assert np.allclose(t.dot() / t.D, g.real, rtol=1e-12, atol=1e-15)
    assert np.allclose(t.det() / t.D, g.imag, rtol=1e-12, atol=1e-15)


def test_critical_params_delta_oracle():
    c = critical_params_delta(0.5)
    assert c.omega1 == pytest.approx(DELTA_HALF[0], rel=1e-12)
    assert c.beta1 == pytest.approx(DELTA_HALF[1], rel=1e-12)
    assert c.q == pytest.approx(DELTA_HALF[2], rel=1e-8)


def test_interval_rescaling():
    # L = 2, x0 = 1 is the delta = 0.5 family stretched by 2
    c = critical_params_interval(ProblemParams(2.0, 1.0))
    assert c.omega1 == pytest.approx(DELTA_HALF[0] / 4, rel=1e-12)
    assert c.beta1 == pytest.approx(DELTA_HALF[1] / 2, rel=1e-12)
    assert c.product == pytest.approx(DELTA_HALF[0] * DELTA_HALF[2], rel=1e-8)


@pytest.mark.parametrize("delta", [0.1, 0.5, 0.9])
def test_interval_tangent_criterion(delta):
    p = ProblemParams(1.0, 1.0 - delta)
    c = critical_params_interval(p)
    rep = verify_criterion(p, PopovLine(c.q, c.beta1))
    assert rep.tail_ok
    assert rep.max_F < 1e-9
    assert rep.argmax_omega == pytest.approx(c.omega1, rel=1e-4)
    # above the critical gain the line cuts the curve
    assert not verify_criterion(p, PopovLine(c.q, 1.01 * c.beta1)).satisfied


def test_transform_inequality_matches_curve():
    p = ProblemParams(4.0, 1.0)
    c = critical_params_interval(p)
    w = 7.0
    x, y = curve_arrays(p, w)
    lhs = transform_inequality(p, c.q, c.beta1, w)
    assert lhs == pytest.approx(c.q * PopovLine(c.q, c.beta1).F(x, y), abs=1e-11)


def test_beta_hat_frozen():
    bh = beta_hat(ProblemParams(4.0, 1.0))
    assert bh.beta_hat == pytest.approx(70.313521016, abs=2e-8)
    assert bh.q == pytest.approx(1.0 / D_PI)


def test_t_pole_and_function():
    ys = t_pole()
    assert ys == pytest.approx(1.4399093678699169, abs=1e-14)
    with pytest.raises(DomainError):
        t_function(ys)


def test_critical_inequality_at_critical_points():
    ys = critical_points(40.0)
    assert ys[0] == pytest.approx(3 * math.pi / 4, abs=1e-9)
    assert len(ys) >= 12
    vals = critical_inequality(ys)
    assert abs(vals[0]) < 1e-9
    assert np.all(vals[1:] > 0)


def test_critical_inequality_not_global():
    # away from critical points the expression may be negative; it is only a statement at them
    y = np.linspace(t_pole() + 1e-3, 4.0, 20001)
    v = critical_inequality(y)
    assert v.min() < -0.05
    assert y[np.argmin(v)] == pytest.approx(2.247, abs=5e-3)
