import math

import numpy as np
import pytest

from thermoscope.errors import DomainError
from thermoscope.kernels import ProblemParams
from thermoscope.modes import ModeVector, phi_at
from thermoscope.pde_sim import (CycleCriteria, classify, eventual_positivity_probe, simulate, trace_consistency,
                                 upward_crossings)
from thermoscope.volterra import Nonlinearity

L = 4.0
U0 = ModeVector(0.05 * ModeVector.basis(1, L, 128).coeffs, L)


def test_upward_crossings_of_sine():
    t = np.linspace(0, 10, 10001)
    tc = upward_crossings(t, np.sin(2 * np.pi * t - 0.3))
    assert np.allclose(np.diff(tc), 1.0, atol=1e-6)


def test_classify_synthetic_signals():
    t = np.linspace(0, 100, 100001)
    cls, period, amp, _ = classify(t, 0.3 * np.sin(2 * np.pi * t / 0.7))
    assert cls == "limit_cycle" and period == pytest.approx(0.7, rel=1e-4) and amp == pytest.approx(0.3, rel=1e-3)
    cls, *_ = classify(t, np.exp(-t) * np.sin(3 * t))
    assert cls == "decayed"
    cls, *_ = classify(t, np.exp(-0.02 * t) * np.sin(9 * t))
    assert cls == "undecided"


def test_beta_zero_is_pure_decay():
    res = simulate(U0, ProblemParams(L, 1.0, 0.0), 2.0, 1e-3)
    mu1 = (math.pi / 8) ** 2
    expected = 0.05 * phi_at(1.0, L, 1)[0] * np.exp(-mu1 * res.t)
    assert np.allclose(res.y, expected, atol=1e-15)


def test_python_fallback_matches_compiled_loop():
    p = ProblemParams(L, 1.0, 30.0)
    tanh_custom = Nonlinearity(np.tanh, lambda w: 1 / np.cosh(w) ** 2, 1.0, 1.0, name="tanh-python")
    a = simulate(U0, p, 2.0, 1e-3, 64)
    b = simulate(U0, p, 2.0, 1e-3, 64, f=tanh_custom)
    assert np.allclose(a.y, b.y, atol=1e-15)


def test_simulation_needs_finite_L():
    with pytest.raises(DomainError):
        simulate(U0, ProblemParams("inf", 1.0, 1.0), 1.0)


def test_mode_tail_shrinks_on_doubling():
    p = ProblemParams(L, 1.0, 75.0)
    u0 = U0.resized(256)
    y = {n: simulate(u0, p, 10.0, 1e-3, n).y for n in (64, 128, 256)}
    d1 = np.max(np.abs(y[64] - y[128]))
    d2 = np.max(np.abs(y[128] - y[256]))
    assert d2 < 2e-3 * np.max(np.abs(y[256]))
    assert d1 / d2 > 4.0


def test_trace_consistency_improves_with_dt():
    p = ProblemParams(L, 1.0, 5.0)
    u0 = ModeVector.basis(1, L, 128)
    g1 = trace_consistency(u0, p, 5.0, 2e-3).relative_gap
    g2 = trace_consistency(u0, p, 5.0, 1e-3).relative_gap
    assert g2 < g1 and g2 < 1e-3
    assert 1.5 < g1 / g2 < 2.5  # first order in dt


def test_limit_cycle_frequency_near_crossing():
    res = simulate(U0, ProblemParams(L, 1.0, 75.0), 200.0, 1e-3)
    assert res.classification == "limit_cycle"
    assert 2 * math.pi / res.period == pytest.approx(11.1033118, rel=0.03)


def test_eventual_positivity():
    p = ProblemParams(L, 1.0, 0.0)
    u0 = ModeVector.basis(1, L, 64)
    assert eventual_positivity_probe(p, u0, 5.0, n_modes=64) == 0.0
    assert eventual_positivity_probe(p.with_beta(-2.0), u0, 20.0, n_modes=64) is not None
    t_on = eventual_positivity_probe(p.with_beta(0.5), u0, 60.0, n_modes=64)
    assert t_on is not None
