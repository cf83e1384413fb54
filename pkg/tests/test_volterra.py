import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoscope.errors import DomainError
from thermoscope.kernels import ProblemParams
from thermoscope.modes import ModeVector
from thermoscope.popov import reference_q
from thermoscope.volterra import (Nonlinearity, VieProblem, lyapunov, picard_verify, sector_check, solve_vie,
                                  time_grid, trap_convolution)


def _problem(beta=5.0, f=None):
    return VieProblem(ProblemParams(4.0, 1.0, beta), ModeVector.basis(1, 4.0, 128),
                      f or Nonlinearity.tanh())


def test_nonlinearity_validation():
    with pytest.raises(DomainError):
        Nonlinearity(np.sin, np.cos, 0.5, 1.0, name="too-small-bound")
    with pytest.raises(DomainError):
        Nonlinearity(lambda w: 2 * np.asarray(w), lambda w: 2.0, 10.0, 2.0, name="slope-2")


@given(st.floats(-30, 30))
def test_F_beta_matches_quadrature(z):
    f = Nonlinearity.tanh()
    custom = Nonlinearity(np.tanh, f.f_prime, 1.0, 1.0)  # no antiderivative: quad path
    assert float(f.F_beta(z, 2.5)) == pytest.approx(float(custom.F_beta(z, 2.5)), abs=1e-9)
    assert f.F_beta(z, 2.5) >= 0


@given(st.floats(0.1, 100.0), st.lists(st.floats(1e-3, 50.0), min_size=1, max_size=20))
def test_sector_condition_for_tanh(beta, ws):
    w = np.array(ws + [-v for v in ws])
    assert sector_check(Nonlinearity.tanh(), beta, w)


def test_sector_grid_excludes_zero():
    with pytest.raises(DomainError):
        sector_check(Nonlinearity.tanh(), 1.0, [0.0, 1.0])


def test_time_grid_validation():
    assert time_grid(1.0, 0.25).tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(DomainError):
        time_grid(1.0, 0.3)


def test_trap_convolution_exact_for_linear():
    # int_0^t (t - s) * 1 ds = t^2/2 is integrated exactly by the trapezoidal rule
    dt = 0.01
    t = np.arange(101) * dt
    c = trap_convolution(t, np.ones_like(t), dt)
    assert np.allclose(c, t**2 / 2, atol=1e-14)


def test_linear_vie_beta_zero_is_forcing():
    prob = _problem(beta=0.0)
    tr = solve_vie(prob, 2.0, 1e-3)
    assert np.allclose(tr.y, prob.g(tr.t), atol=1e-15)


def test_second_order_convergence():
    prob = _problem()
    ref = solve_vie(prob, 4.0, 2.5e-4).y[::8]
    e1 = np.max(np.abs(solve_vie(prob, 4.0, 2e-3).y - ref))
    e2 = np.max(np.abs(solve_vie(prob, 4.0, 1e-3).y[::2] - ref[::1]))
    assert 3.0 < e1 / e2 < 5.0


def test_picard_converges_to_solution():
    rep = picard_verify(_problem(), 1.0, 30)
    assert rep.deviation < 1e-12
    assert rep.gaps[-1] < rep.gaps[0]


def test_lyapunov_identity_and_signs():
    prob = _problem()
    tr = solve_vie(prob, 20.0, 1e-3)
    rep = lyapunov(prob, tr, reference_q(1.0))
    assert rep.relative_residual < 1e-6
    assert np.min(rep.W1) >= 0 and np.min(rep.W2) >= 0


def test_lyapunov_residual_second_order():
    prob = _problem()
    r = [lyapunov(prob, tr, reference_q(1.0)).residual
         for tr in (solve_vie(prob, 5.0, 2e-3), solve_vie(prob, 5.0, 1e-3))]
    assert 3.0 < r[0] / r[1] < 5.0


def test_clipped_identity_is_bounded():
    f = Nonlinearity.clipped_identity()
    assert f(5.0) == 1.0 and f(-5.0) == -1.0 and f(0.3) == pytest.approx(0.3)
    assert float(f.F_beta(2.0, 1.0)) == pytest.approx(1.5)
