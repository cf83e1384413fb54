import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoscope.errors import DomainError
from thermoscope.kernels import ProblemParams, transfer_function
from thermoscope.spectrum import (characteristic_interval, eigenvalues_within, characteristic_line, crossing_params,
                                  interval_eigenvalues, k_function, line_pair_point, merge_beta, newton,
                                  onset_gain, ray_angle, ray_search, real_spectrum_line,
                                  trace_pair, z_functions, z_prefactor)


@pytest.mark.parametrize("L,x0", [(4.0, 1.0), (5.0, 2.0), (3.0, 0.4)])
@pytest.mark.parametrize("alpha", [0.3, 0.9, 1.7, 2.6])
def test_z_factorization_of_im_g(L, x0, alpha):
    p = ProblemParams(L, x0)
    zL, _ = z_functions(alpha, p)
    im = transfer_function(p, 2j * alpha**2).imag
    assert z_prefactor(alpha, p) > 0
    assert abs(im - z_prefactor(alpha, p) * zL) < 1e-14


def test_z_inf_sign_matches_line_transfer_function():
    p = ProblemParams("inf", 1.0)
    for alpha in (0.5, 1.5, 2.5, 3.0):
        _, zi = z_functions(alpha, p)
        im = transfer_function(p, 2j * alpha**2).imag
        assert np.sign(zi) == np.sign(im)


@given(st.floats(0.01, 1e3), st.floats(1.001, 2.0))
def test_onset_gain_decreasing(m, factor):
    assert onset_gain(m * factor) < onset_gain(m)


def test_onset_gain_limits():
    assert abs(onset_gain(1e6) - math.pi) < 1e-4
    assert ray_angle(math.inf) == math.pi / 2


def test_ray_search_onset():
    m = 2.0
    b = onset_gain(m)
    assert ray_search(m, 0.99 * b).gamma is None
    r = ray_search(m, 1.01 * b)
    assert r.gamma is not None and r.gamma0 <= r.gamma < math.pi
    # on the ray the imaginary part of the characteristic function vanishes at gamma
    lam = complex(r.gamma / m, r.gamma)
    assert abs(characteristic_line(lam, 1.01 * b, 1.0).imag) < 1e-12
    # at the onset gain gamma0 itself is a full root
    lam0 = complex(r.gamma0 / m, r.gamma0)
    assert abs(characteristic_line(lam0, b, 1.0)) < 1e-12


@given(st.floats(3.2, 500.0), st.floats(0.3, 3.0))
def test_line_pair_point_is_root(beta, x0):
    if beta * x0 <= math.pi + 1e-3:
        return
    pt = line_pair_point(beta, x0)
    assert pt.residual < 1e-10 * (1 + beta)
    assert pt.lam.real > 0 and pt.lam.imag > 0


def test_line_pair_requires_gain_above_pi():
    with pytest.raises(DomainError):
        line_pair_point(3.0, 1.0)


def test_real_spectrum_line():
    roots = real_spectrum_line(1.0, 3)
    for r in roots:
        assert abs(characteristic_line(1j * math.sqrt(-r.s), r.beta, 1.0)) < 1e-12
    plus = [r for r in roots if r.family == "+"]
    assert plus[0].beta == pytest.approx(math.pi) and plus[1].beta == pytest.approx(5 * math.pi)


def test_interval_characteristic_consistent_with_transfer():
    p = ProblemParams(4.0, 1.0, 3.0)
    lam = 0.8 + 0.6j
    _, _, _, K = characteristic_interval(lam, p)
    assert abs(K - (1 + 3.0 * transfer_function(p, lam * lam))) < 1e-13
    assert abs(k_function(lam, p) - K) < 1e-13
    # lam = 0 limit of H_L
    _, H0, _, _ = characteristic_interval(0.0, p)
    assert abs(H0 - (2 + 3.0 * 3.0)) < 1e-14


def test_interval_eigenvalues_solve_characteristic_equation():
    p = ProblemParams(4.0, 1.0, 10.0)
    mus = interval_eigenvalues(p, 6)
    assert mus.size == 6
    for mu in mus:
        lam = np.sqrt(mu)
        sin_f, H, _, _ = characteristic_interval(lam, p)
        assert abs(sin_f * H) < 1e-9 * (1 + abs(mu))


def test_interval_eigenvalues_unperturbed():
    mus = interval_eigenvalues(ProblemParams(4.0, 1.0, 0.0), 4)
    assert np.allclose(mus, (np.arange(1, 5) * math.pi / 8) ** 2, atol=1e-12)


def test_newton_finds_simple_root():
    z, res, ok = newton(lambda z: z * z + 1, 0.3 + 0.8j)
    assert ok and abs(z - 1j) < 1e-12


def test_crossing_params_line_closed_form():
    w1, b1 = crossing_params(ProblemParams("inf", 1.0))
    assert abs(w1 - 9 * math.pi**2 / 8) < 1e-9
    assert abs(b1 - 3 * math.pi / math.sqrt(2) * math.exp(3 * math.pi / 4)) < 1e-8


def test_crossing_params_interval_frozen():
    w1, b1 = crossing_params(ProblemParams(4.0, 1.0))
    assert w1 == pytest.approx(11.1033118, abs=1e-6)
    assert b1 == pytest.approx(70.3135210, abs=1e-6)


def test_trace_pair_crossing_matches_transfer():
    p = ProblemParams(4.0, 1.0)
    tr = trace_pair(np.arange(60.0, 75.0, 1.0), p)
    _, b1 = crossing_params(p)
    assert tr.crossing_beta == pytest.approx(b1, rel=1e-7)
    assert abs(tr.crossing_point.s.real) < 1e-8
    res = np.array([pt.residual for pt in tr.points])
    assert np.all(res < 1e-9)


def test_trace_pair_rejects_unsorted_grid():
    with pytest.raises(DomainError):
        trace_pair([5.0, 4.0], ProblemParams("inf", 1.0))


def _complex_count(L, beta):
    m = eigenvalues_within(ProblemParams(L, 1.0, beta), 2.0)
    return int(np.count_nonzero(np.abs(m.imag) > 1e-9))


@pytest.mark.parametrize("L,expected", [(4.0, 3.22650435), (8.0, 3.18199667), (16.0, 3.16132117)])
def test_merge_beta_is_first_complex_pair(L, expected):
    b = merge_beta(L, 1.0)
    assert b == pytest.approx(expected, abs=1e-7)
    assert _complex_count(L, b - 1e-3) == 0
    assert _complex_count(L, b + 1e-3) == 2


def test_merge_beta_decreases_to_line_onset():
    bs = [merge_beta(L, 1.0) for L in (2.0, 4.0, 8.0, 16.0, 32.0)]
    assert all(a > c for a, c in zip(bs, bs[1:]))
    assert math.pi < bs[-1] < math.pi + 0.02
