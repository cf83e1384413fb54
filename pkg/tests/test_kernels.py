import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoscope.errors import BranchCutError, DomainError, PoleError
from thermoscope.kernels import (LINE, ProblemParams, SeriesControl, dirichlet_green, forcing,
                                 free_resolvent_kernel, heat_kernel, heat_kernel_eigen, heat_kernel_images,
                                 heat_kernel_theta, kernel_a, kernel_fourier, kernel_nome, parse_length,
                                 perturbed_resolvent_kernel, principal_sqrt, sensor_angle, theta1,
                                 transfer_function)
from thermoscope.modes import ModeVector

# oracle values from 40-digit mpmath sinh/cosh and jtheta evaluations
G_4_1_2P3J = complex(0.009001906789474660449593638072523280666572, -0.04853489212307908522292181118114003609105)
G_4_1_NEG_HALF = -0.6334406871238227179944810643513227876963
RESOLVENT_4_1_5 = 0.2605391152000923903309850444127697440622
HEAT = [((0.3, 1.0, 4.0), 0.2238321015890391990558608703912216237753),
        ((0.05, 0.0, 2.0), 1.261566261010079989108077009591324932753),
        ((5.0, -1.0, 3.0), 0.07329728473647842995310153824775235641283)]


def test_parse_length():
    assert parse_length("inf") is LINE
    assert parse_length(math.inf) is LINE
    assert parse_length("4") == 4.0
    with pytest.raises(DomainError):
        parse_length(-1)
    with pytest.raises(DomainError):
        ProblemParams(4, 5)


def test_transfer_function_oracle():
    p = ProblemParams(4, 1)
    assert abs(transfer_function(p, 2 + 3j) - G_4_1_2P3J) < 1e-15
    # real negative s is on the cut of sqrt but G is even in r; we refuse the cut explicitly
    with pytest.raises(BranchCutError):
        transfer_function(p, -0.5)
    assert abs(transfer_function(p, complex(-0.5, 1e-300)).real - G_4_1_NEG_HALF) < 1e-12


def test_transfer_function_pole():
    p = ProblemParams(4, 1)
    # cosh(r L) = 0 at r = i pi/(2L): s = -(pi/8)^2 sits on the cut, approach from above
    s = complex(-(math.pi / 8) ** 2, 1e-18)
    with pytest.raises(PoleError):
        transfer_function(p, s)


def test_line_transfer_function_closed_form():
    s = 1.3 + 0.4j
    r = np.sqrt(s)
    assert abs(transfer_function(ProblemParams("inf", 2.0), s) - np.exp(-2 * r) / (2 * r)) < 1e-15


@given(st.floats(0.1, 20), st.floats(-10, 10), st.floats(-3.9, 3.9), st.floats(-3.9, 3.9))
def test_dirichlet_green_symmetric(sr, si, x, y):
    s = complex(sr, si)
    assert abs(dirichlet_green(s, x, y, 4.0) - dirichlet_green(s, y, x, 4.0)) <= 1e-14 * (
        1 + abs(dirichlet_green(s, x, y, 4.0)))


@given(st.floats(-100, -1e-6))
def test_branch_cut_rejected(s):
    with pytest.raises(BranchCutError):
        principal_sqrt(s)
    with pytest.raises(BranchCutError):
        free_resolvent_kernel(s, 0.3)


def test_dirichlet_green_large_L_tends_to_free():
    s = 2.0 + 1.0j
    assert abs(dirichlet_green(s, 0.3, -0.2, 60.0) - free_resolvent_kernel(s, 0.5)) < 1e-14


def test_perturbed_resolvent_oracle():
    p = ProblemParams(4, 1, 5)
    assert abs(perturbed_resolvent_kernel(p, 1.0, 0.5, 0.5) - RESOLVENT_4_1_5) < 1e-14


def test_perturbed_resolvent_solves_rank_one_equation():
    # u = G_s(., y) - beta G_s(., 0) u(x0), so u(x0) satisfies the scalar equation
    p = ProblemParams(3, 0.7, 2.5)
    s, y = 0.8 + 0.3j, -0.4
    ux0 = perturbed_resolvent_kernel(p, s, p.x0, y)
    for x in (-2.0, 0.1, 1.5):
        lhs = perturbed_resolvent_kernel(p, s, x, y)
        rhs = dirichlet_green(s, x, y, 3.0) - p.beta * dirichlet_green(s, x, 0.0, 3.0) * ux0
        assert abs(lhs - rhs) < 1e-14


@pytest.mark.parametrize("args,expected", HEAT)
def test_heat_kernel_oracle(args, expected):
    t, x, L = args
    assert abs(heat_kernel(t, x, L) - expected) < 1e-13
    assert abs(heat_kernel_theta(t, x, L) - expected) < 1e-13
    assert abs(theta1(kernel_nome(t, L), sensor_angle(L, x)) / (2 * L) - expected) < 1e-13


@pytest.mark.parametrize("L", [2.0, 4.0, 8.0])
@pytest.mark.parametrize("factor", [0.25, 1.0, 4.0])
def test_heat_kernel_duals_agree(L, factor):
    ctl = SeriesControl()
    t = factor * ctl.crossover(L)
    for x in (0.0, 0.5, L / 2):
        e = heat_kernel_eigen(t, x, L, ctl)
        g = heat_kernel_images(t, x, L, ctl)
        assert abs(e.value - g.value) < 1e-12
        assert e.terms >= 8


def test_heat_kernel_derivative_matches_finite_difference():
    t, h = 0.7, 1e-5
    d = heat_kernel(t, 1.0, 4.0, derivative=True)
    fd = (heat_kernel(t + h, 1.0, 4.0) - heat_kernel(t - h, 1.0, 4.0)) / (2 * h)
    assert abs(d - fd) < 1e-8


def test_kernel_a_vanishes_at_zero_and_is_negative_heat_kernel():
    p = ProblemParams(4, 1)
    a = kernel_a(np.array([0.0, 1e-3, 0.5]), p)
    assert a[0] == 0.0
    assert abs(a[1]) < 1e-100
    assert abs(a[2] + heat_kernel(0.5, 1.0, 4.0)) < 1e-15


@pytest.mark.parametrize("omega", [0.3, 5.0, 40.0])
def test_kernel_fourier_matches_transfer_function(omega):
    p = ProblemParams(4, 1)
    fv = kernel_fourier(p, omega)
    assert abs(fv.a_hat + transfer_function(p, 1j * omega)) < 5 * fv.tail_bound + 1e-13
    assert fv.tail_bound < 1e-12
    # a is real, so its transform is conjugate symmetric
    assert abs(kernel_fourier(p, -omega).a_hat - np.conj(fv.a_hat)) < 1e-12


def test_forcing_matches_mode_sum():
    p = ProblemParams(4, 1)
    u0 = ModeVector.basis(3, 4.0, 16)
    mu3 = (3 * math.pi / 8) ** 2
    phi3 = math.sin(3 * math.pi * 5 / 8) / 2
    t = np.array([0.0, 0.4, 2.0])
    assert np.allclose(forcing(t, p, u0), phi3 * np.exp(-mu3 * t), atol=1e-15)
    assert np.allclose(forcing(t, p, u0, derivative=True), -mu3 * phi3 * np.exp(-mu3 * t), atol=1e-15)
