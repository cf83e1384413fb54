import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoscope.discretization import (SpectralGrid, build_operator, crossing_scan_discrete, dst_matrix, eig,
                                        first_eigenfunction_sweep, modal_resolvent_kernel,
                                        resolvent_kernel_dense, spectral_delta)
from thermoscope.errors import ComputationError, DomainError
from thermoscope.kernels import ProblemParams, perturbed_resolvent_kernel
from thermoscope.modes import phi_at


@pytest.mark.parametrize("m", [3, 5, 7])
def test_dst_orthogonality(m):
    g = SpectralGrid(m, 4.0)
    S = dst_matrix(g)
    assert np.allclose(g.weight * S.T @ S, np.eye(g.n), atol=1e-13)


def test_grid_validation():
    with pytest.raises(DomainError):
        SpectralGrid(1, 4.0)
    with pytest.raises(DomainError):
        build_operator(4, ProblemParams("inf", 1.0))


def test_unperturbed_operator_spectrum():
    op = build_operator(6, ProblemParams(4.0, 1.0, 0.0))
    assert np.array_equal(op.matrix, op.matrix.T)
    vals = np.array([p.value.real for p in eig(op)])
    assert np.allclose(vals, (np.arange(1, 64) * math.pi / 8) ** 2, rtol=1e-11)


@given(st.floats(-20, 80))
def test_transpose_has_same_spectrum(beta):
    op = build_operator(5, ProblemParams(4.0, 1.0, beta))
    a = np.array([p.value for p in eig(op)])
    b = np.array([p.value for p in eig(op.transpose())])
    assert np.allclose(a, b, rtol=1e-8, atol=1e-8)


def test_eig_rejects_nonfinite():
    with pytest.raises(DomainError):
        eig(np.array([[np.nan]]))


def test_eig_residual_check():
    with pytest.raises(ComputationError):
        eig(np.array([[1.0, 1.0], [0.0, 1.0]]), tol=1e-20)


def test_dense_and_modal_resolvent_agree():
    p = ProblemParams(4.0, 1.0, 5.0)
    m = 6
    op = build_operator(m, p)
    pts = op.grid.points
    j = 20
    dense = resolvent_kernel_dense(op, 1.0 + 0.5j, j, 0.5)
    modal = modal_resolvent_kernel(m, p, 1.0 + 0.5j, pts[j], 0.5)
    assert abs(dense - modal) < 1e-12


def test_modal_resolvent_converges_to_exact():
    p = ProblemParams(4.0, 1.0, 5.0)
    exact = perturbed_resolvent_kernel(p, 1.0, 0.5, 0.5)
    errs = [abs(modal_resolvent_kernel(m, p, 1.0, 0.5, 0.5) - exact) for m in (8, 12, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 2e-5


def test_spectral_delta_reproduces_modes():
    g = SpectralGrid(6, 4.0)
    d = spectral_delta(g, 1.0)
    S = dst_matrix(g)
    assert np.allclose(g.weight * S @ d, phi_at(1.0, 4.0, g.n), atol=1e-12)


def test_eigenfunction_sweep():
    betas = np.arange(0.0, 3.01, 0.5)
    sw = first_eigenfunction_sweep(7, 4.0, 1.0, betas)
    assert sw.sign_loss_beta is None
    adj = first_eigenfunction_sweep(7, 4.0, 1.0, betas, adjoint=True)
    assert adj.sign_loss_beta == pytest.approx(1.5)
    for v in sw.vectors:
        assert sw.grid.weight * np.sum(v * v) == pytest.approx(1.0)
    assert np.allclose(sw.values, adj.values, rtol=1e-9)


def test_crossing_scan_discrete_frozen():
    tr = crossing_scan_discrete(8, 4.0, 1.0, np.arange(68.0, 73.01, 0.5))
    assert tr.crossing_beta == pytest.approx(70.31050158, abs=1e-6)
    assert tr.crossing_point.s.imag == pytest.approx(11.1033109, abs=1e-5)
