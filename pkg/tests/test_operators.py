import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampwave.fields import Constant, Sine
from dampwave.operators import (
    MAX_UNKNOWNS,
    DampingOperator,
    Grid,
    SelfAdjointOperator,
    apply_spectral_function,
    build_divergence_form,
    build_tilde_A,
    discrete_norm,
    psd_sqrt,
    spectral_decompose,
)

from conftest import random_spd


def test_periodic_laplacian_is_circulant():
    grid = Grid(1, 4, 4.0)
    P = build_divergence_form(grid, Constant(1.0))
    assert grid.h == 1.0
    expected = np.array([[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]], float)
    np.testing.assert_array_equal(P.matrix, expected)


def test_dirichlet_laplacian_spectrum():
    grid = Grid(1, 3, 4.0, "dirichlet")
    P = build_divergence_form(grid, Constant(1.0))
    np.testing.assert_array_equal(P.matrix, np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]], float))
    lam = spectral_decompose(P).eigenvalues
    np.testing.assert_allclose(lam, [2 - np.sqrt(2), 2, 2 + np.sqrt(2)], atol=1e-14)


def test_variable_coefficient_operator_psd_with_constant_kernel():
    grid = Grid(1, 64, 10.0)
    P = build_divergence_form(grid, Sine(1.0, 0.5, 10.0))
    assert np.array_equal(P.matrix, P.matrix.T)
    lam = P.spectrum.eigenvalues
    assert lam[0] > -1e-12 and lam[1] > 1e-6
    assert np.abs(P.matrix @ np.ones(64)).max() <= 1e-12 * np.abs(P.matrix).max()


@pytest.mark.parametrize("dim,n", [(1, 16), (2, 8), (3, 5)])
def test_row_sums_vanish_periodic(dim, n):
    grid = Grid(dim, n, 7.0)
    P = build_divergence_form(grid, Sine(1.0, 0.3, 7.0))
    assert np.abs(P.matrix.sum(axis=1)).max() <= 1e-12 * np.abs(P.matrix).max()


def test_diagonal_metric_field():
    grid = Grid(2, 6, 6.0)

    def g(x):
        return np.stack([np.ones(len(x)), 2 * np.ones(len(x))], axis=1)

    P = build_divergence_form(grid, g)
    assert np.allclose(P.matrix, P.matrix.T)
    assert np.abs(P.matrix.sum(1)).max() < 1e-12


def test_ellipticity_violation_names_point():
    grid = Grid(1, 8, 8.0)
    with pytest.raises(ValueError, match="elliptic.*at x="):
        build_divergence_form(grid, lambda x: np.where(x[:, 0] > 1, -1.0, 1.0))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(4, 4, 1.0)
    with pytest.raises(ValueError):
        Grid(1, 4, 1.0, "neumann")
    with pytest.raises(ValueError, match="dense cap"):
        Grid(2, int(np.sqrt(MAX_UNKNOWNS)) + 1, 1.0)


def test_grid_points_dirichlet():
    g = Grid(1, 3, 4.0, "dirichlet")
    np.testing.assert_allclose(g.axis(), [-1, 0, 1])


def test_spectral_decompose_diag():
    sp = spectral_decompose(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(sp.eigenvalues, [1, 2, 3])


def test_spectral_reconstruction(rng):
    m = rng.standard_normal((50, 50))
    m = m + m.T
    sp = spectral_decompose(m)
    q, lam = sp.eigenvectors, sp.eigenvalues
    assert np.abs(q * lam @ q.T - m).max() <= 1e-10 * np.abs(m).max()


def test_symmetry_required():
    with pytest.raises(ValueError):
        SelfAdjointOperator(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_spectral_function_examples():
    grid = Grid(1, 32, 5.0, "dirichlet")
    P = build_divergence_form(grid, Sine(1.0, 0.4, 5.0))
    np.testing.assert_allclose(apply_spectral_function(P, lambda x: x), P.matrix, atol=1e-10 * np.abs(P.matrix).max())
    r = apply_spectral_function(P, psd_sqrt)
    assert np.abs(r @ r - P.matrix).max() <= 1e-8 * np.abs(P.matrix).max()
    np.testing.assert_allclose(apply_spectral_function(np.diag([0.0, 1.0]), lambda x: np.exp(-x)), np.diag([1, np.exp(-1)]), atol=1e-15)


def test_spectral_function_nonfinite_names_eigenvalue():
    with pytest.raises(ValueError, match="eigenvalue"):
        apply_spectral_function(np.diag([0.0, 1.0]), lambda x: 1 / x)


def test_spectral_homomorphism(rng):
    a = random_spd(rng, 30)
    r = apply_spectral_function(a, np.sqrt)
    np.testing.assert_allclose(r @ r, apply_spectral_function(a, lambda x: x), rtol=0, atol=1e-9 * np.abs(a).max())


def test_spectrum_computed_once_across_threads(rng):
    op = SelfAdjointOperator(random_spd(rng, 40))
    out = []
    threads = [threading.Thread(target=lambda: out.append(op.spectrum)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(s is out[0] for s in out)


def test_operator_immutable(rng):
    op = SelfAdjointOperator(random_spd(rng, 4))
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5.0


def test_tilde_A_examples(rng):
    np.testing.assert_allclose(build_tilde_A(np.array([[4.0]]), DampingOperator([2.0])).matrix, [[2.0]])
    a = random_spd(rng, 10)
    np.testing.assert_array_equal(build_tilde_A(a, DampingOperator(np.ones(10))).matrix, a)


def test_tilde_A_similar_to_inverse_B_times_A():
    grid = Grid(1, 64, 10.0)
    P = build_divergence_form(grid, Constant(1.0))
    b = Sine(1.0, 0.5, 10.0)(grid.points())
    At = build_tilde_A(P, DampingOperator(b))
    lam = At.spectrum.eigenvalues
    other = np.sort(np.linalg.eigvals(P.matrix / b[:, None]).real)
    assert lam.min() > -1e-12
    np.testing.assert_allclose(lam, other, atol=1e-10)


def test_tilde_A_needs_positive_damping():
    with pytest.raises(ValueError):
        build_tilde_A(np.eye(2), DampingOperator([1.0, 0.0]))


def test_damping_operator_errors():
    with pytest.raises(ValueError, match="index 1"):
        DampingOperator([1.0, -0.5])
    assert DampingOperator([1.0, -0.5], indefinite=True).diagonal[1] == -0.5
    with pytest.raises(ValueError):
        DampingOperator([0.0, 1.0]).power(-0.5)


def test_norm_examples():
    grid = Grid(1, 16, 2.0)
    one = np.ones(16)
    assert discrete_norm(one, "L1", grid) == pytest.approx(2.0)
    assert discrete_norm(one, "L2", grid) == pytest.approx(np.sqrt(2.0))
    g2 = Grid(1, 10, 1.0)
    e = np.zeros(10)
    e[3] = 1.0
    assert discrete_norm(e, "L1", g2) == pytest.approx(0.1)
    assert discrete_norm(e, "L2", g2) == pytest.approx(np.sqrt(0.1))
    P = build_divergence_form(grid, Sine(1.0, 0.5, 2.0))
    assert discrete_norm(one, "H1", grid, P) < 1e-7


def test_norm_length_mismatch():
    with pytest.raises(ValueError):
        discrete_norm(np.ones(3), "L2", Grid(1, 4, 1.0))


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=8, max_size=8))
def test_interpolation_inequality(vals):
    grid = Grid(1, 8, 3.0)
    v = np.array(vals)
    l2 = discrete_norm(v, "L2", grid)
    assert l2 <= np.sqrt(discrete_norm(v, "L1", grid) * discrete_norm(v, "Linf", grid)) * (1 + 1e-12) + 1e-300
