import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampwave import resolvent as rv
from dampwave.operators import DampingOperator, Grid, SelfAdjointOperator, build_divergence_form
from dampwave.fields import Constant

from conftest import random_spd


def test_scalar_resolvent_values():
    assert rv.quadratic_resolvent([[1.0]], [1.0], 1j)[0, 0] == pytest.approx(-1j)
    assert rv.quadratic_resolvent([[1.0]], [1.0], 1.0)[0, 0] == pytest.approx(1 / 3)


def test_singular_pencil_detected():
    with pytest.raises(rv.SingularPencil):
        rv.quadratic_resolvent([[1.0]], [2.0], -1.0)


def test_lambda_grid_rejects_origin():
    with pytest.raises(ValueError):
        rv.LambdaGrid([0.0, 1.0], "custom")
    g = rv.LambdaGrid.strip(0.2, 0.1, 10, 3, 6)
    assert g.points.size == 18 and np.all(g.points.imag != 0)
    s = rv.LambdaGrid.sector(0.1, 10, 4, 5)
    assert np.all(s.points.real > np.abs(s.points.imag))


def test_block_resolvent_inverts_shifted_generator(rng):
    a = random_spd(rng, 6)
    b = rng.uniform(0.5, 2, 6)
    lam = 0.3 + 0.7j
    blk, res = rv.block_resolvent(a, b, lam)
    g = np.block([[np.zeros((6, 6)), np.eye(6)], [-a, -np.diag(b)]])
    np.testing.assert_allclose(blk, np.linalg.inv(lam * np.eye(12) - g), atol=1e-10)
    assert res < 1e-12
    with pytest.raises(ValueError):
        rv.block_resolvent(a, b, 0)


def test_heat_splitting_identities(rng):
    a = random_spd(rng, 8)
    b = rng.uniform(0.5, 2, 8)
    for lam in (0.5 + 1j, -0.1 + 2j, 3.0):
        assert rv.verify_heat_splitting(a, b, lam).max() < 1e-10


def test_cauchy_integral(rng):
    a = random_spd(rng, 5, shift=1.0)
    assert rv.cauchy_integral_check(a, np.ones(5), 2 + 2j, 0.5) < 1e-10


@given(st.integers(0, 10_000), st.floats(-0.2, 2.0), st.floats(0.05, 5.0))
def test_strip_bound_holds(seed, re, im):
    rng = np.random.Generator(np.random.Philox(seed))
    a = random_spd(rng, 5, shift=0.0)
    b = rng.uniform(0.5, 2.0, 5)
    lam = complex(max(re, -0.2), im)
    s = rv.survey_lemma_bounds(a, b, rv.LambdaGrid([lam], "strip"), "strip_bound")
    assert s.min_margin >= 1 - 1e-9


@given(st.integers(0, 10_000), st.floats(0.01, 10.0), st.floats(-0.95, 0.95))
def test_sector_bound_holds(seed, r, frac):
    rng = np.random.Generator(np.random.Philox(seed))
    a = random_spd(rng, 5, shift=0.0)
    b = rng.uniform(0.5, 2.0, 5)
    lam = r * np.exp(1j * frac * np.pi / 4)
    s = rv.survey_lemma_bounds(a, b, rv.LambdaGrid([lam], "sector"), "sector_bound")
    assert s.min_margin >= 1 - 1e-9


def test_survey_region_validation():
    with pytest.raises(ValueError):
        rv.survey_lemma_bounds([[1.0]], [1.0], rv.LambdaGrid([-1 + 1j], "x"), "strip_bound")
    with pytest.raises(ValueError):
        rv.survey_lemma_bounds([[1.0]], [1.0], rv.LambdaGrid([1 + 2j], "x"), "sector_bound")
    with pytest.raises(ValueError):
        rv.survey_lemma_bounds([[1.0]], [1.0], rv.LambdaGrid([1 + 2j], "x"), "nope")


def test_big_o_survey_table_and_constant():
    with pytest.raises(ValueError, match="Dirichlet"):
        rv.survey_lemma_bounds(build_divergence_form(Grid(1, 8, 2.0), Constant(1.0)), np.ones(8), rv.LambdaGrid([1j], "x"), "energy_h0_h0")
    grid = Grid(1, 32, 10.0, "dirichlet")
    A = build_divergence_form(grid, Constant(1.0))
    s = rv.survey_lemma_bounds(A, DampingOperator(np.ones(32)), rv.LambdaGrid.strip(0.2, 0.1, 5, 3, 6), "energy_h0_h0")
    assert np.isfinite(s.constant) and not s.explicit
    assert list(s.table()) == ["lemma_id", "re_lambda", "im_lambda", "measured", "bound", "margin"]
    assert rv.refinement_drift(s, s) == 0


def test_lu_power_norm_matches_svd(rng):
    p = random_spd(rng, 30) + 1j * np.diag(rng.uniform(0, 1, 30))
    exact = np.linalg.norm(np.linalg.inv(p), 2)
    assert rv.lu_operator_norm(p, tol=1e-10) == pytest.approx(exact, rel=1e-5)


def test_cutoff_survey_empty_support_and_exponents():
    grid = Grid(1, 64, 20.0)
    P = build_divergence_form(grid, Constant(1.0))
    c = DampingOperator(np.ones(64))
    s = rv.cutoff_resolvent_survey(P, c, np.zeros(64), [0.1, 0.01], [0.0])
    assert np.all(s.sup_norm == 0) and s.fit is None
    chi = (np.abs(grid.axis()) <= 1).astype(float)
    s = rv.cutoff_resolvent_survey(P, c, chi, np.geomspace(1e-3, 1e-1, 8), [0.0, np.pi / 4])
    assert s.fit is not None and np.all(np.isfinite(rv.local_exponents(s)))
    with pytest.raises(ValueError):
        rv.cutoff_resolvent_survey(P, c, chi, [0.5, 1.0], [0.0])


def test_sparse_and_dense_column_solvers_agree():
    grid = Grid(1, 40, 20.0)
    P = build_divergence_form(grid, Constant(1.0))
    chi = (np.abs(grid.axis()) <= 2).astype(float)
    radii = np.geomspace(1e-2, 0.5, 8)
    a = rv.cutoff_resolvent_survey(P, np.ones(40), chi, radii, [0.3])
    b = rv.cutoff_resolvent_survey(P, np.ones(40), chi, radii, [0.3], dense_limit=10)
    np.testing.assert_allclose(a.sup_norm, b.sup_norm, rtol=1e-10)


def test_gcc_survey_positive_and_negative_damping():
    grid = Grid(1, 32, 10.0, "dirichlet")
    P = build_divergence_form(grid, Constant(1.0))
    rep = rv.gcc_resolvent_survey(P, np.ones(32), radii=[1e-2, 1e-1], taus=[0.5, 1.0])
    assert rep.passes and rep.spectral_abscissa < 0
    rep = rv.gcc_resolvent_survey(P, np.full(32, -0.5), radii=[1e-2, 1e-1], taus=[0.5, 1.0])
    assert not rep.passes
    assert any(f.get("kind") == "pencil root in Re > 0" for f in rep.failures)
