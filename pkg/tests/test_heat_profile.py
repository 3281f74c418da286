import numpy as np
import pytest

from dampwave import heat_profile as hp
from dampwave.damped_wave import BlockGenerator, CauchyData, Trajectory, propagate
from dampwave.fields import Constant, GaussianBump, Sine
from dampwave.operators import DampingOperator, Grid, SelfAdjointOperator, build_divergence_form, build_tilde_A
from dampwave.rates import TimeSeries, fit_loglog



def scalar(a, b):
    return SelfAdjointOperator(np.array([[float(a)]])), DampingOperator([float(b)])


def test_scalar_profiles():
    A, B = scalar(1, 2)
    p = hp.profile_v(A, B, CauchyData([1.0], [0.0]), [1.0])
    assert p.states[0, 0] == pytest.approx(np.exp(-0.5), abs=1e-14)
    p = hp.profile_v(A, B, CauchyData([0.0], [1.0]), [1.0, 2.0])
    np.testing.assert_allclose(p.states[:, 0], np.exp(-np.array([1.0, 2.0]) / 2) / 2)


def test_identity_damping_profile(rng):
    grid = Grid(1, 32, 8.0)
    A = build_divergence_form(grid, Sine(1, 0.4, 8.0))
    u0, u1 = rng.standard_normal(32), rng.standard_normal(32)
    p = hp.profile_v(A, DampingOperator(np.ones(32)), CauchyData(u0, u1), [0.7])
    lam, q = A.spectrum.eigenvalues, A.spectrum.eigenvectors
    np.testing.assert_allclose(p.states[0], q @ (np.exp(-0.7 * lam) * (q.T @ (u0 + u1))), atol=1e-12)


def test_profile_solves_heat_equation():
    grid = Grid(1, 64, 16.0)
    A = build_divergence_form(grid, Sine(1, 0.4, 16.0))
    u0 = np.exp(-grid.axis() ** 2)
    h = 1e-3
    t = np.array([2 - h, 2, 2 + h])
    p = hp.profile_v(A, DampingOperator(np.ones(64)), CauchyData(u0, np.zeros(64)), t).states
    resid = (p[2] - p[0]) / (2 * h) + A.matrix @ p[1]
    assert np.abs(resid).max() <= 1e-6


def test_profile_rejects_zero_damping():
    A, _ = scalar(1, 1)
    with pytest.raises(ValueError):
        hp.profile_v(A, DampingOperator([0.0]), CauchyData([1.0], [0.0]), [1.0])


def test_profile_difference_scalar():
    A, B = scalar(1, 2)
    data = CauchyData([1.0], [0.0])
    traj = propagate(BlockGenerator(A, B), data, [1.0], dt=0.01)
    p = hp.profile_v(A, B, data, traj.times)
    d = hp.profile_difference(traj, p, Grid(1, 2, 2.0))
    assert d.values[0] == pytest.approx(abs(2 * np.exp(-1) - np.exp(-0.5)), abs=1e-8)
    assert d.values[0] == pytest.approx(0.1293, abs=1e-4)


def test_profile_difference_zero_data():
    grid = Grid(1, 16, 4.0)
    A = build_divergence_form(grid, Constant(1.0))
    B = DampingOperator(np.ones(16))
    data = CauchyData(np.zeros(16), np.zeros(16))
    traj = propagate(BlockGenerator(A, B), data, [1.0, 2.0])
    d = hp.profile_difference(traj, hp.profile_v(A, B, data, traj.times), grid)
    assert np.all(d.values == 0)


def test_profile_difference_time_mismatch():
    A, B = scalar(1, 2)
    data = CauchyData([1.0], [0.0])
    traj = Trajectory(np.array([1.0]), np.zeros((1, 2)), "x")
    with pytest.raises(ValueError):
        hp.profile_difference(traj, hp.profile_v(A, B, data, [2.0]), Grid(1, 2, 2.0))


def test_semigroup_norm_small_time():
    grid = Grid(1, 64, 16.0)
    P = build_divergence_form(grid, Constant(1.0))
    assert hp.semigroup_operator_norm(P, 1e-8, "L1->L1") == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        hp.semigroup_operator_norm(P, 0.0, "L1->L1")


def test_l1_l2_slope_constant_coefficients_1d():
    grid = Grid(1, 512, 200.0)
    P = build_divergence_form(grid, Constant(1.0))
    t = np.geomspace(1, 100, 16)
    v = [hp.semigroup_operator_norm(P, s, "L1->L2") for s in t]
    assert fit_loglog(TimeSeries(t, np.array(v))).slope == pytest.approx(-0.25, abs=0.05)


def test_l1_l2_fast_path_matches_dense():
    grid = Grid(1, 32, 10.0)
    P = build_divergence_form(grid, Sine(1, 0.5, 10.0))
    a = hp.semigroup_operator_norm(P, 2.0, "L1->L2")
    b = hp.semigroup_operator_norm(P, 2.0, "L1->L2", left=np.ones(32))
    assert a == pytest.approx(b, rel=1e-12)


def test_nash_stationary_and_conservation():
    grid = Grid(1, 128, 40.0)
    P = build_divergence_form(grid, Constant(1.0))
    c = DampingOperator(GaussianBump(1.0, 0.5, 5.0)(grid.points()))
    Pt = build_tilde_A(P, c)
    kern = c.diagonal**0.5
    rep = hp.nash_and_conservation_checks(Pt, c, kern, np.geomspace(0.1, 100, 20))
    assert np.ptp(rep.nash_quotient) <= 1e-10 * rep.nash_quotient[0]
    u0 = np.exp(-grid.axis() ** 2 / 4)
    c1 = DampingOperator(np.ones(128))
    rep = hp.nash_and_conservation_checks(build_tilde_A(P, c1), c1, u0, np.linspace(0.01, 100, 30))
    assert rep.heat_drift <= 1e-8 and not rep.violations()


def test_positivity_from_delta():
    grid = Grid(1, 128, 40.0)
    P = build_divergence_form(grid, Sine(1, 0.5, 40.0))
    c = DampingOperator(Sine(1, 0.5, 40.0)(grid.points()))
    u0 = np.zeros(128)
    u0[64] = 1 / grid.h
    rep = hp.nash_and_conservation_checks(build_tilde_A(P, c), c, u0, np.geomspace(0.01, 50, 25))
    assert rep.min_value >= -1e-10
    assert rep.quotient_max_rise <= 1e-12


def test_l1_norm_equivalence_constants():
    grid = Grid(1, 64, 10.0)
    b = Sine(1, 0.5, 10.0)(grid.points())
    lo, hi = (b**0.5).min(), (b**0.5).max()
    assert 0 < lo <= hi < np.inf


def test_cutoff_projector_extremes():
    grid = Grid(1, 32, 8.0)
    A = build_divergence_form(grid, Constant(1.0))
    B = DampingOperator(Sine(1, 0.5, 8.0)(grid.points()))
    At = build_tilde_A(A, B)
    np.testing.assert_allclose(hp.cutoff_projector(At, B, -1.0), np.eye(32), atol=1e-12)
    np.testing.assert_array_equal(hp.cutoff_projector(At, B, 1e6), np.zeros((32, 32)))


def test_highfreq_decay_small_problem():
    grid = Grid(1, 128, 40.0)
    A = build_divergence_form(grid, Constant(1.0))
    B = DampingOperator(Sine(1, 0.5, 40.0)(grid.points()))
    x = grid.axis()
    data = CauchyData(np.exp(-(x**2) / 4), np.zeros(128))
    traj = propagate(BlockGenerator(A, B), data, np.arange(2.0, 60.0, 1.0), dt=0.5)
    rep = hp.highfreq_cutoff_decay(A, B, traj, 0.1, 1.0)
    assert rep.certificate.finite
    assert rep.idempotence_residual <= 1e-10 and rep.adjoint_residual <= 1e-10
    v = rep.series.values
    assert v[-1] < 1e-3 * v[0]


def test_highfreq_warns_below_spectrum():
    grid = Grid(1, 16, 4.0)
    A = build_divergence_form(grid, Constant(1.0))
    B = DampingOperator(np.ones(16))
    traj = propagate(BlockGenerator(A, B), CauchyData(np.ones(16), np.zeros(16)), [1.0, 2.0])
    with pytest.warns(UserWarning):
        hp.highfreq_cutoff_decay(A, B, traj, 1e-9, 1.0)


def test_difference_table_columns():
    s = TimeSeries(np.geomspace(1, 10, 8), np.geomspace(1, 0.1, 8), "d", 2.0)
    assert list(hp.difference_table(s, 1.0)) == ["t", "diff_L2", "normalized_diff", "certificate_running_sup"]
