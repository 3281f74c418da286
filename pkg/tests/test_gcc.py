import numpy as np
import pytest

from dampwave import gcc
from dampwave.fields import Constant, Hole, Lens, Sine


def test_flat_rays_are_straight():
    sys = gcc.HamiltonianSystem(Constant(1.0), Constant(1.0), 2)
    x0 = np.array([[0.0, 0.0], [1.0, -2.0]])
    xi0 = np.array([[1.0, 0.0], [0.6, 0.8]])
    fl = gcc.hamiltonian_flow(sys, x0, xi0, 3.0, 0.1)
    np.testing.assert_allclose(fl.x[-1], x0 + 2 * 3.0 * xi0, atol=1e-12)
    np.testing.assert_allclose(fl.xi[-1], xi0)


def test_hamiltonian_conserved_in_lens():
    sys = gcc.HamiltonianSystem(Lens(), Constant(1.0), 2)
    rng = np.random.Generator(np.random.Philox(1))
    x0 = rng.uniform(-2, 2, (20, 2))
    xi0 = gcc.unit_shell(sys, x0, rng.standard_normal((20, 2)))
    np.testing.assert_allclose(sys.p(x0, xi0), 1.0)
    fl = gcc.hamiltonian_flow(sys, x0, xi0, 5.0, 0.005)
    p_end = sys.p(fl.x[-1], fl.xi[-1])
    assert np.abs(p_end - 1).max() <= 1e-6
    l0, l1 = gcc.angular_momentum(x0, xi0), gcc.angular_momentum(fl.x[-1], fl.xi[-1])
    assert np.abs(l1 - l0).max() <= 1e-6


def test_flow_validation_and_box_warning():
    sys = gcc.HamiltonianSystem(Constant(1.0), Constant(1.0), 1, box=(-1.0, 1.0))
    with pytest.raises(ValueError):
        gcc.hamiltonian_flow(sys, [[0.0]], [[1.0]], 0.0)
    with pytest.warns(UserWarning):
        fl = gcc.hamiltonian_flow(sys, [[0.0]], [[1.0]], 2.0)
    assert fl.left_box.all()


def test_constant_damping_average():
    sys = gcc.HamiltonianSystem(Sine(1.0, 0.5, 10.0), Constant(0.7), 1)
    avg = gcc.damping_average(sys, [[0.0], [3.0]], [[1.0], [-1.0]], 10.0)
    np.testing.assert_allclose(avg, 0.7, rtol=1e-12)


def test_hole_crossing_matches_oracle():
    hole = Hole(1.5, 2.0)
    sys = gcc.HamiltonianSystem(Constant(1.0), hole, 1)
    T = 20.0
    avg = gcc.damping_average(sys, [[-10.0]], [[1.0]], T, dt=0.002)
    assert avg[0] == pytest.approx(gcc.hole_crossing_oracle(1.5, 2.0, T), abs=1e-6)


def test_check_gcc_report():
    sys = gcc.HamiltonianSystem(Constant(1.0), Hole(1.5, 2.0), 1)
    rep = gcc.check_gcc(sys, 5.0, 20.0, n_lattice=11, dt=0.01)
    assert rep.verdict and rep.alpha == pytest.approx(0.9 * rep.min_average)
    assert rep.samples == 22
    assert set(rep.table()) == {"x0", "xi0", "average"}
    assert "verdict=pass" in rep.summary_line()
    rep = gcc.check_gcc(sys, 5.0, 20.0, alpha=2.0, n_lattice=5)
    assert not rep.verdict


def test_sampling_rejects_3d():
    sys = gcc.HamiltonianSystem(Constant(1.0), Constant(1.0), 3)
    with pytest.raises(ValueError):
        gcc.sample_phase_space(sys, 1.0)
