import numpy as np
import pytest

from dampwave import scenarios as sc
from dampwave.operators import Grid

EXPECTED = {
    "identities", "lemma-surveys", "thm1.1-1d", "thm1.2-1d", "individual", "energy-decay",
    "highfreq-t2", "optimality", "heat-bounds-1d", "heat-bounds-2d", "contour-semigroup",
    "gcc-audit", "gcc-wave", "indefinite-damping", "d2-log-profile",
}


def test_catalog_contents():
    entries = sc.catalog()
    assert {e["name"] for e in entries} == EXPECTED
    for e in entries:
        assert e["anchor"] and e["modules"]


def test_deep_merge_is_nested_and_non_mutating():
    base = {"a": 1, "b": {"c": 2, "d": [1, 2]}}
    out = sc.deep_merge(base, {"b": {"c": 5}, "e": 3})
    assert out == {"a": 1, "b": {"c": 5, "d": [1, 2]}, "e": 3}
    assert base["b"]["c"] == 2
    out["b"]["d"].append(3)
    assert base["b"]["d"] == [1, 2]
    assert sc.deep_merge(base, None) == base


def test_unknown_scenario_lists_known():
    with pytest.raises(KeyError, match="identities"):
        sc.run_scenario("no-such-thing")


def test_random_data_deterministic_by_seed():
    grid = Grid(1, 64, 40.0)
    a = sc.random_bump_data(grid, 3, seed=4, spread=10)
    b = sc.random_bump_data(grid, 3, seed=4, spread=10)
    c = sc.random_bump_data(grid, 3, seed=5, spread=10)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.state, y.state)
    assert not np.array_equal(a[0].state, c[0].state)


def test_make_data_presets():
    grid = Grid(1, 33, 8.0)
    d = sc.make_data(grid, {"preset": "delta"})
    assert d.u0.sum() * grid.cell_volume == pytest.approx(1.0)
    d = sc.make_data(grid, {"preset": "gaussian", "u0": {"amplitude": 2.0, "width": 1.0}, "u1": None})
    x = grid.points()[:, 0]
    np.testing.assert_allclose(d.u0, 2.0 * np.exp(-(x**2)))
    assert not d.u1.any()
    with pytest.raises(ValueError):
        sc.make_data(grid, {"preset": "box"})


def test_time_grid_snaps_to_step():
    t = sc.time_grid({"kind": "geometric", "t_min": 10.0, "t_max": 200.0, "count": 40, "dt": 0.5})
    np.testing.assert_allclose(t / 0.5, np.round(t / 0.5))
    assert np.all(np.diff(t) > 0) and t[0] >= 10 and t[-1] <= 200


def test_scenario_error_becomes_failing_check():
    res = sc.run_scenario("identities", {"instances": -1})
    assert not res.passed
    assert res.failed()[0].id == "scenario_error"


def test_identities_pass_and_parallel_agrees():
    a = sc.run_scenario("identities")
    b = sc.run_scenario("identities", workers=2)
    assert a.passed
    assert [c.as_dict() for c in a.checks] == [c.as_dict() for c in b.checks]
