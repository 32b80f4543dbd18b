import numpy as np
import pytest

from socialref.exceptions import ParameterError
from socialref.simulation import (SimulationConfig, export_scatter, run_simulation, simulate_network,
                                  write_outputs)

SMALL = SimulationConfig(n_agents=12, n_networks=4, seed=3)


def test_records_shape_and_ranges():
    res = run_simulation(SMALL)
    r = res.records
    assert r.shape == (48, 5)
    assert np.all((r[:, 2] >= 0.4) & (r[:, 2] <= 0.8))
    assert np.all(r[:, 3] >= 1.0)
    assert np.all((r[:, 4] > 0) & (r[:, 4] <= 100.0))
    assert res.fit_no_constant.names == ["centrality", "alpha"]
    assert res.fit_constant.names == ["const", "centrality", "alpha"]
    assert not res.failures


def test_networks_are_independent_of_count():
    short = run_simulation(SMALL.replace(n_networks=2)).records
    long = run_simulation(SMALL).records
    np.testing.assert_array_equal(short, long[:24])


def test_seed_changes_draws():
    a = simulate_network(SMALL, 0)[0]
    b = simulate_network(SMALL.replace(seed=4), 0)[0]
    assert not np.array_equal(a, b)


def test_parallel_matches_serial(tmp_path):
    one = run_simulation(SMALL, workers=1)
    two = run_simulation(SMALL, workers=2)
    write_outputs(one, tmp_path / "a")
    write_outputs(two, tmp_path / "b")
    for name in ("records.csv", "scatter_alpha.csv", "regression_constant.txt", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_constant_alpha_drops_column():
    res = run_simulation(SMALL.replace(alpha_constant=0.5))
    assert res.fit_no_constant.names == ["centrality"]
    assert res.fit_no_constant.r_squared_uncentered == pytest.approx(1.0, abs=1e-12)
    assert res.fit_constant is None
    np.testing.assert_allclose(res.records[:, 2], 0.5)


def test_scatter_sorted(tmp_path):
    res = run_simulation(SMALL.replace(n_networks=1))
    pc, _ = export_scatter(res.records, tmp_path, sort=True)
    xs = np.loadtxt(pc, delimiter=",", skiprows=1)[:, 0]
    assert np.all(np.diff(xs) >= 0)
    with pytest.raises(ParameterError):
        export_scatter(np.empty((0, 5)), tmp_path)


def test_config_validation():
    with pytest.raises(ParameterError):
        SimulationConfig(alpha_high=1.0)
    with pytest.raises(ParameterError):
        SimulationConfig(n_networks=0)
