import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialref.exceptions import ParameterError
from socialref.io import (read_network, read_table, read_vector_csv, write_network_csv,
                          write_network_json, write_table, write_vector_csv)
from socialref.network import WeightedNetwork, erdos_renyi_row_normalized
from socialref.utility import FAMILIES, make_utility, utility_from_dict

SPECS = [("power", {"theta": 0.3}), ("sqrt", {}), ("log-shifted", {"shift": 2.0}),
         ("crra", {"gamma": 2.5, "shift": 0.1}), ("cara", {"a": 0.4}),
         ("quadratic", {"a1": 1.0, "a2": -0.05})]


@pytest.mark.parametrize("family,kw", SPECS)
def test_inverse_marginal_utility(family, kw):
    u = make_utility(family, **kw)
    assert u.check_inverse(np.linspace(0.2, 5.0, 25))


@pytest.mark.parametrize("family,kw", SPECS)
def test_second_derivative_matches_finite_difference(family, kw):
    u = make_utility(family, **kw)
    for z in (0.5, 1.3, 4.0):
        h = 1e-5
        fd = (u.df(z + h) - u.df(z - h)) / (2 * h)
        assert abs(u.d2f(z) - fd) <= 1e-5 * max(1.0, abs(fd))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(0.05, 10.0))
def test_concave_increasing(z1, z2):
    u = make_utility("power", theta=0.25)
    lo, hi = sorted((z1, z2))
    assert u.f(hi) >= u.f(lo)
    assert u.df(hi) <= u.df(lo)


def test_round_trip_dict():
    u = make_utility("crra", inner="log1p", gamma=2.0, shift=0.5)
    v = utility_from_dict(u.to_dict())
    assert v.family == "crra" and v.inner.name == u.inner.name
    assert v.f(1.7) == pytest.approx(u.f(1.7))


def test_unknown_family():
    with pytest.raises(ParameterError):
        make_utility("exotic")
    with pytest.raises(ParameterError):
        make_utility("sqrt", inner="exotic")
    assert "cara" in FAMILIES


def test_cara_has_constant_risk_aversion():
    u = make_utility("cara", a=0.7)
    np.testing.assert_allclose([u.absolute_risk_aversion(z) for z in (0.1, 1.0, 5.0)], 0.7)


def test_network_csv_round_trip(tmp_path):
    net = erdos_renyi_row_normalized(7, 0.4, seed=11)
    write_network_csv(tmp_path / "g.csv", net)
    assert read_network(tmp_path / "g.csv") == net
    write_network_json(tmp_path / "g.json", net)
    assert read_network(tmp_path / "g.json") == net


def test_network_json_edges_normalized(tmp_path):
    (tmp_path / "e.json").write_text(json.dumps({"n": 3, "edges": [[0, 1, 1], [0, 2, 3], [1, 0, 1], [2, 1, 5]]}))
    net = read_network(tmp_path / "e.json", normalize=True)
    np.testing.assert_allclose(net.weights[0], [0, 0.25, 0.75])
    with pytest.raises(ParameterError):
        read_network(tmp_path / "e.json")


def test_vector_and_table(tmp_path):
    a = np.array([0.1, 1 / 3, 0.7])
    write_vector_csv(tmp_path / "a.csv", a)
    np.testing.assert_array_equal(read_vector_csv(tmp_path / "a.csv"), a)  # repr floats are exact
    write_table(tmp_path / "t.csv", ["k", "v"], [(1, 0.5), (2, True)])
    rows = read_table(tmp_path / "t.csv")
    assert rows[1] == {"k": "2", "v": "true"}


def test_weighted_network_immutable():
    net = WeightedNetwork(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        net.weights[0, 1] = 0.5
