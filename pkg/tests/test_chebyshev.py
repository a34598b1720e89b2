import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gauss_renyi.chebyshev import CollocationGrid, clenshaw_curtis_weights, lobatto_nodes


@pytest.mark.parametrize("degree", [4, 7, 16, 33])
def test_nodes_are_increasing_with_fixed_ends(degree):
    nodes = lobatto_nodes(degree)
    assert nodes[0] == 0.0
    assert nodes[-1] == 1.0
    assert np.all(np.diff(nodes) > 0)


@pytest.mark.parametrize("degree", [4, 7, 16, 32])
def test_clenshaw_curtis_is_exact_for_polynomials(degree):
    grid = CollocationGrid(degree)
    assert clenshaw_curtis_weights(degree).sum() == pytest.approx(1.0, abs=1e-14)
    for k in range(degree + 1):
        assert grid.integrate(grid.nodes ** k) == pytest.approx(1.0 / (k + 1), abs=1e-13)


def test_interpolation_reproduces_polynomials(grid32):
    points = np.linspace(0.0, 1.0, 57)
    values = 3.0 * grid32.nodes ** 5 - grid32.nodes ** 2 + 0.5
    expected = 3.0 * points ** 5 - points ** 2 + 0.5
    assert np.max(np.abs(grid32.interpolate(values, points) - expected)) < 1e-13


def test_interpolation_at_a_node_picks_the_value(grid32):
    values = np.sin(grid32.nodes)
    assert grid32.interpolate(values, grid32.nodes[5:6])[0] == values[5]


def test_differentiation_matrix(grid32):
    x = grid32.nodes
    assert np.max(np.abs(grid32.diff @ x ** 3 - 3.0 * x ** 2)) < 1e-11


def test_endpoint_derivative_rows(grid32):
    at_zero, at_one = grid32.endpoint_derivative_rows(3)
    values = grid32.nodes ** 3
    np.testing.assert_allclose(at_one @ values, [1.0, 3.0, 6.0, 6.0], atol=1e-9)
    np.testing.assert_allclose(at_zero @ values, [0.0, 0.0, 0.0, 6.0], atol=1e-9)


def test_degree_must_be_at_least_two():
    with pytest.raises(ValueError):
        CollocationGrid(1)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=20))
@settings(max_examples=50, deadline=None)
def test_cardinal_functions_sum_to_one(points):
    grid = CollocationGrid(16)
    E = grid.interpolation_matrix(points)
    assert np.max(np.abs(E.sum(axis=1) - 1.0)) < 1e-12


@pytest.mark.parametrize("x", [1e-309, 5e-324, 1.0 - 2.0 ** -53])
def test_points_within_underflow_of_a_node(grid32, x):
    E = grid32.interpolation_matrix([x])
    assert np.all(np.isfinite(E))
    assert E.sum() == pytest.approx(1.0, abs=1e-12)
    values = np.cos(grid32.nodes)
    assert grid32.interpolate(values, [x])[0] == pytest.approx(np.cos(x), abs=1e-12)


@pytest.mark.parametrize("degree", [8, 32, 64])
def test_cardinal_integrals(degree):
    grid = CollocationGrid(degree)
    np.testing.assert_allclose(grid.cardinal_integrals(1.0)[0], grid.cc_weights, atol=1e-14)
    assert np.max(np.abs(grid.cardinal_integrals(0.0))) < 1e-15
    points = np.array([1.0 / 65.0, 0.3, 0.99])
    values = grid.nodes ** 3 - 2.0 * grid.nodes
    np.testing.assert_allclose(grid.cardinal_integrals(points) @ values, points ** 4 / 4.0 - points ** 2, atol=1e-13)
