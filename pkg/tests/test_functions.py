import math

import numpy as np
import pytest
from scipy import integrate

from gauss_renyi.chebyshev import CollocationGrid
from gauss_renyi.functions import (
    CallableFunction,
    LiftedFunction,
    NodalFunction,
    constant,
    gauss_density,
    monomial,
    polynomial,
    renyi_density,
)


def test_callable_without_derivatives_uses_end_fit():
    f = CallableFunction(np.exp)
    np.testing.assert_allclose(f.endpoint_derivatives(0, 2), [1.0, 1.0, 1.0], atol=1e-7)
    np.testing.assert_allclose(f.endpoint_derivatives(1, 2), [math.e] * 3, atol=1e-7)


def test_explicit_derivatives_take_precedence():
    f = monomial(3)
    np.testing.assert_allclose(f.endpoint_derivatives(1, 4), [1.0, 3.0, 6.0, 6.0, 0.0])
    np.testing.assert_allclose(f.endpoint_derivatives(0, 4), [0.0, 0.0, 0.0, 6.0, 0.0])


def test_constant_and_polynomial():
    assert constant(2.5)(0.3) == pytest.approx(2.5)
    np.testing.assert_array_equal(constant(1.0).endpoint_derivatives(0, 3), [1.0, 0.0, 0.0, 0.0])
    p = polynomial([1.0, 0.0, 2.0])
    assert p(0.5) == pytest.approx(1.5)
    np.testing.assert_allclose(p.endpoint_derivatives(1, 3), [3.0, 4.0, 4.0, 0.0])


def test_closed_form_densities():
    g = gauss_density()
    assert g(0.0) == pytest.approx(1.0 / math.log(2.0))
    np.testing.assert_allclose(g.endpoint_derivatives(0, 2), np.array([1.0, -1.0, 2.0]) / math.log(2.0))
    r = renyi_density()
    assert r(0.25) == pytest.approx(4.0)
    np.testing.assert_allclose(r.endpoint_derivatives(1, 3), [1.0, -1.0, 2.0, -6.0])


def test_linear_combination_keeps_derivatives():
    f = 2.0 * monomial(2) + constant(1.0)
    assert f(0.5) == pytest.approx(1.5)
    np.testing.assert_allclose(f.endpoint_derivatives(1, 2), [3.0, 4.0, 4.0])


def test_nodal_function():
    grid = CollocationGrid(32)
    h = NodalFunction(grid, gauss_density()(grid.nodes))
    assert isinstance(h(0.3), float)
    assert h(0.3) == pytest.approx(gauss_density()(0.3), abs=1e-12)
    assert h(np.array([[0.1, 0.2]])).shape == (1, 2)
    assert h.integral() == pytest.approx(1.0, abs=1e-12)
    assert h.sup_norm() == pytest.approx(1.0 / math.log(2.0))
    np.testing.assert_allclose(h.endpoint_derivatives(1, 1), gauss_density().endpoint_derivatives(1, 1), atol=1e-10)


def test_nodal_function_rejects_wrong_shape():
    with pytest.raises(ValueError):
        NodalFunction(CollocationGrid(8), np.ones(5))


def test_nodal_antiderivative():
    grid = CollocationGrid(32)
    h = NodalFunction(grid, gauss_density()(grid.nodes))
    x = np.array([0.0, 0.25, 0.5, 1.0])
    np.testing.assert_allclose(h.antiderivative(x), np.log2(1.0 + x), atol=1e-12)


@pytest.fixture
def lifted_constant():
    # c * sum 2^-m / (1+mx)^2 with c = 1/(2 log 2)
    return LiftedFunction(NodalFunction(CollocationGrid(16), np.ones(17)), 0.5, 60)


def test_lifted_function_closed_form(lifted_constant):
    c = 0.5 / math.log(2.0)
    assert lifted_constant.integral() == pytest.approx(1.0, abs=1e-14)
    assert lifted_constant(0.0) == pytest.approx(2.0 * c, abs=1e-13)
    assert lifted_constant(1.0) == pytest.approx(c * sum(0.5 ** m / (1 + m) ** 2 for m in range(60)), abs=1e-13)
    np.testing.assert_allclose(lifted_constant.endpoint_derivatives(0, 2), [2.0 * c, -4.0 * c, 36.0 * c], atol=1e-10)


def test_lifted_antiderivative_matches_quadrature(lifted_constant):
    for b in (0.01, 0.3, 0.9):
        expected, _ = integrate.quad(lifted_constant, 0.0, b, epsabs=1e-14)
        assert lifted_constant.antiderivative(b) == pytest.approx(expected, abs=1e-12)
    assert lifted_constant.values.shape == (17,)
    assert lifted_constant(np.array([[0.1, 0.2]])).shape == (1, 2)


def test_lifted_endpoint_one_uses_end_fit(lifted_constant):
    h = 1e-5
    slope = (lifted_constant(1.0) - lifted_constant(1.0 - h)) / h
    assert lifted_constant.endpoint_derivatives(1, 1)[1] == pytest.approx(slope, rel=1e-3)


def test_lift_ratio_range():
    with pytest.raises(ValueError):
        LiftedFunction(NodalFunction(CollocationGrid(8), np.ones(9)), 1.0, 10)
