import math

import numpy as np
import pytest
from scipy import special

from gauss_renyi import hardy
from gauss_renyi.errors import BesselRangeError
from gauss_renyi.hardy import HalfLineFunction

ZETA_2 = math.pi ** 2 / 6

BATTERY = [
    HalfLineFunction(lambda t: np.ones_like(t), name="one"),
    HalfLineFunction(lambda t: np.exp(-t), name="exp"),
    HalfLineFunction(lambda t: t * np.exp(-t), name="t_exp"),
    HalfLineFunction(lambda t: np.exp(-2.0 * t), name="exp2"),
    HalfLineFunction(lambda t: 1.0 / (1.0 + t), name="rational", decay="polynomial"),
]


def test_bessel_series():
    assert hardy.bessel_J1(0.0) == 0.0
    assert hardy.bessel_I1(0.2) == pytest.approx(0.100500834, abs=1e-9)
    assert hardy.bessel_J1(3.0) == pytest.approx(float(special.j1(3.0)), abs=1e-13)
    with pytest.raises(BesselRangeError):
        hardy.bessel_J1(41.0)


def test_kernels_match_library_bessel_functions():
    u = np.concatenate([np.linspace(0.0, 16.0, 33)[1:], [20.0, 50.0, 400.0]])
    root = np.sqrt(u)
    np.testing.assert_allclose(hardy.kernel_J(u), special.j1(2 * root) / root, atol=1e-11)
    np.testing.assert_allclose(hardy.kernel_I(u), special.iv(1, 2 * root) / root, rtol=1e-11)
    assert hardy.kernel_J(0.0) == 1.0
    assert hardy.kernel_I(0.0) == 1.0


def test_kernel_I_growth_is_exponential_in_root_u():
    u = np.linspace(0.0, 100.0, 201)
    assert np.all(hardy.kernel_I(u) * np.exp(-2.0 * np.sqrt(u)) <= 1.0)


def test_kernel_J_partial_sums_bracket_the_limit():
    u = 0.7
    limit = hardy.kernel_J(u)
    partial, term = 0.0, 1.0
    sums = []
    for k in range(8):
        partial += term
        sums.append(partial)
        term *= -u / ((k + 1) * (k + 2))
    for even, odd in zip(sums[::2], sums[1::2]):
        assert odd <= limit <= even


def test_mu_density():
    assert hardy.mu_density(0.0) == 1.0
    assert hardy.mu_density(1.0) == pytest.approx(1.0 / (math.e - 1.0))


def test_laguerre_rule_exactness():
    assert hardy.laguerre_rule(64).exactness_defect(10) <= 1e-10
    assert hardy.laguerre_rule(128).count == 128


def test_K_J_of_constant_at_zero():
    assert hardy.apply_KJ(BATTERY[0], 0.0) == pytest.approx(ZETA_2, abs=1e-8)


def test_K_J_is_symmetric():
    for phi, psi in zip(BATTERY, BATTERY[1:] + BATTERY[:1]):
        assert hardy.kj_bilinear(phi, psi) == pytest.approx(hardy.kj_bilinear(psi, phi), abs=1e-8)


def test_K_I_node_refinement():
    g = BATTERY[1]
    coarse = hardy.apply_KI(g, 1.0, hardy.laguerre_rule(64), check=False)
    fine = hardy.apply_KI(g, 1.0, hardy.laguerre_rule(128))
    assert coarse == pytest.approx(fine, abs=1e-9)


def test_laplace_hat_of_constant_is_trigamma():
    assert hardy.laplace_hat(BATTERY[0], 0.0) == pytest.approx(ZETA_2, abs=1e-9)
    assert hardy.laplace_hat(BATTERY[0], 1.0) == pytest.approx(ZETA_2 - 1.0, abs=1e-9)
    x = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(hardy.laplace_hat(BATTERY[0], x, check=True), special.polygamma(1, 1.0 + x), atol=1e-9)
    with pytest.raises(ValueError):
        hardy.laplace_hat(BATTERY[0], -0.5)


def test_laplace_hat_is_linear():
    x = np.linspace(0.0, 1.0, 5)
    combined = HalfLineFunction(lambda t: 2.0 * np.exp(-t) - t * np.exp(-t))
    expected = 2.0 * hardy.laplace_hat(BATTERY[1], x) - hardy.laplace_hat(BATTERY[2], x)
    np.testing.assert_allclose(hardy.laplace_hat(combined, x), expected, atol=1e-13)


@pytest.mark.parametrize("phi", BATTERY[:2], ids=lambda phi: phi.name)
def test_commuting_diagram(phi):
    x_grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    residual = hardy.commuting_residual(phi, x_grid)
    assert residual <= 1e-6
    doubled = HalfLineFunction(lambda t: 2.0 * phi(t))
    assert hardy.commuting_residual(doubled, x_grid) == pytest.approx(2.0 * residual, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_hilbert_schmidt_norm(n):
    assert hardy.hs_norm(n) == pytest.approx(1.0 / (2 * n), abs=1e-8)
    t = np.linspace(0.0, 50.0, 11)
    np.testing.assert_allclose(hardy.hs_integrand(n, t), hardy.hs_integrand(n, -t))


def test_trace_and_operator_bounds():
    assert hardy.trace_norm_bound(2) == pytest.approx(math.sqrt(1.0 / 30.0), abs=1e-12)
    for n in range(1, 11):
        assert hardy.trace_norm_quadrature(n) == pytest.approx(hardy.trace_norm_bound(n), abs=1e-10)
        assert hardy.trace_norm_bound(n) <= n ** -1.5
    assert hardy.opnorm_bound_gauss(1) == pytest.approx(1.0 / math.sqrt(2.0))
    assert hardy.opnorm_bound_Bpow(3) == 2.0
    with pytest.raises(ValueError):
        hardy.trace_norm_bound(0)


def test_nuclear_bounds():
    for n in range(2, 50):
        assert hardy.nuclear_norm_bound(n) <= 2.0 * n ** -1.5
    with pytest.raises(ValueError):
        hardy.nuclear_norm_bound(1)
    partial = np.cumsum([hardy.trace_norm_bound(n) for n in range(2, 4001)])
    assert partial[-1] - partial[1999] < 2.0 * 2000 ** -0.5
    assert hardy.renyi_nuclear_bound(1.0) == 0.0
    assert hardy.resolvent_norm_bound(1.0) == 1.0
    assert hardy.gauss_part_norm_bound(0.5) > 0.5 / math.sqrt(2.0)


def test_eta_norms():
    assert hardy.eta_sq_closed_form(0) == pytest.approx(0.5)
    assert hardy.eta_sq_closed_form(1) == pytest.approx(0.25)
    for n in range(41):
        norms = hardy.xi_eta_norms(n)
        assert norms.eta_sq == pytest.approx(norms.eta_sq_quadrature, abs=1e-10)
        assert norms.eta_sq <= 1.0 / math.sqrt(n + 1)


def test_xi_norms_decay_geometrically():
    xi = [math.sqrt(hardy.xi_eta_norms(n).xi_sq) for n in range(5, 42)]
    ratios = [b / a for a, b in zip(xi, xi[1:])]
    assert max(ratios) <= 2.0 / 3.0 + 0.05


def test_xi_eta_range():
    with pytest.raises(BesselRangeError):
        hardy.xi_eta_norms(151)


def test_hardy_table():
    rows = hardy.hardy_table(3)
    assert [row.n for row in rows] == [1, 2, 3]
    assert rows[0].hs == pytest.approx(0.5, abs=1e-8)
