import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError
from scipy import special

from gauss_renyi.errors import EnumerationSizeError, InvalidIntervalError, TruncationError
from gauss_renyi.functions import CallableFunction, FunctionRep, constant, gauss_density, monomial, polynomial, renyi_density
from gauss_renyi.transfer import (
    TailPolicy,
    apply_iterated,
    apply_LG,
    apply_Lp,
    apply_Lp_report,
    apply_LR,
    invariance_residual,
    iterated_neglected_bound,
    markov_residual,
    preimage_pieces,
)

ZETA_2 = math.pi ** 2 / 6


def trigamma_shift() -> CallableFunction:
    """psi'(1+y), the image of the constant 1 under every L_p."""
    return CallableFunction(
        lambda y: special.polygamma(1, 1.0 + np.asarray(y, dtype=float)),
        [(lambda k: lambda y: special.polygamma(k + 1, 1.0 + np.asarray(y, dtype=float)))(k) for k in range(1, 7)],
        name="trigamma",
    )


class RenyiEndpointOnly(FunctionRep):
    """Fails if the Renyi-side Taylor data at x=1 is ever requested."""

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def endpoint_derivatives(self, endpoint, order):
        if endpoint == 1:
            raise AssertionError("Renyi side evaluated with zero weight")
        return np.r_[1.0, np.zeros(order)]


@pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 1.0])
def test_constant_at_zero_gives_zeta2(p, policy):
    assert apply_Lp(p, constant(1.0), 0.0, policy) == pytest.approx(ZETA_2, abs=1e-12)


@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=5),
)
@settings(max_examples=100, deadline=None)
def test_mixture_of_the_two_operators(p, x, coefficients):
    policy = TailPolicy(N=64, order=4, tol=1e-10)
    f = polynomial(coefficients)
    mixed = p * apply_LG(f, x, policy) + (1.0 - p) * apply_LR(f, x, policy)
    assert apply_Lp(p, f, x, policy) == pytest.approx(mixed, abs=1e-12)


def test_gauss_and_renyi_operators(policy):
    assert apply_LG(constant(1.0), 0.0, policy) == pytest.approx(ZETA_2, abs=1e-12)
    assert apply_LR(renyi_density(), 0.5, policy) == pytest.approx(2.0, abs=1e-9)
    assert apply_LR(renyi_density(), 0.25, policy) == pytest.approx(4.0, abs=1e-9)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0])
def test_gauss_density_is_fixed(x, policy):
    assert apply_LG(gauss_density(), x, policy) == pytest.approx(float(gauss_density()(x)), abs=1e-10)


def test_array_evaluation_matches_scalar(policy):
    xs = np.array([0.0, 0.2, 0.7])
    values = apply_Lp(0.4, monomial(2), xs, policy)
    assert values.shape == (3,)
    for x, v in zip(xs, values):
        assert apply_Lp(0.4, monomial(2), float(x), policy) == pytest.approx(v, abs=1e-15)


def test_zero_weight_side_is_never_evaluated(policy):
    assert apply_LG(RenyiEndpointOnly(), 0.0, policy) == pytest.approx(ZETA_2, abs=1e-12)


def test_truncation_error_in_strict_mode():
    coarse = TailPolicy(N=2, order=0, tol=1e-12)
    with pytest.raises(TruncationError) as info:
        apply_Lp(0.5, monomial(1), 0.5, coarse)
    assert info.value.estimate > 1e-12
    report = apply_Lp_report(0.5, monomial(1), 0.5, coarse)
    assert report.error_estimate == pytest.approx(info.value.estimate)
    lenient = TailPolicy(N=2, order=0, tol=1e-12, strict=False)
    assert apply_Lp(0.5, monomial(1), 0.5, lenient) == pytest.approx(report.value)


def test_higher_tail_order_is_more_accurate():
    reference = apply_Lp(0.5, gauss_density(), 0.3, TailPolicy(N=512, order=4))
    errors = [
        abs(apply_Lp(0.5, gauss_density(), 0.3, TailPolicy(N=16, order=r, strict=False)) - reference)
        for r in range(5)
    ]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_policy_validation():
    with pytest.raises(ValidationError):
        TailPolicy(order=5)
    with pytest.raises(ValidationError):
        TailPolicy(N=1)
    with pytest.raises(ValidationError):
        TailPolicy(tol=0.0)


def test_domain_checks(policy):
    with pytest.raises(ValueError):
        apply_Lp(1.5, constant(1.0), 0.5, policy)
    with pytest.raises(ValueError):
        apply_Lp(0.5, constant(1.0), 1.5, policy)


@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=-3.0, max_value=3.0),
)
@settings(max_examples=50, deadline=None)
def test_linearity(p, x, a, b):
    policy = TailPolicy(N=64, order=4, tol=1e-10)
    f, g = monomial(2), polynomial([1.0, -1.0, 0.5])
    combined = apply_Lp(p, a * f + b * g, x, policy)
    separate = a * apply_Lp(p, f, x, policy) + b * apply_Lp(p, g, x, policy)
    assert combined == pytest.approx(separate, abs=1e-12)


@pytest.mark.parametrize("p, x", [(0.3, 0.4), (0.8, 0.0)])
def test_iterated_sum_is_within_its_bound(p, x, policy):
    result = apply_iterated(p, constant(1.0), x, 2, 20)
    exact = apply_Lp(p, trigamma_shift(), x, policy)
    assert result.words == 1600
    assert 0.0 <= exact - result.value <= result.neglected_bound


def test_iterated_single_step_matches_partial_trigamma():
    result = apply_iterated(0.5, constant(1.0), 0.0, 1, 50)
    assert result.value == pytest.approx(float(special.polygamma(1, 1) - special.polygamma(1, 51)), abs=1e-13)
    assert result.neglected_bound == pytest.approx(iterated_neglected_bound(1, 50))


def test_iterated_enumeration_limit():
    with pytest.raises(EnumerationSizeError):
        apply_iterated(0.5, constant(1.0), 0.2, 4, 40)


def test_markov_residual(policy):
    assert markov_residual(0.5, constant(1.0), policy=policy) <= 1e-10
    assert markov_residual(0.3, monomial(2), policy=policy) <= 1e-8
    assert markov_residual(0.7, polynomial([0.2, 0.1, 0.0, 0.4, 0.3]), policy=policy) <= 1e-8


def test_preimage_pieces():
    gauss, renyi = preimage_pieces(0.0, 1.0, 3)
    assert gauss[0] == (0.5, 1.0)
    assert renyi[0] == (0.0, 0.5)
    assert len(gauss) == len(renyi) == 3


def test_gauss_measure_is_invariant():
    assert invariance_residual(gauss_density(), 1.0, (0.0, 0.5)) <= 1e-8
    assert invariance_residual(gauss_density(), 1.0, (0.2, 0.9)) <= 1e-8


@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_whole_interval_is_invariant_for_any_density(p):
    assert invariance_residual(constant(1.0), p, (0.0, 1.0)) <= 1e-10


@pytest.mark.parametrize("interval", [(0.5, 0.5), (0.6, 0.2), (-0.1, 0.5), (0.2, 1.1)])
def test_invalid_interval(interval):
    with pytest.raises(InvalidIntervalError):
        invariance_residual(constant(1.0), 0.5, interval)
