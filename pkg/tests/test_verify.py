import pytest

from gauss_renyi.errors import EnumerationSizeError
from gauss_renyi.models.responses import VerificationResponse
from gauss_renyi.validators import suites
from gauss_renyi.verify import SUITE_NAMES, Verification


def test_suite_names():
    assert SUITE_NAMES == ["closed-forms", "operators", "bounds", "markov-mod", "hardy", "all"]
    with pytest.raises(ValueError):
        Verification("everything")


def test_bounds_suite_is_valid():
    response = Verification("bounds").generate()
    assert response.valid
    assert response.passed == len(response.checks) > 0
    assert all(check["suite"] == "bounds" for check in response.checks)
    assert response.metadata["tool_version"]


def test_aborted_suite_is_recorded_as_a_failure(monkeypatch):
    def explode():
        raise EnumerationSizeError("too many words")

    monkeypatch.setitem(suites.SUITES, "bounds", explode)
    response = Verification("bounds").generate()
    assert not response.valid
    assert response.failed == 1
    assert response.checks[0]["name"] == "suite_aborted"
    assert "EnumerationSizeError" in response.checks[0]["error"]


def test_polynomial_battery_is_reproducible():
    first = suites.polynomial_battery(3, seed=11)
    second = suites.polynomial_battery(3, seed=11)
    for f, g in zip(first, second):
        assert f(0.3) == g(0.3)
        assert f(0.0) >= 0.0


def test_verification_response_keeps_default_model_config():
    assert "protected_namespaces" not in VerificationResponse.model_config
    assert VerificationResponse(suite="bounds").checks == []


@pytest.mark.slow
def test_markov_mod_suite_is_valid():
    assert Verification("markov-mod").generate().valid


@pytest.mark.slow
def test_operators_suite_is_valid():
    response = Verification("operators").generate()
    assert response.valid, [check["name"] for check in response.checks if not check["passed"]]
    names = {check["name"] for check in response.checks}
    assert {"lambda1_error_p_grid", "self_convergence_32_64", "monte_carlo_l1_p0.5", "monte_carlo_l1_p0.9"} <= names
