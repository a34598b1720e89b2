import pytest

from gauss_renyi import collocation
from gauss_renyi.chebyshev import CollocationGrid
from gauss_renyi.transfer import TailPolicy


@pytest.fixture(scope="session")
def grid32():
    return CollocationGrid(32)


@pytest.fixture(scope="session")
def policy():
    return TailPolicy(N=64, order=4, tol=1e-10)


@pytest.fixture(scope="session")
def L_half(grid32, policy):
    return collocation.build_matrix(0.5, grid32, policy)


@pytest.fixture(scope="session")
def half_pair(L_half):
    return collocation.leading_pair(L_half)


@pytest.fixture(scope="session")
def half_result(policy):
    return collocation.density(0.5, 32, policy)


@pytest.fixture(scope="session")
def gauss_result(policy):
    return collocation.density(1.0, 32, policy)
