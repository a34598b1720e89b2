import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from gauss_renyi.branch_algebra import (
    BranchIndex,
    MoebiusMatrix,
    branch_indices,
    branch_matrix,
    branch_weight,
    compose,
    iter_words,
    sup_abs_derivative,
    word_weight,
    word_weight_stepwise,
)
from gauss_renyi.errors import InvalidIndexError, InvalidMatrixError

indices = st.builds(BranchIndex, st.integers(min_value=1, max_value=50), st.integers(min_value=0, max_value=1))
words = st.lists(indices, min_size=1, max_size=6)


def test_branch_matrices():
    assert branch_matrix(BranchIndex(1, 0)).as_rows() == [[0, 1], [1, 1]]
    assert branch_matrix(BranchIndex(3, 1)).as_rows() == [[1, 2], [1, 3]]


@pytest.mark.parametrize("idx", [(0, 0), (-2, 1), (1, 2), (1.5, 0)])
def test_invalid_branch_index(idx):
    with pytest.raises(InvalidIndexError):
        branch_matrix(BranchIndex(*idx))


def test_compose():
    assert compose([BranchIndex(1, 0), BranchIndex(2, 1)]).as_rows() == [[1, 2], [2, 3]]
    with pytest.raises(ValueError):
        compose([])


def test_sup_abs_derivative():
    assert sup_abs_derivative(MoebiusMatrix(1, 2, 2, 3)) == pytest.approx(1.0 / 9.0)
    assert sup_abs_derivative(MoebiusMatrix(0, 1, 1, 1)) == 1.0
    with pytest.raises(InvalidMatrixError):
        sup_abs_derivative(MoebiusMatrix(1, 1, 1, 0))


def test_branch_weights():
    assert branch_weight(BranchIndex(1, 0), 0.5, 0.0) == 0.5
    assert branch_weight(BranchIndex(2, 1), 0.25, 1.0) == pytest.approx(0.75 / 9.0)
    assert word_weight([BranchIndex(1, 0)], 0.7, 0.0) == pytest.approx(0.7)


def test_weights_sum_to_trigamma_partial_sum():
    N = 2000
    total = math.fsum(branch_weight(idx, 0.3, 0.0) for idx in branch_indices(N))
    assert total == pytest.approx(float(special.polygamma(1, 1) - special.polygamma(1, N + 1)), abs=1e-12)


def test_iter_words_count_and_order():
    all_words = list(iter_words(2, 3))
    assert len(all_words) == 36
    assert all_words[0] == (BranchIndex(1, 0), BranchIndex(1, 0))
    assert all_words[1] == (BranchIndex(1, 0), BranchIndex(1, 1))


@given(words)
@settings(max_examples=200, deadline=None)
def test_composed_determinant_is_unimodular(word):
    assert abs(compose(word).det) == 1


@given(words, words, words)
@settings(max_examples=100, deadline=None)
def test_composition_is_associative(a, b, c):
    A, B, C = compose(a), compose(b), compose(c)
    assert (A @ B) @ C == A @ (B @ C)
    assert compose(a + b) == A @ B


@given(words, st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=200, deadline=None)
def test_composed_map_matches_nested_branches(word, x):
    y = x
    for idx in reversed(word):
        y = branch_matrix(idx)(y)
    assert compose(word)(x) == pytest.approx(y, abs=1e-12)


@given(words, st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=200, deadline=None)
def test_word_weight_is_chain_rule(word, p, x):
    assert word_weight(word, p, x) == pytest.approx(word_weight_stepwise(word, p, x), rel=1e-10, abs=1e-300)
