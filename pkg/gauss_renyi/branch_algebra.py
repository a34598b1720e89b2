"""Integer Moebius matrices of the inverse branches and their compositions.

The inverse branch b_{n,w} of the random map is x -> (Ax+B)/(Cx+D) with

    M_{n,0} = [[0, 1], [1, n]]      (Gauss,  1/(n+x))
    M_{n,1} = [[1, n-1], [1, n]]    (Renyi,  1 - 1/(n+x))

A word (i_1, ..., i_m) stands for b_{i_1} o ... o b_{i_m}; the leftmost index
is applied last and the matrices multiply left to right.
"""
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from gauss_renyi.errors import InvalidIndexError, InvalidMatrixError


class BranchIndex(NamedTuple):
    n: int
    omega: int


BranchWord = Sequence[BranchIndex]


@dataclass(frozen=True)
class MoebiusMatrix:
    A: int
    B: int
    C: int
    D: int

    def __matmul__(self, other: "MoebiusMatrix") -> "MoebiusMatrix":
        return MoebiusMatrix(
            self.A * other.A + self.B * other.C,
            self.A * other.B + self.B * other.D,
            self.C * other.A + self.D * other.C,
            self.C * other.B + self.D * other.D,
        )

    @property
    def det(self) -> int:
        return self.A * self.D - self.B * self.C

    def __call__(self, x):
        return (self.A * x + self.B) / (self.C * x + self.D)

    def derivative(self, x):
        """|b'(x)| = |det| / (Cx + D)^2."""
        return abs(self.det) / (self.C * np.asarray(x, dtype=float) + self.D) ** 2

    def as_rows(self) -> list:
        return [[self.A, self.B], [self.C, self.D]]


def branch_matrix(idx: BranchIndex) -> MoebiusMatrix:
    n, omega = idx
    if int(n) != n or n < 1:
        raise InvalidIndexError(f"Branch index n must be a positive integer, got {n}")
    if omega not in (0, 1):
        raise InvalidIndexError(f"Map choice must be 0 or 1, got {omega}")
    n = int(n)
    if omega == 0:
        return MoebiusMatrix(0, 1, 1, n)
    return MoebiusMatrix(1, n - 1, 1, n)


def compose(word: BranchWord) -> MoebiusMatrix:
    if not word:
        raise ValueError("Cannot compose an empty branch word")
    matrices = [branch_matrix(idx) for idx in word]
    result = matrices[0]
    for M in matrices[1:]:
        result = result @ M
    return result


def sup_abs_derivative(M: MoebiusMatrix) -> float:
    """Exact sup over [0, 1] of |b'|, attained at x=0 since C, D >= 0."""
    if M.D == 0:
        raise InvalidMatrixError(f"Matrix {M.as_rows()} has D = 0")
    return float(Fraction(abs(M.det), M.D * M.D))


def branch_weight(idx: BranchIndex, p: float, x) -> float:
    n, omega = idx
    coin = p if omega == 0 else 1.0 - p
    return coin / (x + n) ** 2


def word_probability(word: BranchWord, p: float) -> float:
    zeros = sum(1 for idx in word if idx.omega == 0)
    return p ** zeros * (1.0 - p) ** (len(word) - zeros)


def word_weight(word: BranchWord, p: float, x, matrix: Optional[MoebiusMatrix] = None) -> float:
    """Coin probability of the word times |b_w'(x)|."""
    M = matrix if matrix is not None else compose(word)
    return word_probability(word, p) * M.derivative(x)


def word_weight_stepwise(word: BranchWord, p: float, x: float) -> float:
    """Product of branch weights along the composition, innermost branch first."""
    weight = 1.0
    y = x
    for idx in reversed(word):
        weight *= branch_weight(idx, p, y)
        y = branch_matrix(idx)(y)
    return weight


def branch_indices(N: int) -> list:
    return [BranchIndex(n, omega) for n in range(1, N + 1) for omega in (0, 1)]


def iter_words(m: int, N: int) -> Iterator[tuple]:
    """All words of length m over indices n <= N, both map choices."""
    return itertools.product(branch_indices(N), repeat=m)
