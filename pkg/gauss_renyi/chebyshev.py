"""Chebyshev-Lobatto machinery on [0, 1].

Nodes, barycentric interpolation, the spectral differentiation matrix and
Clenshaw-Curtis weights, all mapped affinely from [-1, 1] onto [0, 1] so that
node 0 sits at x=0 and node d at x=1.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev

# separations below the smallest normal float count as node hits
NODE_HIT = np.finfo(float).tiny


def lobatto_nodes(degree: int) -> np.ndarray:
    """d+1 Chebyshev-Lobatto points on [0, 1], strictly increasing."""
    theta = np.pi * np.arange(degree + 1) / degree
    nodes = 0.5 * (1.0 - np.cos(theta))
    nodes[0], nodes[-1] = 0.0, 1.0
    return nodes


def barycentric_weights(degree: int) -> np.ndarray:
    weights = (-1.0) ** np.arange(degree + 1)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


def clenshaw_curtis_weights(degree: int) -> np.ndarray:
    """Clenshaw-Curtis weights for the nodes of ``lobatto_nodes``; they sum to 1."""
    n = degree
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    inner = np.arange(1, n)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = 1.0 / (n * n - 1)
        w[n] = w[0]
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
        v -= np.cos(n * theta[inner]) / (n * n - 1)
    else:
        w[0] = 1.0 / (n * n)
        w[n] = w[0]
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
    w[inner] = 2.0 * v / n
    # [-1, 1] has length 2
    return 0.5 * w


def differentiation_matrix(degree: int) -> np.ndarray:
    """Spectral d/dx on the [0, 1] Lobatto nodes."""
    n = degree
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    # x = 1 - 2t on the same node ordering
    return -2.0 * D


def barycentric_matrix(nodes: np.ndarray, weights: np.ndarray, points) -> np.ndarray:
    """Rows of cardinal-function values: E[k, j] = l_j(points[k])."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    diff = points[:, None] - nodes[None, :]
    gap = np.abs(diff)
    hit = gap < NODE_HIT
    diff[hit] = 1.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        kernel = weights[None, :] / diff
        E = kernel / kernel.sum(axis=1, keepdims=True)
    snap = hit.any(axis=1) | ~np.isfinite(E).all(axis=1)
    if snap.any():
        rows = np.flatnonzero(snap)
        E[rows] = 0.0
        E[rows, np.argmin(gap[rows], axis=1)] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    """Degree-d Chebyshev-Lobatto grid on [0, 1].

    Attributes:
        degree: polynomial degree d; the grid has d+1 nodes
        nodes: strictly increasing, nodes[0] == 0 and nodes[-1] == 1
        bary_weights: barycentric interpolation weights
        cc_weights: Clenshaw-Curtis integration weights, summing to 1
    """

    degree: int
    nodes: np.ndarray = field(init=False, repr=False)
    bary_weights: np.ndarray = field(init=False, repr=False)
    cc_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError(f"Collocation degree must be at least 2, got {self.degree}")
        object.__setattr__(self, "nodes", lobatto_nodes(self.degree))
        object.__setattr__(self, "bary_weights", barycentric_weights(self.degree))
        object.__setattr__(self, "cc_weights", clenshaw_curtis_weights(self.degree))

    @property
    def size(self) -> int:
        return self.degree + 1

    @cached_property
    def diff(self) -> np.ndarray:
        return differentiation_matrix(self.degree)

    def interpolation_matrix(self, points) -> np.ndarray:
        return barycentric_matrix(self.nodes, self.bary_weights, points)

    def interpolate(self, values: np.ndarray, points) -> np.ndarray:
        return self.interpolation_matrix(points) @ values

    def endpoint_derivative_rows(self, order: int) -> tuple:
        """Rows r_j with r_j @ values = f^(j) at 0 (first) and at 1 (second), j=0..order."""
        size = self.size
        at_zero = np.zeros((order + 1, size))
        at_one = np.zeros((order + 1, size))
        power = np.eye(size)
        for j in range(order + 1):
            at_zero[j] = power[0]
            at_one[j] = power[-1]
            power = power @ self.diff
        return at_zero, at_one

    def integrate(self, values: np.ndarray) -> float:
        return float(self.cc_weights @ values)

    @cached_property
    def _cardinal_antiderivatives(self) -> np.ndarray:
        # column j: Chebyshev coefficients (in t = 2x - 1) of the antiderivative of l_j vanishing at t=-1
        vander = chebyshev.chebvander(2.0 * self.nodes - 1.0, self.degree)
        coefficients = np.linalg.solve(vander, np.eye(self.size))
        return chebyshev.chebint(coefficients, lbnd=-1.0, axis=0)

    def cardinal_integrals(self, points) -> np.ndarray:
        """Rows of antiderivatives: A[k, j] = integral of l_j over [0, points[k]]."""
        points = np.atleast_1d(np.asarray(points, dtype=float))
        return 0.5 * chebyshev.chebval(2.0 * points - 1.0, self._cardinal_antiderivatives).T
