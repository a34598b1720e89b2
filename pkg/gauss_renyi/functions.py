"""Real functions on [0, 1] as seen by the transfer operators.

A ``FunctionRep`` can be evaluated anywhere on [0, 1] and reports its Taylor
data at the two endpoints, which the series tail correction needs.
"""
import math
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Chebyshev

from gauss_renyi.chebyshev import CollocationGrid

# Length of the end segment used to differentiate plain callables
END_SEGMENT = 0.125
END_SEGMENT_DEGREE = 20
# series terms times points evaluated per block by LiftedFunction
LIFT_BLOCK = 1 << 14


class FunctionRep(ABC):
    @abstractmethod
    def __call__(self, x):
        ...

    @abstractmethod
    def endpoint_derivatives(self, endpoint: int, order: int) -> np.ndarray:
        """f(e), f'(e), ..., f^(order)(e) for e = endpoint in {0, 1}."""

    def sup_norm(self, samples: int = 1001) -> float:
        return float(np.max(np.abs(self(np.linspace(0.0, 1.0, samples)))))


class CallableFunction(FunctionRep):
    """A plain callable, optionally with explicit derivative callables.

    Without explicit derivatives the endpoint Taylor data come from a degree-20
    Chebyshev interpolant on the end segment of length 1/8.
    """

    def __init__(
        self,
        func: Callable,
        derivatives: Optional[Sequence[Callable]] = None,
        name: str = "f",
    ):
        self.func = func
        self.derivatives = list(derivatives or [])
        self.name = name
        self._fits = {}

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def _end_fit(self, endpoint: int) -> Chebyshev:
        if endpoint not in self._fits:
            domain = [0.0, END_SEGMENT] if endpoint == 0 else [1.0 - END_SEGMENT, 1.0]
            self._fits[endpoint] = Chebyshev.interpolate(
                lambda t: self.func(np.asarray(t, dtype=float)), END_SEGMENT_DEGREE, domain=domain
            )
        return self._fits[endpoint]

    def endpoint_derivatives(self, endpoint: int, order: int) -> np.ndarray:
        values = np.empty(order + 1)
        values[0] = float(self.func(np.asarray(float(endpoint))))
        fit = None
        for j in range(1, order + 1):
            if j <= len(self.derivatives):
                values[j] = float(self.derivatives[j - 1](np.asarray(float(endpoint))))
            else:
                if fit is None:
                    fit = self._end_fit(endpoint)
                values[j] = float(fit.deriv(j)(float(endpoint)))
        return values

    def __add__(self, other: "CallableFunction") -> "CallableFunction":
        return linear_combination([(1.0, self), (1.0, other)])

    def __rmul__(self, alpha: float) -> "CallableFunction":
        return linear_combination([(alpha, self)])


def linear_combination(terms: Sequence) -> CallableFunction:
    """sum(alpha * f) over (alpha, f) pairs; derivative callables combine when all terms have them."""
    terms = list(terms)

    def func(x):
        return sum(alpha * f(x) for alpha, f in terms)

    depth = min(len(f.derivatives) for _, f in terms)
    derivatives = [
        (lambda j: lambda x: sum(alpha * f.derivatives[j](x) for alpha, f in terms))(j)
        for j in range(depth)
    ]
    return CallableFunction(func, derivatives, name="+".join(f.name for _, f in terms))


class NodalFunction(FunctionRep):
    """Values at the nodes of a collocation grid plus barycentric interpolation."""

    def __init__(self, grid: CollocationGrid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.size,):
            raise ValueError(f"Expected {grid.size} nodal values, got shape {values.shape}")
        self.grid = grid
        self.values = values

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.grid.interpolate(self.values, x.ravel())
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def endpoint_derivatives(self, endpoint: int, order: int) -> np.ndarray:
        at_zero, at_one = self.grid.endpoint_derivative_rows(order)
        rows = at_zero if endpoint == 0 else at_one
        return rows @ self.values

    def integral(self) -> float:
        return self.grid.integrate(self.values)

    def antiderivative(self, x) -> np.ndarray:
        """Integral of the interpolant over [0, x]."""
        return self.grid.cardinal_integrals(x) @ self.values

    def sup_norm(self, samples: int = 1001) -> float:
        return max(super().sup_norm(samples), float(np.max(np.abs(self.values))))


class LiftedFunction(FunctionRep):
    """A nodal function g pushed through the resolvent of the Renyi n=1 branch.

        h(x) = c * sum_{m>=0} q^m g(x/(1+mx)) / (1+mx)^2

    with c chosen so that h integrates to 1. The maps x/(1+mx) pile up at 0, so h
    carries a steep layer there even when g is smooth.
    """

    def __init__(self, base: NodalFunction, q: float, terms: int):
        if not 0.0 <= q < 1.0:
            raise ValueError(f"Lift ratio must lie in [0, 1), got {q}")
        self.base = base
        self.q = q
        self.terms = max(terms, 1)
        self.m = np.arange(self.terms, dtype=float)
        self.coefficients = q ** self.m
        self.scale = 1.0
        self.scale = 1.0 / self.antiderivative(1.0)
        self._end = CallableFunction(self, name="lifted")

    @property
    def grid(self) -> CollocationGrid:
        return self.base.grid

    @cached_property
    def values(self) -> np.ndarray:
        return self(self.grid.nodes)

    def _series(self, x, term: Callable):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        step = max(1, LIFT_BLOCK // len(self.m))
        for start in range(0, len(flat), step):
            chunk = flat[start:start + step]
            stretch = 1.0 + np.outer(self.m, chunk)
            out[start:start + step] = self.coefficients @ term(chunk / stretch, stretch)
        out = self.scale * out.reshape(x.shape)
        return out if x.ndim else float(out)

    def __call__(self, x):
        return self._series(x, lambda y, stretch: self.base(y) / stretch ** 2)

    def antiderivative(self, x):
        """Integral over [0, x]; term m integrates g over [0, x/(1+mx)]."""
        return self._series(x, lambda y, _: self.base.antiderivative(y.ravel()).reshape(y.shape))

    def integral(self) -> float:
        return self.antiderivative(1.0)

    def endpoint_derivatives(self, endpoint: int, order: int) -> np.ndarray:
        if endpoint == 1:
            return self._end.endpoint_derivatives(1, order)
        j = np.arange(order + 1)
        factorials = np.array([math.factorial(k) for k in j], dtype=float)
        taylor = self.base.endpoint_derivatives(0, order) / factorials
        moments = np.array([self.coefficients @ self.m ** i for i in j])
        # x^k (1+mx)^-(k+2) puts (-1)^r C(k+1+r, r) m^r on x^(k+r)
        series = np.array([
            sum(taylor[k] * (-1) ** (i - k) * math.comb(i + 1, i - k) * moments[i - k] for k in range(i + 1))
            for i in j
        ])
        return self.scale * factorials * series


def constant(c: float = 1.0) -> CallableFunction:
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return CallableFunction(
        lambda x: np.full_like(np.asarray(x, dtype=float), c), [zero] * 6, name=f"const{c:g}"
    )


def monomial(k: int) -> CallableFunction:
    """x**k with exact derivatives."""

    def derivative(j):
        coeff = math.perm(k, j)
        return lambda x: coeff * np.asarray(x, dtype=float) ** (k - j) if j <= k else 0.0 * x

    return CallableFunction(
        lambda x: np.asarray(x, dtype=float) ** k,
        [derivative(j) for j in range(1, 7)],
        name=f"x^{k}",
    )


def polynomial(coefficients: Sequence[float]) -> CallableFunction:
    """sum c_k x**k from ascending coefficients."""
    poly = np.polynomial.Polynomial(coefficients)
    derivatives = [(lambda j: lambda x: poly.deriv(j)(np.asarray(x, dtype=float)))(j) for j in range(1, 7)]
    return CallableFunction(lambda x: poly(np.asarray(x, dtype=float)), derivatives, name="poly")


def gauss_density() -> CallableFunction:
    """1/((1+x) log 2), invariant for the Gauss map."""
    log2 = math.log(2.0)

    def derivative(j):
        return lambda x: (-1) ** j * math.factorial(j) / ((1.0 + np.asarray(x, dtype=float)) ** (j + 1) * log2)

    return CallableFunction(
        lambda x: 1.0 / ((1.0 + np.asarray(x, dtype=float)) * log2),
        [derivative(j) for j in range(1, 7)],
        name="gauss_density",
    )


def renyi_density() -> CallableFunction:
    """1/x, the sigma-finite invariant density of the Renyi map (singular at 0)."""

    def derivative(j):
        return lambda x: (-1) ** j * math.factorial(j) / np.asarray(x, dtype=float) ** (j + 1)

    return CallableFunction(
        lambda x: 1.0 / np.asarray(x, dtype=float),
        [derivative(j) for j in range(1, 7)],
        name="renyi_density",
    )
