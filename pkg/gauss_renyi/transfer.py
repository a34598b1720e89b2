"""Pointwise application of the random Gauss-Renyi transfer operator.

    L_p f(x) = sum_{n>=1} [p f(1/(n+x)) + (1-p) f(1-1/(n+x))] / (n+x)**2

The series is summed to N and the remainder is replaced by its Taylor
expansion around the accumulation points 0 (Gauss side) and 1 (Renyi side),
whose coefficients are Hurwitz zeta values zeta(j+2, N+1+x).
"""
import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, special

from gauss_renyi import branch_algebra
from gauss_renyi.chebyshev import CollocationGrid
from gauss_renyi.config import settings
from gauss_renyi.errors import EnumerationSizeError, InvalidIntervalError, TruncationError
from gauss_renyi.functions import CallableFunction, FunctionRep

MAX_TAIL_ORDER = 4
MAX_ENUMERATED_WORDS = 5_000_000
INVARIANCE_TAIL_ORDER = 4
ZETA_2 = math.pi ** 2 / 6


class TailPolicy(BaseModel):
    """
    How the infinite branch sum is cut and corrected.

    Attributes:
        N: number of explicitly summed branches per map
        order: highest Taylor order of the remainder correction, 0..4
        tol: target absolute error of one operator evaluation
        strict: raise TruncationError when the estimate exceeds tol
    """

    model_config = ConfigDict(frozen=True)

    N: int = Field(default_factory=lambda: settings.TAIL_N, ge=2)
    order: int = Field(default_factory=lambda: settings.TAIL_ORDER, ge=0, le=MAX_TAIL_ORDER)
    tol: float = Field(default_factory=lambda: settings.TAIL_TOL, gt=0)
    strict: bool = True


class TailReport(NamedTuple):
    value: object
    error_estimate: float


class IteratedSum(NamedTuple):
    value: float
    neglected_bound: float
    words: int


def as_function(f) -> FunctionRep:
    return f if isinstance(f, FunctionRep) else CallableFunction(f)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability p must lie in [0, 1], got {p}")


def tail_coefficients(x, policy: TailPolicy, extra: int = 0) -> np.ndarray:
    """zeta(j+2, N+1+x) for j = 0..order+extra, shape (order+extra+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j = np.arange(policy.order + extra + 1)[:, None]
    return special.zeta(j + 2.0, policy.N + 1.0 + x[None, :])


def taylor_weights(order: int, endpoint: int) -> np.ndarray:
    """1/j! at x=0 and (-1)^j/j! at x=1; expansion of f(e + (-1)^e u) in powers of u."""
    j = np.arange(order + 1)
    factorials = np.array([math.factorial(k) for k in j], dtype=float)
    signs = 1.0 if endpoint == 0 else (-1.0) ** j
    return signs / factorials


def _side_sum(f: FunctionRep, x: np.ndarray, side: int, policy: TailPolicy) -> Tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, policy.N + 1, dtype=float)[:, None]
    u = 1.0 / (n + x[None, :])
    points = u if side == 0 else 1.0 - u
    head = np.sum(np.asarray(f(points.ravel()), dtype=float).reshape(points.shape) * u * u, axis=0)

    derivatives = f.endpoint_derivatives(side, policy.order + 1)
    coeffs = tail_coefficients(x, policy, extra=1)
    scaled = taylor_weights(policy.order + 1, side) * derivatives
    tail = scaled[:-1] @ coeffs[:-1]
    estimate = np.abs(scaled[-1] * coeffs[-1])
    return head + tail, estimate


def apply_Lp_report(p: float, f, x, policy: Optional[TailPolicy] = None) -> TailReport:
    """L_p f at x (scalar or array) together with the first omitted tail term."""
    _check_p(p)
    policy = policy or TailPolicy()
    f = as_function(f)
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xs < 0.0) | (xs > 1.0)):
        raise ValueError("Evaluation points must lie in [0, 1]")

    value = np.zeros_like(xs)
    estimate = np.zeros_like(xs)
    for side, weight in ((0, p), (1, 1.0 - p)):
        if weight == 0.0:
            continue
        part, err = _side_sum(f, xs, side, policy)
        value += weight * part
        estimate += weight * err

    worst = float(np.max(estimate))
    return TailReport(float(value[0]) if scalar else value, worst)


def apply_Lp(p: float, f, x, policy: Optional[TailPolicy] = None):
    policy = policy or TailPolicy()
    report = apply_Lp_report(p, f, x, policy)
    if policy.strict and report.error_estimate > policy.tol:
        raise TruncationError(
            f"Tail estimate {report.error_estimate:.3e} exceeds tol {policy.tol:.1e} "
            f"at N={policy.N}, order={policy.order}",
            estimate=report.error_estimate,
        )
    return report.value


def apply_LG(f, x, policy: Optional[TailPolicy] = None):
    """Gauss-map transfer operator, L_p at p=1."""
    return apply_Lp(1.0, f, x, policy)


def apply_LR(f, x, policy: Optional[TailPolicy] = None):
    """Renyi-map transfer operator, L_p at p=0."""
    return apply_Lp(0.0, f, x, policy)


def iterated_neglected_bound(m: int, N_trunc: int) -> float:
    """Union bound on the mass of words of length m with some index above N_trunc."""
    return m * float(special.polygamma(1, N_trunc + 1)) * ZETA_2 ** (m - 1)


def apply_iterated(p: float, f, x: float, m: int, N_trunc: int) -> IteratedSum:
    """L_p^m f(x) as the sum over branch words of length m with all indices <= N_trunc."""
    _check_p(p)
    if m < 1:
        raise ValueError(f"Iterate count must be at least 1, got {m}")
    words = (2 * N_trunc) ** m
    if words > MAX_ENUMERATED_WORDS:
        raise EnumerationSizeError(
            f"{words} branch words for m={m}, N={N_trunc} exceed the limit {MAX_ENUMERATED_WORDS}"
        )
    f = as_function(f)

    points = np.empty(words)
    weights = np.empty(words)
    for k, word in enumerate(branch_algebra.iter_words(m, N_trunc)):
        M = branch_algebra.compose(word)
        points[k] = M(x)
        weights[k] = branch_algebra.word_weight(word, p, x, matrix=M)

    value = float(np.sum(weights * np.asarray(f(points), dtype=float)))
    bound = iterated_neglected_bound(m, N_trunc) * f.sup_norm()
    logging.debug(f"Iterated sum over {words} words, neglected bound {bound:.3e}")
    return IteratedSum(value, bound, words)


def markov_residual(p: float, f, quad_nodes: int = 129, policy: Optional[TailPolicy] = None) -> float:
    """|int L_p f - int f| by Clenshaw-Curtis quadrature on quad_nodes points."""
    f = as_function(f)
    grid = CollocationGrid(quad_nodes - 1)
    image = apply_Lp(p, f, grid.nodes, policy)
    return abs(grid.integrate(image) - grid.integrate(np.asarray(f(grid.nodes), dtype=float)))


def _quad(h: FunctionRep, lo: float, hi: float) -> float:
    value, _ = integrate.quad(lambda t: float(h(t)), lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
    return value


def preimage_pieces(a: float, b: float, N: int) -> Sequence:
    """Intervals of T0^{-1}[a,b] and T1^{-1}[a,b] for branch indices n <= N."""
    gauss = [(1.0 / (b + n), 1.0 / (a + n)) for n in range(1, N + 1)]
    renyi = [(1.0 - 1.0 / (a + n), 1.0 - 1.0 / (b + n)) for n in range(1, N + 1)]
    return gauss, renyi


def _tail_moments(a: float, b: float, N: int, order: int) -> np.ndarray:
    """sum over n > N of int u^j du over [1/(n+b), 1/(n+a)], j = 0..order."""
    j = np.arange(1, order + 1, dtype=float)
    higher = (special.zeta(j + 1.0, N + 1 + a) - special.zeta(j + 1.0, N + 1 + b)) / (j + 1.0)
    return np.r_[float(special.digamma(N + 1 + b) - special.digamma(N + 1 + a)), higher]


def invariance_residual(h, p: float, interval: Tuple[float, float], N: int = 100) -> float:
    """|mu(A) - p mu(T0^{-1} A) - (1-p) mu(T1^{-1} A)| for A = [a, b] and d mu = h dx."""
    _check_p(p)
    a, b = interval
    if not 0.0 <= a < b <= 1.0:
        raise InvalidIntervalError(f"Need 0 <= a < b <= 1, got [{a}, {b}]")
    h = as_function(h)

    mass = _quad(h, a, b)
    gauss_pieces, renyi_pieces = preimage_pieces(a, b, N)
    moments = _tail_moments(a, b, N, INVARIANCE_TAIL_ORDER)

    preimage = 0.0
    for side, weight, pieces in ((0, p, gauss_pieces), (1, 1.0 - p, renyi_pieces)):
        if weight == 0.0:
            continue
        # pieces with n > N hug the endpoint: Taylor-expand h there
        taylor = taylor_weights(INVARIANCE_TAIL_ORDER, side) * h.endpoint_derivatives(side, INVARIANCE_TAIL_ORDER)
        side_mass = sum(_quad(h, lo, hi) for lo, hi in pieces) + float(taylor @ moments)
        preimage += weight * side_mass

    return abs(mass - preimage)
