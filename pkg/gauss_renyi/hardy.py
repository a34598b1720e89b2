"""Half-line side of the Gauss operator: Bessel kernels on L^2(R+, mu).

With d mu(t) = t / (e^t - 1) dt and the Laplace-type transform

    phi_hat(x) = int_0^inf e^{-tx} phi(t) d mu(t),

the Gauss transfer operator satisfies L_G phi_hat = (K_J phi)_hat, where K_J
has the kernel J_1(2 sqrt(st)) / sqrt(st). The norm formulas for the weighted
composition operators of the branches are evaluated as scalar quadratures.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, special

from gauss_renyi.config import settings
from gauss_renyi.errors import AccuracyError, BesselRangeError
from gauss_renyi.functions import CallableFunction
from gauss_renyi.models.responses import HardyRow
from gauss_renyi.transfer import TailPolicy, apply_LG

SERIES_MAX_X = 40.0
KERNEL_SERIES_MAX_U = 16.0
SERIES_REL_TOL = 1e-17
QUAD_TOL = 1e-8
XI_ETA_MAX_N = 150
DERIVATIVE_ORDER = 6


def mu_density(t):
    """t / (e^t - 1), equal to 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    safe = np.where(t == 0.0, 1.0, t)
    return np.where(t == 0.0, 1.0, safe / np.expm1(safe))


def _mu_over_exp(t):
    """t / (1 - e^{-t}): mu density with the Laguerre weight e^{-t} factored out."""
    t = np.asarray(t, dtype=float)
    safe = np.where(t == 0.0, 1.0, t)
    return np.where(t == 0.0, 1.0, safe / -np.expm1(-safe))


def _bessel_series(x: float, sign: float) -> float:
    if x < 0.0:
        raise ValueError(f"Bessel series needs x >= 0, got {x}")
    if x > SERIES_MAX_X:
        raise BesselRangeError(f"Series unstable beyond x={SERIES_MAX_X}, got {x}")
    half = 0.5 * x
    term = half
    total = term
    k = 0
    while abs(term) >= SERIES_REL_TOL * abs(total) and term != 0.0:
        term *= sign * half * half / ((k + 1) * (k + 2))
        total += term
        k += 1
    return total


def bessel_J1(x: float) -> float:
    return _bessel_series(x, -1.0)


def bessel_I1(x: float) -> float:
    return _bessel_series(x, 1.0)


def _kernel_series(u: np.ndarray, sign: float) -> np.ndarray:
    term = np.ones_like(u)
    total = term.copy()
    k = 0
    while np.any(np.abs(term) >= SERIES_REL_TOL * np.abs(total)) and k < 200:
        term = term * sign * u / ((k + 1) * (k + 2))
        total += term
        k += 1
    return total


def kernel_J(u):
    """J_1(2 sqrt u) / sqrt u for u >= 0."""
    u = np.asarray(u, dtype=float)
    flat = np.atleast_1d(u).ravel()
    out = np.empty_like(flat)
    small = flat <= KERNEL_SERIES_MAX_U
    out[small] = _kernel_series(flat[small], -1.0)
    root = np.sqrt(flat[~small])
    out[~small] = special.j1(2.0 * root) / root
    return out.reshape(u.shape) if u.ndim else float(out[0])


def kernel_I(u):
    """I_1(2 sqrt u) / sqrt u for u >= 0."""
    u = np.asarray(u, dtype=float)
    flat = np.atleast_1d(u).ravel()
    out = np.empty_like(flat)
    small = flat <= KERNEL_SERIES_MAX_U
    out[small] = _kernel_series(flat[small], 1.0)
    root = np.sqrt(flat[~small])
    out[~small] = special.ive(1, 2.0 * root) * np.exp(2.0 * root) / root
    return out.reshape(u.shape) if u.ndim else float(out[0])


def kernel_I_damped(s, t, damping_s: float = 1.0, damping_t: float = 1.0):
    """kernel_I(st) exp(-damping_s s - damping_t t) without overflow."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    u = s * t
    small = u <= KERNEL_SERIES_MAX_U
    damp = damping_s * s + damping_t * t
    root = np.sqrt(np.where(small, 1.0, u))
    large_value = special.ive(1, 2.0 * root) * np.exp(2.0 * root - damp) / root
    small_value = _kernel_series(np.where(small, u, 0.0), 1.0) * np.exp(-damp)
    return np.where(small, small_value, large_value)


@dataclass(frozen=True, eq=False)
class LaguerreRule:
    """Gauss-Laguerre nodes and weights for int_0^inf e^{-t} g(t) dt."""

    count: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes, weights = special.roots_laguerre(self.count)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def integrate(self, g: Callable) -> float:
        return float(self.weights @ np.asarray(g(self.nodes), dtype=float))

    def mu_weights(self) -> np.ndarray:
        """Weights for int g d mu."""
        return self.weights * _mu_over_exp(self.nodes)

    def exactness_defect(self, max_degree: int = 10) -> float:
        """max over k <= max_degree of |rule(t^k) - k!| / k!."""
        return max(
            abs(self.integrate(lambda t: t ** k) - math.factorial(k)) / math.factorial(k)
            for k in range(max_degree + 1)
        )


@lru_cache(maxsize=8)
def laguerre_rule(count: Optional[int] = None) -> LaguerreRule:
    return LaguerreRule(count or settings.LAGUERRE_NODES)


@dataclass(frozen=True)
class HalfLineFunction:
    func: Callable
    name: str = "phi"
    decay: str = "exponential"

    def __call__(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float) * np.ones_like(t, dtype=float)

    def mu_norm(self, rule: Optional[LaguerreRule] = None) -> float:
        rule = rule or laguerre_rule()
        return math.sqrt(float(rule.mu_weights() @ self(rule.nodes) ** 2))


def _as_half_line(g) -> HalfLineFunction:
    return g if isinstance(g, HalfLineFunction) else HalfLineFunction(g)


def _quad_half_line(integrand: Callable) -> float:
    value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=400)
    return value


def _cross_check(primary: float, secondary: float, tol: float, what: str) -> float:
    if abs(primary - secondary) > tol:
        raise AccuracyError(f"{what}: Laguerre {primary!r} vs adaptive {secondary!r}")
    return primary


def apply_KJ(g, s: float, rule: Optional[LaguerreRule] = None, tol: float = QUAD_TOL, check: bool = True) -> float:
    """int kernel_J(st) g(t) d mu(t)."""
    if s < 0.0:
        raise ValueError(f"s must be >= 0, got {s}")
    g = _as_half_line(g)
    rule = rule or laguerre_rule()
    value = float(rule.mu_weights() @ (kernel_J(s * rule.nodes) * g(rule.nodes)))
    if not check:
        return value
    adaptive = _quad_half_line(lambda t: kernel_J(s * t) * float(g(t)) * float(mu_density(t)))
    return _cross_check(value, adaptive, tol, f"K_J at s={s}")


def apply_KI(g, s: float, rule: Optional[LaguerreRule] = None, tol: float = QUAD_TOL, check: bool = True) -> float:
    """int kernel_I(st) e^{-(s+t)} g(t) dt."""
    if s < 0.0:
        raise ValueError(f"s must be >= 0, got {s}")
    g = _as_half_line(g)
    rule = rule or laguerre_rule()
    # the rule carries e^{-t}; what is left is kernel_I(st) e^{-s}
    value = float(rule.weights @ (kernel_I_damped(s, rule.nodes, 1.0, 0.0) * g(rule.nodes)))
    if not check:
        return value
    adaptive = _quad_half_line(lambda t: float(kernel_I_damped(s, t)) * float(g(t)))
    return _cross_check(value, adaptive, tol, f"K_I at s={s}")


def kj_matrix(rule: LaguerreRule) -> np.ndarray:
    """Discrete K_J: (K @ g(nodes))[i] = sum_j kernel_J(t_i t_j) mu_j g(t_j)."""
    return kernel_J(np.outer(rule.nodes, rule.nodes)) * rule.mu_weights()[None, :]


def mu_inner(phi, psi, rule: Optional[LaguerreRule] = None) -> float:
    rule = rule or laguerre_rule()
    return float(rule.mu_weights() @ (_as_half_line(phi)(rule.nodes) * _as_half_line(psi)(rule.nodes)))


def kj_bilinear(phi, psi, rule: Optional[LaguerreRule] = None) -> float:
    """<K_J phi, psi> in L^2(mu), with K_J phi evaluated by apply_KJ at the nodes."""
    rule = rule or laguerre_rule()
    phi = _as_half_line(phi)
    image = np.array([apply_KJ(phi, s, rule, check=False) for s in rule.nodes])
    return float(rule.mu_weights() @ (image * _as_half_line(psi)(rule.nodes)))


def laplace_hat(phi, x, rule: Optional[LaguerreRule] = None, tol: float = QUAD_TOL, check: bool = False):
    """int e^{-tx} phi(t) d mu(t), vectorized over x >= 0."""
    phi = _as_half_line(phi)
    rule = rule or laguerre_rule()
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0.0):
        raise ValueError("laplace_hat needs x >= 0")
    values = np.exp(-np.outer(xs, rule.nodes)) @ (rule.mu_weights() * phi(rule.nodes))
    if check:
        for xi, v in zip(xs, values):
            adaptive = _quad_half_line(lambda t: math.exp(-t * xi) * float(phi(t)) * float(mu_density(t)))
            _cross_check(float(v), adaptive, tol, f"phi_hat at x={xi}")
    return float(values[0]) if np.ndim(x) == 0 else values


def laplace_hat_function(phi, rule: Optional[LaguerreRule] = None) -> CallableFunction:
    """phi_hat on [0, 1] with derivatives int (-t)^r e^{-tx} phi(t) d mu(t)."""
    phi = _as_half_line(phi)
    rule = rule or laguerre_rule()

    def derivative(r):
        weighted = HalfLineFunction(lambda t: (-t) ** r * phi(t))
        return lambda x: laplace_hat(weighted, x, rule)

    return CallableFunction(
        lambda x: laplace_hat(phi, x, rule),
        [derivative(r) for r in range(1, DERIVATIVE_ORDER + 1)],
        name=f"{phi.name}_hat",
    )


def commuting_residual(
    phi,
    x_grid: Sequence[float],
    rule: Optional[LaguerreRule] = None,
    policy: Optional[TailPolicy] = None,
) -> float:
    """max over x_grid of |L_G phi_hat(x) - (K_J phi)_hat(x)|."""
    phi = _as_half_line(phi)
    rule = rule or laguerre_rule()
    x = np.asarray(x_grid, dtype=float)
    lhs = np.atleast_1d(apply_LG(laplace_hat_function(phi, rule), x, policy))
    image = kj_matrix(rule) @ phi(rule.nodes)
    rhs = np.exp(-np.outer(x, rule.nodes)) @ (rule.mu_weights() * image)
    residual = float(np.max(np.abs(lhs - rhs)))
    logging.debug(f"Commuting residual for {phi.name}: {residual:.3e}")
    return residual


def hs_integrand(n: int, t):
    """|psi_n(it)|^2 / Re phi_n(it) with psi_n(z) = (n+z)^-2 and phi_n(z) = (n+z)^-1."""
    z = n + 1j * np.asarray(t, dtype=float)
    return np.abs(z ** -2) ** 2 / np.real(1.0 / z)


def hs_norm(n: int) -> float:
    """Hilbert-Schmidt norm of the n-th Gauss branch operator; equals 1/(2n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    # t = n tan(theta) maps the real line onto (-pi/2, pi/2)
    value, _ = integrate.quad(
        lambda theta: float(hs_integrand(n, n * math.tan(theta))) * n / math.cos(theta) ** 2,
        -0.5 * math.pi,
        0.5 * math.pi,
        epsabs=1e-14,
        epsrel=1e-13,
    )
    return math.sqrt(value / (4.0 * math.pi))


def trace_norm_bound(n: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (2 * n ** 3 + 3 * n ** 2 + n) ** -0.5


def trace_norm_quadrature(n: int) -> float:
    """sqrt((1/pi) int dt / (|n+it|^2 |n+1+it|^2)), the reduction behind trace_norm_bound."""
    value, _ = integrate.quad(
        lambda t: 1.0 / ((n * n + t * t) * ((n + 1) ** 2 + t * t)), -np.inf, np.inf, epsabs=1e-15, epsrel=1e-13
    )
    return math.sqrt(value / math.pi)


def opnorm_bound_gauss(n: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 / (n * math.sqrt(n + 1))


def opnorm_bound_Bpow(m: int) -> float:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return math.sqrt(m + 1)


def nuclear_norm_bound(n: int) -> float:
    """Trace bound of the n-th Renyi branch operator, at most 2/n^{3/2}."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return trace_norm_bound(n) * (2 * n - 1) / (2 * n - 2)


def _series_with_tail(terms: Callable, start: int, tail: Callable, cut: int = 1_000_000) -> float:
    n = np.arange(start, cut + 1, dtype=float)
    return float(np.sum(terms(n)[::-1])) + tail(cut)


def renyi_nuclear_bound(p: float) -> float:
    """(1-p) sum_{n>=2} nuclear_norm_bound(n)."""

    def terms(n):
        return (2 * n ** 3 + 3 * n ** 2 + n) ** -0.5 * (2 * n - 1) / (2 * n - 2)

    # terms ~ n^{-3/2} / sqrt(2)
    return (1.0 - p) * _series_with_tail(terms, 2, lambda N: math.sqrt(2.0 / (N + 0.5)))


def gauss_part_norm_bound(p: float) -> float:
    """p sum_{n>=1} 1/(n sqrt(n+1))."""
    return p * _series_with_tail(lambda n: 1.0 / (n * np.sqrt(n + 1)), 1, lambda N: 2.0 / math.sqrt(N + 0.5))


def resolvent_norm_bound(p: float) -> float:
    """sum_{m>=0} (1-p)^m sqrt(m+1)."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"resolvent_norm_bound needs 0 < p <= 1, got {p}")
    q = 1.0 - p
    total, m, term = 0.0, 0, 1.0
    while term > 1e-17 * max(total, 1.0):
        term = q ** m * math.sqrt(m + 1)
        total += term
        m += 1
    return total


class XiEtaNorms(NamedTuple):
    xi_sq: float
    eta_sq: float
    eta_sq_quadrature: float


def eta_sq_closed_form(n: int) -> float:
    """(2n)! / ((n!)^2 2^{2n+1}), the squared norm of t^n e^{-t} / n!."""
    return math.exp(math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - (2 * n + 1) * math.log(2.0))


def xi_eta_norms(n: int, rule: Optional[LaguerreRule] = None) -> XiEtaNorms:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n > XI_ETA_MAX_N:
        raise BesselRangeError(f"xi/eta norms overflow beyond n={XI_ETA_MAX_N}, got {n}")
    rule = rule or laguerre_rule()
    u = rule.nodes

    # int t^{2n} e^{-2t} dt / (n!)^2 with u = 2t
    log_eta = 2 * n * np.log(u) - 2 * math.lgamma(n + 1) - (2 * n + 1) * math.log(2.0)
    eta_quad = float(rule.weights @ np.exp(log_eta))

    # int s^{2n+2} e^{-4s} / (1 - e^{-s})^2 ds / ((n+1)!)^2 with u = 4s
    s = 0.25 * u
    log_xi = (2 * n + 2) * np.log(s) - 2 * math.lgamma(n + 2) - math.log(4.0)
    xi_quad = float(rule.weights @ (np.exp(log_xi) / np.expm1(-s) ** 2))

    return XiEtaNorms(xi_quad, eta_sq_closed_form(n), eta_quad)


def hardy_table(n_max: int, rule: Optional[LaguerreRule] = None) -> List[HardyRow]:
    rows = []
    for n in range(1, n_max + 1):
        norms = xi_eta_norms(n, rule)
        rows.append(
            HardyRow(
                n=n,
                hs=hs_norm(n),
                trace_bound=trace_norm_bound(n),
                op_bound=opnorm_bound_gauss(n),
                eta_sq=norms.eta_sq,
                xi_sq=norms.xi_sq,
            )
        )
    return rows
