"""Computable bounds on the essential spectral radius of L_p on C^k([0,1]).

r_ess <= zeta(2k+2) - min(p, 1-p), together with the branch sums V_p^(t),
empirical suprema Q_m^(k) over branch words and the Stirling numbers that
enter the C^k estimate of a composition.
"""
import logging
import math
from fractions import Fraction
from typing import List, NamedTuple, Tuple

import numpy as np

from gauss_renyi.branch_algebra import BranchIndex, MoebiusMatrix, branch_matrix
from gauss_renyi.errors import DomainRefusal, EnumerationSizeError
from gauss_renyi.models.responses import BoundReport, BoundsTable

MAX_Q_LEAVES = 5_000_000
Q_PRUNE = 1e-16
Q_GRID_POINTS = 101


class VSum(NamedTuple):
    partial: float
    lower: float
    upper: float


class QEstimate(NamedTuple):
    value: float
    dropped_bound: float
    chain_bound: float
    leaves: int


def _zeta_terms(s: float, N: int) -> Tuple[float, float]:
    """Euler-Maclaurin value at cut N and the size of the first omitted correction."""
    partial = math.fsum(n ** -s for n in range(1, N))
    rising = [math.prod(s + i for i in range(r)) for r in (1, 3, 5, 7)]
    tail = (
        N ** (1.0 - s) / (s - 1.0)
        + 0.5 * N ** -s
        + rising[0] * N ** (-s - 1.0) / 12.0
        - rising[1] * N ** (-s - 3.0) / 720.0
        + rising[2] * N ** (-s - 5.0) / 30240.0
    )
    omitted = rising[3] * N ** (-s - 7.0) / 1209600.0
    return partial + tail, omitted


def zeta(s: float, tol: float = 1e-13) -> float:
    """Riemann zeta for real s > 1, to absolute error tol."""
    if s <= 1.0:
        raise DomainRefusal(f"zeta(s) diverges for s <= 1, got s={s}")
    N = 8
    value, omitted = _zeta_terms(s, N)
    while omitted > tol:
        N *= 2
        value, omitted = _zeta_terms(s, N)
    return value


def _check_open_p(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"Probability p must lie in (0, 1), got {p}")


def ess_radius_bound(p: float, k: int) -> BoundReport:
    _check_open_p(p)
    if k < 1:
        raise DomainRefusal(f"The C^k bound needs k >= 1, got k={k}")
    zeta_value = zeta(2 * k + 2)
    bound = zeta_value - min(p, 1.0 - p)
    return BoundReport(p=p, k=k, zeta_value=zeta_value, bound=bound, quasi_compact=bound < 1.0)


def min_quasicompact_k(p: float, k_max: int = 64) -> int:
    """Smallest k >= 1 whose bound drops below 1."""
    _check_open_p(p)
    for k in range(1, k_max + 1):
        if ess_radius_bound(p, k).quasi_compact:
            return k
    raise DomainRefusal(f"No k <= {k_max} gives a bound below 1 for p={p}")


def ck_norm_constant(k: int) -> int:
    """Per-branch C^k constant (2k)^k."""
    return (2 * k) ** k


def bounds_table(p: float, k_max: int) -> BoundsTable:
    rows = [ess_radius_bound(p, k) for k in range(1, k_max + 1)]
    return BoundsTable(
        p=p,
        rows=rows,
        min_quasicompact_k=min_quasicompact_k(p),
        ck_constants=[ck_norm_constant(k) for k in range(1, k_max + 1)],
    )


def V_p(t: int, n: int, p: float) -> float:
    """max(p,1-p)/n^t + min(p,1-p)/(n+1)^t."""
    if t < 4 or t % 2:
        raise ValueError(f"t must be an even integer >= 4, got {t}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability p must lie in [0, 1], got {p}")
    return max(p, 1.0 - p) / n ** t + min(p, 1.0 - p) / (n + 1) ** t


def V_p_sum(t: int, p: float, N: int) -> VSum:
    """Partial sum to N with a certified bracket of the full series."""
    partial = math.fsum(V_p(t, n, p) for n in range(1, N + 1))
    # sum_{n>N} n^-t lies between the integrals from N+1 and from N
    lo_tail = (N + 1) ** (1 - t) / (t - 1)
    hi_tail = N ** (1 - t) / (t - 1)
    big, small = max(p, 1.0 - p), min(p, 1.0 - p)
    lower = partial + big * lo_tail + small * (N + 2) ** (1 - t) / (t - 1)
    upper = partial + big * hi_tail + small * (N + 1) ** (1 - t) / (t - 1)
    return VSum(partial, lower, upper)


def _subtree_dropped(weight: float, D: int, n_from: int, t: int, factor: float) -> float:
    """Bound on the words below a prefix whose next index is >= n_from."""
    return weight * float(D) ** -t * (n_from ** -t + n_from ** (1 - t) / (t - 1)) * factor


def empirical_Q(
    p: float,
    k: int,
    m: int,
    N_trunc: int,
    grid_points: int = Q_GRID_POINTS,
    prune: float = Q_PRUNE,
) -> QEstimate:
    """sup over a uniform grid of sum_w word_weight(w, p, x) |b_w'(x)|^k over words of length m.

    Depth-first over words with indices n <= N_trunc; a child whose weight at x=0 is
    below ``prune`` ends the scan of larger n (D grows with n), and the skipped
    subtrees are charged to ``dropped_bound``.
    """
    if not 1 <= m <= 4:
        raise ValueError(f"Word length m must be between 1 and 4, got {m}")
    if k < 1:
        raise DomainRefusal(f"The C^k bound needs k >= 1, got k={k}")
    t = 2 * k + 2
    zeta_t = zeta(t)
    coins = (p, 1.0 - p)

    leaves_P: List[float] = []
    leaves_C: List[int] = []
    leaves_D: List[int] = []
    dropped = 0.0

    def visit(prefix: MoebiusMatrix, weight: float, remaining: int) -> None:
        nonlocal dropped
        factor = zeta_t ** (remaining - 1)
        n = 1
        while n <= N_trunc:
            kept = False
            skipped = 0.0
            for omega in (0, 1):
                if coins[omega] == 0.0:
                    continue
                child = prefix @ branch_matrix(BranchIndex(n, omega))
                child_weight = weight * coins[omega]
                if child_weight * float(child.D) ** -t < prune:
                    skipped += child_weight * float(child.D) ** -t * factor
                    continue
                kept = True
                if remaining == 1:
                    leaves_P.append(child_weight)
                    leaves_C.append(child.C)
                    leaves_D.append(child.D)
                    if len(leaves_P) > MAX_Q_LEAVES:
                        raise EnumerationSizeError(
                            f"More than {MAX_Q_LEAVES} words survive pruning for m={m}, N={N_trunc}"
                        )
                else:
                    visit(child, child_weight, remaining - 1)
            if not kept:
                break
            dropped += skipped
            n += 1
        dropped += _subtree_dropped(weight, prefix.D, n, t, factor)

    visit(MoebiusMatrix(1, 0, 0, 1), 1.0, m)

    x = np.linspace(0.0, 1.0, grid_points)
    P = np.asarray(leaves_P)
    C = np.asarray(leaves_C, dtype=float)
    D = np.asarray(leaves_D, dtype=float)
    sums = np.array([np.sum(P * (C * xi + D) ** -t) for xi in x])
    chain = (zeta_t - min(p, 1.0 - p)) ** (m - 1) * zeta_t

    logging.debug(f"Q_{m}^({k}) at p={p}: {len(P)} words, dropped bound {dropped:.3e}")
    return QEstimate(float(np.max(sums)), dropped, chain, len(P))


def stirling2(m: int, j: int) -> int:
    """Stirling number of the second kind by the alternating binomial formula."""
    if j < 0 or m < 0 or j > m:
        raise DomainRefusal(f"S(m, j) needs 0 <= j <= m, got m={m}, j={j}")
    total = sum((-1) ** i * math.comb(j, i) * (j - i) ** m for i in range(j + 1))
    return total // math.factorial(j)


def stirling2_recurrence(m: int, j: int) -> int:
    """S(m, j) = j S(m-1, j) + S(m-1, j-1) by tabulation."""
    if j < 0 or m < 0 or j > m:
        raise DomainRefusal(f"S(m, j) needs 0 <= j <= m, got m={m}, j={j}")
    row = [1] + [0] * j
    for _ in range(m):
        row = [0] + [i * row[i] + row[i - 1] for i in range(1, j + 1)]
    return row[j]


def bell_number(m: int) -> int:
    return sum(stirling2(m, j) for j in range(m + 1))


def stirling2_upper_bound(m: int, j: int) -> Fraction:
    """C(m, j) j^(m-j) / 2."""
    return Fraction(math.comb(m, j) * j ** (m - j), 2)


def stirling_bound_violations(m_max: int) -> List[Tuple[int, int]]:
    """Pairs 1 <= j <= m <= m_max where S(m, j) exceeds C(m, j) j^(m-j) / 2."""
    return [
        (m, j)
        for m in range(1, m_max + 1)
        for j in range(1, m + 1)
        if stirling2(m, j) > stirling2_upper_bound(m, j)
    ]
