"""Sub-Markov splits L_p = A_p + B_p and the modified operator A_p (1 - B_p)^{-1}.

BanachSplit puts both n=1 branches into B_p; HardySplit keeps only the Renyi
n=1 branch, whose iterates have the closed form

    B^m f(x) = (1-p)^m / (1+mx)^2 f(x / (1+mx)).

A fixed point h_hat of the modified operator lifts to the fixed point J h_hat
of L_p.
"""
import logging
import math
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from gauss_renyi.chebyshev import CollocationGrid
from gauss_renyi.collocation import (
    OperatorMatrix,
    OperatorTag,
    branch_operator_matrix,
    build_matrix,
    density,
    leading_pair,
)
from gauss_renyi.errors import ConditioningError, ConsistencyError, DomainRefusal
from gauss_renyi.functions import FunctionRep, NodalFunction, constant
from gauss_renyi.models.responses import SplitReport
from gauss_renyi.transfer import TailPolicy, apply_Lp, as_function

HARDY_MIN_P = 0.01
MAX_CONDITION = 1e12
NEUMANN_TARGET = 1e-12
MAX_NEUMANN_TERMS = 20000
IDENTITY_TOL = 1e-14
LIFT_NEGATIVITY_TOL = 1e-9
B_NORM_GRID = 101


class SplitKind(str, Enum):
    BANACH = "banach"
    HARDY = "hardy"


class NeumannDiagnostics(NamedTuple):
    terms: int
    residual: float
    ratio: float
    ratio_bound: float


def _check_split(split: SplitKind, p: float, resolvent: bool = False) -> SplitKind:
    """Validate the split and p; resolvent=True adds the HardySplit guard on I - B."""
    split = SplitKind(split)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability p must lie in [0, 1], got {p}")
    if resolvent and split == SplitKind.HARDY and p < HARDY_MIN_P:
        raise DomainRefusal(
            f"HardySplit needs p >= {HARDY_MIN_P}: I - B degenerates at the indifferent fixed point (p={p})"
        )
    if resolvent and p == 0.0:
        # at p=0 both splits hold only the Renyi n=1 branch
        raise DomainRefusal(f"{split.value} split has no invertible I - B at p=0")
    return split


def split_branches(split: SplitKind, p: float) -> list:
    """(n, omega, coin) of the branches held by B_p."""
    if SplitKind(split) == SplitKind.BANACH:
        return [(1, 0, p), (1, 1, 1.0 - p)]
    return [(1, 1, 1.0 - p)]


def apply_B(split: SplitKind, p: float, f, x):
    split = _check_split(split, p)
    f = as_function(f)
    x = np.asarray(x, dtype=float)
    u = 1.0 / (1.0 + x)
    total = 0.0
    for _, omega, coin in split_branches(split, p):
        if coin == 0.0:
            continue
        total = total + coin * u * u * np.asarray(f(u if omega == 0 else 1.0 - u), dtype=float)
    return float(total) if np.ndim(total) == 0 else total


def apply_A(split: SplitKind, p: float, f, x, policy: Optional[TailPolicy] = None):
    """L_p without the branches held by B_p."""
    return apply_Lp(p, f, x, policy) - apply_B(split, p, f, x)


def B_power_iterated(split: SplitKind, p: float, m: int, f, x):
    """B^m f(x) by unrolling the recursion B^m f = B(B^{m-1} f)."""
    split = _check_split(split, p)
    f = as_function(f)
    x = np.asarray(x, dtype=float)
    if m == 0:
        return np.asarray(f(x), dtype=float)
    u = 1.0 / (1.0 + x)
    total = np.zeros_like(x)
    for _, omega, coin in split_branches(split, p):
        if coin == 0.0:
            continue
        inner = B_power_iterated(split, p, m - 1, f, u if omega == 0 else 1.0 - u)
        total = total + coin * u * u * inner
    return total


def B_power(split: SplitKind, p: float, m: int, f, x):
    if m < 1:
        raise ValueError(f"Power m must be >= 1, got {m}")
    split = _check_split(split, p)
    if split == SplitKind.HARDY:
        f = as_function(f)
        x = np.asarray(x, dtype=float)
        value = (1.0 - p) ** m / (1.0 + m * x) ** 2 * np.asarray(f(x / (1.0 + m * x)), dtype=float)
    else:
        value = B_power_iterated(split, p, m, f, x)
    return float(value) if np.ndim(value) == 0 else value


def B_power_norm(split: SplitKind, p: float, m: int) -> float:
    """Norm of B^m on C[0,1]: sup of its coefficient sum, i.e. of B^m 1."""
    x = np.linspace(0.0, 1.0, B_NORM_GRID)
    return float(np.max(B_power(split, p, m, constant(1.0), x)))


def B_power_norm_bound(split: SplitKind, p: float, m: int) -> float:
    """(1-p)^m sqrt(m+1) for HardySplit; (1-3p/4)^(m/2) up to one factor for BanachSplit."""
    if SplitKind(split) == SplitKind.HARDY:
        return (1.0 - p) ** m * math.sqrt(m + 1)
    return B2_bound(p) ** (m // 2)


def B2_bound(p: float) -> float:
    """1 - 3p/4, checked against the four-term coefficient sup of B_p^2."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"B2_bound needs 0 < p <= 1, got {p}")
    four_terms = p * p / 4 + p * (1 - p) / 4 + p * (1 - p) + (1 - p) ** 2
    bound = 1.0 - 0.75 * p
    if abs(four_terms - bound) > IDENTITY_TOL:
        raise ConsistencyError(f"Four-term sum {four_terms!r} differs from 1 - 3p/4 = {bound!r}")
    return bound


def B_matrix(split: SplitKind, p: float, grid: CollocationGrid, threads: Optional[int] = None) -> OperatorMatrix:
    split = _check_split(split, p)
    return branch_operator_matrix(grid, split_branches(split, p), OperatorTag.B, p, threads)


def resolvent_J(
    split: SplitKind,
    p: float,
    grid: CollocationGrid,
    B: Optional[OperatorMatrix] = None,
) -> OperatorMatrix:
    """J = (I - B)^{-1} by an LU solve."""
    split = _check_split(split, p, resolvent=True)
    B = B or B_matrix(split, p, grid)
    I_minus_B = np.eye(grid.size) - B.matrix
    condition = float(np.linalg.cond(I_minus_B))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise ConditioningError(
            f"I - B is numerically singular for {split.value} split at p={p}", condition_number=condition
        )
    J = linalg.lu_solve(linalg.lu_factor(I_minus_B), np.eye(grid.size))
    logging.debug(f"Resolvent for {split.value} split at p={p}: cond(I-B)={condition:.3e}")
    return OperatorMatrix(J, OperatorTag.J, p, grid)


def resolvent_residual(B: OperatorMatrix, J: OperatorMatrix) -> float:
    """max of |J(I-B) - I| and |(I-B)J - I| entrywise."""
    I = np.eye(B.grid.size)
    I_minus_B = I - B.matrix
    return float(max(np.max(np.abs(J.matrix @ I_minus_B - I)), np.max(np.abs(I_minus_B @ J.matrix - I))))


def neumann_terms(split: SplitKind, p: float) -> int:
    """Smallest M whose predicted correction falls below 1e-12."""
    if SplitKind(split) == SplitKind.BANACH:
        rate = B2_bound(p)
        return min(MAX_NEUMANN_TERMS, math.ceil(2 * math.log(NEUMANN_TARGET) / math.log(rate)))
    if p >= 1.0:
        return 1
    M = 1
    while (1 - p) ** M * math.sqrt(M + 1) >= NEUMANN_TARGET and M < MAX_NEUMANN_TERMS:
        M += 1
    return M


def neumann_diagnostics(split: SplitKind, p: float, B: OperatorMatrix, J: OperatorMatrix) -> NeumannDiagnostics:
    """Compare sum_{m<=M} B^m with J and measure the decay of ||B^m||."""
    split = _check_split(split, p, resolvent=True)
    M = neumann_terms(split, p)
    power = np.eye(B.grid.size)
    partial = power.copy()
    norms = [1.0]
    for _ in range(M):
        power = power @ B.matrix
        partial += power
        norms.append(float(np.linalg.norm(power, np.inf)))

    half = M // 2
    if M >= 2 and norms[half] > 0.0 and norms[M] > 0.0:
        ratio = (norms[M] / norms[half]) ** (1.0 / (M - half))
    else:
        ratio = 0.0
    bound = math.sqrt(B2_bound(p)) if split == SplitKind.BANACH else (1.0 - p) * math.sqrt(2.0)
    residual = float(np.max(np.abs(partial - J.matrix)))
    return NeumannDiagnostics(M, residual, ratio, bound)


def modified_operator(
    split: SplitKind,
    p: float,
    grid: CollocationGrid,
    policy: Optional[TailPolicy] = None,
    threads: Optional[int] = None,
    L: Optional[OperatorMatrix] = None,
) -> OperatorMatrix:
    """Lhat = A J with A = L - B."""
    split = _check_split(split, p, resolvent=True)
    L = L or build_matrix(p, grid, policy, threads)
    B = B_matrix(split, p, grid, threads)
    A = OperatorMatrix(L.matrix - B.matrix, OperatorTag.A, p, grid, L.policy)
    J = resolvent_J(split, p, grid, B)
    return OperatorMatrix(A.matrix @ J.matrix, OperatorTag.LHAT, p, grid, L.policy)


def lift_density(
    split: SplitKind,
    p: float,
    h_hat: FunctionRep,
    grid: CollocationGrid,
    J: Optional[OperatorMatrix] = None,
) -> NodalFunction:
    """h = J h_hat normalized to unit integral."""
    split = _check_split(split, p, resolvent=True)
    J = J or resolvent_J(split, p, grid)
    if isinstance(h_hat, NodalFunction) and h_hat.grid.degree == grid.degree:
        values = h_hat.values
    else:
        values = np.asarray(as_function(h_hat)(grid.nodes), dtype=float)
    lifted = J.matrix @ values
    lifted = lifted / grid.integrate(lifted)
    lowest = float(np.min(lifted))
    if lowest < -LIFT_NEGATIVITY_TOL:
        raise ConsistencyError(f"Lifted density is negative at a node ({lowest:.3e})")
    return NodalFunction(grid, lifted)


def split_report(
    split: SplitKind,
    p: float,
    degree: int,
    policy: Optional[TailPolicy] = None,
    threads: Optional[int] = None,
    powers: int = 10,
) -> SplitReport:
    """Run every check of one split and collect the numbers."""
    split = _check_split(split, p, resolvent=True)
    grid = CollocationGrid(degree)
    L = build_matrix(p, grid, policy, threads)
    B = B_matrix(split, p, grid, threads)
    J = resolvent_J(split, p, grid, B)
    Lhat = OperatorMatrix((L.matrix - B.matrix) @ J.matrix, OperatorTag.LHAT, p, grid, L.policy)

    hat = leading_pair(Lhat)
    lifted = lift_density(split, p, hat.h, grid, J)
    direct = density(p, degree, policy, threads, with_gap=False)
    x = np.linspace(0.0, 1.0, 1001)
    discrepancy = float(np.max(np.abs(lifted(x) - direct(x))))
    fixed_point = float(np.max(np.abs(L.matrix @ lifted.values - lifted.values)))
    neumann = neumann_diagnostics(split, p, B, J)

    logging.info(
        f"{split.value} split at p={p}: Lhat lambda1={hat.lambda1:.12f}, lift discrepancy {discrepancy:.2e}"
    )
    return SplitReport(
        split=split.value,
        p=p,
        degree=degree,
        resolvent_residual=resolvent_residual(B, J),
        condition_number=float(np.linalg.cond(np.eye(grid.size) - B.matrix)),
        markov_residual=Lhat.markov_defect(),
        lambda1_hat=hat.lambda1,
        lift_discrepancy=discrepancy,
        lift_fixed_point_residual=fixed_point,
        neumann_terms=neumann.terms,
        neumann_ratio=neumann.ratio,
        neumann_ratio_bound=neumann.ratio_bound,
        b2_bound=B2_bound(p) if p > 0.0 else 1.0,
        b_power_norms={m: B_power_norm(split, p, m) for m in range(1, powers + 1)},
    )
