"""Chebyshev collocation of L_p: matrices, invariant density and spectral gap.

Entry (i, j) of the collocation matrix is L_p applied to the j-th cardinal
interpolant and evaluated at node i. Branches beyond the explicit ones are summed
as the exact integral of the interpolant plus Gregory's forward-difference
corrections, and every column is then given the mass of its cardinal.

For 0 < p < 1 the density is not taken from this matrix directly: h_p has a
layer at 0 built by the Renyi n=1 iterates, so the module solves for a smooth
fixed point written in Gauss branches only and lifts it pointwise. The Ulam
discretization at the end is a low-accuracy independent check of the
subdominant eigenvalue.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from scipy import sparse, special
from scipy.sparse import linalg as sparse_linalg

from gauss_renyi.chebyshev import CollocationGrid
from gauss_renyi.config import settings
from gauss_renyi.errors import DomainRefusal, GapTooSmallError
from gauss_renyi.functions import FunctionRep, LiftedFunction, NodalFunction, gauss_density
from gauss_renyi.models.responses import DensityReport
from gauss_renyi.transfer import TailPolicy

GAP_MAX_ITER = 5000
GAP_TOL = 1e-12
CSV_POINTS = 1001
# 1/log(1+D) - 1/D = sum GREGORY[k] D^k for the forward difference D
GREGORY = np.array([
    1 / 2, -1 / 12, 1 / 24, -19 / 720, 3 / 160, -863 / 60480, 275 / 24192, -33953 / 3628800, 8183 / 1036800,
])
# explicit branches per map are at least this multiple of the degree
BRANCHES_PER_DEGREE = 2
BRANCH_BLOCK = 256
GEOMETRIC_CUTOFF = 1e-17
MAX_GEOMETRIC_TERMS = 50_000


class OperatorTag(str, Enum):
    LP = "Lp"
    A = "A"
    B = "B"
    J = "J"
    LHAT = "Lhat"
    GAMMA = "Gamma"


@dataclass(eq=False)
class OperatorMatrix:
    """A dense discretized operator on the nodes of ``grid``.

    ``next_rows`` holds the first omitted tail term as a linear functional of
    nodal values, so the truncation error of any vector can be estimated.
    ``mass_correction`` is the largest column shift applied to make w^T M = w^T.
    """

    matrix: np.ndarray
    tag: OperatorTag
    p: float
    grid: CollocationGrid
    policy: Optional[TailPolicy] = None
    next_rows: Optional[np.ndarray] = field(default=None, repr=False)
    mass_correction: float = 0.0

    def __matmul__(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values

    def tail_estimate(self, values: np.ndarray) -> float:
        if self.next_rows is None:
            return 0.0
        return float(np.max(np.abs(self.next_rows @ values)))

    def markov_defect(self) -> float:
        """sup |w^T M - w^T| for the Clenshaw-Curtis weights w."""
        w = self.grid.cc_weights
        return float(np.max(np.abs(w @ self.matrix - w)))


@dataclass(eq=False)
class DensityResult:
    p: float
    degree: int
    lambda1: float
    h: FunctionRep
    residual: float
    iterations: int
    tail_estimate: float
    policy: Optional[TailPolicy] = None
    lambda2: Optional[float] = None
    mass_correction: float = 0.0

    def __call__(self, x):
        return self.h(x)

    @property
    def values(self) -> np.ndarray:
        return self.h.values

    @property
    def integral(self) -> float:
        return self.h.integral()

    @property
    def min_nodal_value(self) -> float:
        return float(np.min(self.h.values))

    def chebyshev(self) -> Chebyshev:
        """The interpolant of the nodal values as a Chebyshev series on [0, 1]."""
        return Chebyshev.fit(self.h.grid.nodes, self.h.values, self.degree, domain=[0.0, 1.0])

    def histogram_masses(self, edges: np.ndarray) -> np.ndarray:
        return np.diff(self.h.antiderivative(np.asarray(edges, dtype=float)))

    def samples(self, points: int = CSV_POINTS) -> Tuple[np.ndarray, np.ndarray]:
        x = np.linspace(0.0, 1.0, points)
        return x, self.h(x)

    def to_report(self) -> DensityReport:
        deviation = None
        if self.p == 1.0:
            x, values = self.samples()
            deviation = float(np.max(np.abs(values - gauss_density()(x))))
        return DensityReport(
            p=self.p,
            degree=self.degree,
            tail=self.policy.model_dump() if self.policy else {},
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            residual=self.residual,
            iterations=self.iterations,
            integral=self.integral,
            min_nodal_value=self.min_nodal_value,
            tail_estimate=self.tail_estimate,
            closed_form_deviation=deviation,
            representation="lifted" if isinstance(self.h, LiftedFunction) else "nodal",
            mass_correction=self.mass_correction,
        )


def _worker_count(threads: Optional[int]) -> int:
    return threads or settings.THREADS or os.cpu_count() or 1


def branch_rows(grid: CollocationGrid, xs: np.ndarray, branches: Sequence[Tuple[int, int, float]]) -> np.ndarray:
    """Rows at points xs of sum coin * f(b_{n,w}(x)) / (n+x)^2 over (n, w, coin)."""
    rows = np.zeros((len(xs), grid.size))
    for start in range(0, len(branches), BRANCH_BLOCK):
        block = branches[start:start + BRANCH_BLOCK]
        n = np.array([b[0] for b in block], dtype=float)[:, None]
        omega = np.array([b[1] for b in block])[:, None]
        coin = np.array([b[2] for b in block], dtype=float)[:, None]
        u = 1.0 / (n + xs[None, :])
        points = np.where(omega == 0, u, 1.0 - u)
        E = grid.interpolation_matrix(points.ravel()).reshape(len(block), len(xs), grid.size)
        rows += np.einsum("bk,bkj->kj", coin * u * u, E)
    return rows


def difference_matrix(order: int) -> np.ndarray:
    """Row k gives the k-th forward difference from samples at a, a+1, ..., a+order."""
    k = np.arange(order + 1)[:, None]
    i = np.arange(order + 1)[None, :]
    return np.where(i <= k, (-1.0) ** (k - i) * special.comb(k, i), 0.0)


def tail_rows(grid: CollocationGrid, xs: np.ndarray, p: float, start: int) -> Tuple[np.ndarray, np.ndarray]:
    """Rows of the branches n >= start of L_p, and of the first omitted correction.

    Each map contributes the exact integral of the interpolant over the images of
    those branches plus Gregory's forward-difference corrections at n = start:

        sum_{n>=a} g(n) = int_a^inf g + sum_k GREGORY[k] D^k g(a)
    """
    order = len(GREGORY) - 1
    differences = difference_matrix(order)
    u = 1.0 / (start + xs)
    rows = np.zeros((len(xs), grid.size))
    next_rows = np.zeros((len(xs), grid.size))
    for side, weight in ((0, p), (1, 1.0 - p)):
        if weight == 0.0:
            continue
        if side == 0:
            integral = grid.cardinal_integrals(u)
        else:
            integral = grid.cc_weights[None, :] - grid.cardinal_integrals(1.0 - u)
        samples = np.stack([branch_rows(grid, xs, [(start + s, side, 1.0)]) for s in range(order + 1)])
        forward = np.tensordot(differences, samples, axes=1)
        rows += weight * (integral + np.tensordot(GREGORY[:-1], forward[:-1], axes=1))
        next_rows += weight * GREGORY[-1] * forward[-1]
    return rows, next_rows


def _blocks(size: int, workers: int) -> Iterable[np.ndarray]:
    return [block for block in np.array_split(np.arange(size), workers) if len(block)]


def branch_operator_matrix(
    grid: CollocationGrid,
    branches: Sequence[Tuple[int, int, float]],
    tag: OperatorTag,
    p: float,
    threads: Optional[int] = None,
) -> OperatorMatrix:
    """Collocation matrix of a finite sum of weighted branch compositions."""
    workers = _worker_count(threads)
    blocks = _blocks(grid.size, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda rows: branch_rows(grid, grid.nodes[rows], branches), blocks))
    return OperatorMatrix(np.vstack(parts), tag, p, grid)


def lp_branches(p: float, N: int) -> list:
    branches = []
    for n in range(1, N + 1):
        if p > 0.0:
            branches.append((n, 0, p))
        if p < 1.0:
            branches.append((n, 1, 1.0 - p))
    return branches


def explicit_branches(grid: CollocationGrid, policy: TailPolicy) -> int:
    return max(policy.N, BRANCHES_PER_DEGREE * grid.degree)


def conserve_mass(matrix: np.ndarray, grid: CollocationGrid) -> float:
    """Shift every row by w^T - w^T M in place so that w^T M = w^T; returns the largest shift."""
    defect = grid.cc_weights - grid.cc_weights @ matrix
    matrix += defect[None, :]
    return float(np.max(np.abs(defect)))


def build_matrix(
    p: float,
    grid: CollocationGrid,
    policy: Optional[TailPolicy] = None,
    threads: Optional[int] = None,
) -> OperatorMatrix:
    """Collocation matrix of L_p including the tail, mass-conserving on the grid."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability p must lie in [0, 1], got {p}")
    if grid.degree < 4:
        raise ValueError(f"Collocation degree must be at least 4, got {grid.degree}")
    policy = policy or TailPolicy()
    explicit = explicit_branches(grid, policy)
    branches = lp_branches(p, explicit)
    workers = _worker_count(threads)

    def assemble(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        xs = grid.nodes[rows]
        tail, next_term = tail_rows(grid, xs, p, explicit + 1)
        return branch_rows(grid, xs, branches) + tail, next_term

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(assemble, _blocks(grid.size, workers)))

    matrix = np.vstack([part[0] for part in parts])
    next_rows = np.vstack([part[1] for part in parts])
    correction = conserve_mass(matrix, grid)
    logging.debug(
        f"Built L_p matrix: p={p}, degree={grid.degree}, explicit branches={explicit}, "
        f"mass correction {correction:.2e}"
    )
    return OperatorMatrix(matrix, OperatorTag.LP, p, grid, policy, next_rows, correction)


def geometric_terms(q: float) -> int:
    """Number of terms before q^m drops below GEOMETRIC_CUTOFF."""
    if q <= 0.0:
        return 1
    terms = math.ceil(math.log(GEOMETRIC_CUTOFF) / math.log(q))
    if terms > MAX_GEOMETRIC_TERMS:
        logging.warning(f"Geometric series with ratio {q} cut at {MAX_GEOMETRIC_TERMS} terms")
        return MAX_GEOMETRIC_TERMS
    return terms


def gauss_word_matrix(
    p: float,
    grid: CollocationGrid,
    policy: Optional[TailPolicy] = None,
    threads: Optional[int] = None,
) -> OperatorMatrix:
    """Collocation of A_p (I - B_p)^{-1} written with Gauss branches only.

    With q = 1 - p and Gamma f(y) = sum_{a>=1} q^(a-1) f(1/(a+y)) / (a+y)^2,

        Lhat = L_G + q (L_G - I) Gamma.

    Its fixed point is analytic across [0, 1]; h_p is recovered from it by the
    resolvent, see ``LiftedFunction``.
    """
    q = 1.0 - p
    gauss = build_matrix(1.0, grid, policy, threads)
    terms = geometric_terms(q)
    gamma = branch_operator_matrix(
        grid, [(a, 0, q ** (a - 1)) for a in range(1, terms + 1)], OperatorTag.GAMMA, p, threads
    )
    shifted = gauss.matrix - np.eye(grid.size)
    matrix = gauss.matrix + q * shifted @ gamma.matrix
    next_rows = gauss.next_rows + q * gauss.next_rows @ gamma.matrix
    logging.debug(f"Built Lhat matrix: p={p}, degree={grid.degree}, geometric terms={terms}")
    return OperatorMatrix(matrix, OperatorTag.LHAT, p, grid, gauss.policy, next_rows, gauss.mass_correction)


def leading_pair(
    M: OperatorMatrix,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> DensityResult:
    """Power iteration normalized by the discrete integral at every step."""
    if M.tag not in (OperatorTag.LP, OperatorTag.LHAT):
        raise ValueError(f"leading_pair needs an Lp or Lhat matrix, got {M.tag.value}")
    max_iter = max_iter or settings.POWER_MAX_ITER
    tol = tol or settings.POWER_TOL
    w = M.grid.cc_weights

    v = np.ones(M.grid.size)
    lam = 0.0
    for iteration in range(1, max_iter + 1):
        y = M.matrix @ v
        lam = float(w @ y)
        if lam == 0.0:
            raise GapTooSmallError("Discrete integral of the iterate vanished")
        v_next = y / lam
        step = float(np.max(np.abs(v_next - v)))
        v = v_next
        if step < tol * max(1.0, float(np.max(np.abs(v)))):
            break
    else:
        raise GapTooSmallError(f"Power iteration did not settle in {max_iter} steps (last step {step:.2e})")

    residual = float(np.max(np.abs(M.matrix @ v - lam * v)))
    logging.info(f"Leading eigenvalue {lam:.15f} after {iteration} iterations, residual {residual:.2e}")
    return DensityResult(
        p=M.p,
        degree=M.grid.degree,
        lambda1=lam,
        h=NodalFunction(M.grid, v),
        residual=residual,
        iterations=iteration,
        tail_estimate=M.tail_estimate(v),
        policy=M.policy,
        mass_correction=M.mass_correction,
    )


def deflate(M: OperatorMatrix, result: DensityResult) -> np.ndarray:
    """M - lambda1 h w^T, which annihilates h."""
    return M.matrix - result.lambda1 * np.outer(result.values, M.grid.cc_weights)


def full_spectrum(M: OperatorMatrix) -> np.ndarray:
    """All eigenvalues of the dense matrix, largest modulus first."""
    eigenvalues = np.linalg.eigvals(M.matrix)
    return eigenvalues[np.argsort(-np.abs(eigenvalues), kind="stable")]


def spectral_gap(M: OperatorMatrix, result: Optional[DensityResult] = None) -> float:
    """Modulus of the subdominant eigenvalue.

    Iterates the deflated matrix and reads |lambda2| off two-step norm ratios, which
    settle for a real subdominant eigenvalue of either sign. A complex pair keeps the
    ratio oscillating; the dense spectrum is used then.
    """
    result = result or leading_pair(M)
    deflated = deflate(M, result)
    v = np.cos(np.pi * M.grid.nodes) + 0.5 * M.grid.nodes
    v /= np.max(np.abs(v))
    norms = [1.0]
    estimate = None
    for _ in range(GAP_MAX_ITER):
        v = deflated @ v
        scale = float(np.max(np.abs(v)))
        if scale == 0.0:
            return 0.0
        v /= scale
        norms.append(scale)
        if len(norms) >= 3:
            current = float(np.sqrt(norms[-1] * norms[-2]))
            if estimate is not None and abs(current - estimate) < GAP_TOL * max(current, 1e-300):
                return current
            estimate = current

    logging.warning(f"Deflated iteration did not settle for p={M.p}; using the dense spectrum")
    return float(np.abs(full_spectrum(M)[1]))


def resolved_density(
    p: float,
    grid: CollocationGrid,
    policy: Optional[TailPolicy] = None,
    threads: Optional[int] = None,
) -> DensityResult:
    """h_p for 0 < p < 1 as the resolvent lift of the fixed point of ``gauss_word_matrix``."""
    q = 1.0 - p
    resolved = leading_pair(gauss_word_matrix(p, grid, policy, threads))
    h = LiftedFunction(resolved.h, q, geometric_terms(q))
    logging.info(f"Lifted density at p={p}: {h.terms} resolvent terms, integral {h.integral():.15f}")
    return DensityResult(
        p=p,
        degree=grid.degree,
        lambda1=resolved.lambda1,
        h=h,
        residual=resolved.residual,
        iterations=resolved.iterations,
        tail_estimate=resolved.tail_estimate,
        policy=resolved.policy,
        mass_correction=resolved.mass_correction,
    )


def density(
    p: float,
    degree: Optional[int] = None,
    policy: Optional[TailPolicy] = None,
    threads: Optional[int] = None,
    with_gap: bool = True,
) -> DensityResult:
    """Invariant density h_p with leading eigenvalue and, by default, |lambda2|.

    p=1 is the plain collocation eigenvector; otherwise h_p is lifted from the
    Gauss-word fixed point. |lambda2| always comes from the L_p matrix.
    """
    if p == 0.0:
        raise DomainRefusal(
            "p=0 is the Renyi map alone: its invariant measure 1/x dx is sigma-finite, "
            "so no invariant probability density exists"
        )
    if not 0.0 < p <= 1.0:
        raise ValueError(f"Probability p must lie in (0, 1], got {p}")
    grid = CollocationGrid(degree or settings.DEGREE)
    M = build_matrix(p, grid, policy, threads) if p == 1.0 or with_gap else None
    if p == 1.0:
        result = leading_pair(M)
    else:
        result = resolved_density(p, grid, policy, threads)
    if with_gap:
        result.lambda2 = spectral_gap(M, result if p == 1.0 else None)
    return result


def convergence_study(p: float, degrees: Sequence[int] = (8, 16, 32, 64), policy: Optional[TailPolicy] = None) -> Dict[int, float]:
    """sup over 1001 points of |h_d - h_{d'}| for successive degrees d < d'."""
    x = np.linspace(0.0, 1.0, CSV_POINTS)
    profiles = {d: density(p, d, policy, with_gap=False)(x) for d in degrees}
    return {
        d: float(np.max(np.abs(profiles[d] - profiles[d_next])))
        for d, d_next in zip(degrees[:-1], degrees[1:])
    }


def _gauss_row(a: float, b: float, edges: np.ndarray) -> Dict[int, float]:
    """Lengths of [a, b] intersected with T0^{-1} of each target cell, keyed by cell index."""
    cells = len(edges) - 1
    lower, upper = edges[:-1], edges[1:]
    row = np.zeros(cells)

    # branch n covers (1/(n+1), 1/n]; fully inside [a, b] for n_full_lo <= n <= n_full_hi
    n_full_lo = int(np.ceil(1.0 / b))
    n_full_hi = np.inf if a == 0.0 else int(np.floor(1.0 / a)) - 1
    if n_full_hi >= n_full_lo:
        if np.isinf(n_full_hi):
            row += special.digamma(n_full_lo + upper) - special.digamma(n_full_lo + lower)
        else:
            row += (
                special.digamma(n_full_hi + 1 + lower) - special.digamma(n_full_lo + lower)
                - special.digamma(n_full_hi + 1 + upper) + special.digamma(n_full_lo + upper)
            )

    partial = {int(np.floor(1.0 / b)) if b < 1.0 else 1}
    if a > 0.0:
        partial.add(int(np.floor(1.0 / a)))
    for n in sorted(partial):
        if n < 1 or (n_full_lo <= n <= n_full_hi):
            continue
        lo, hi = max(a, 1.0 / (n + 1)), min(b, 1.0 / n)
        if hi <= lo:
            continue
        y0, y1 = 1.0 / hi - n, 1.0 / lo - n
        first = int(np.clip(np.searchsorted(upper, y0, side="right"), 0, cells - 1))
        last = int(np.clip(np.searchsorted(lower, y1, side="left") - 1, 0, cells - 1))
        js = np.arange(first, last + 1)
        c = np.maximum(lower[js], y0)
        d = np.minimum(upper[js], y1)
        row[js] += np.where(d > c, 1.0 / (n + c) - 1.0 / (n + d), 0.0)
    return row


def ulam_matrix(p: float, cells: int) -> sparse.csr_matrix:
    """Row-stochastic Ulam matrix of the random map on ``cells`` equal cells."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability p must lie in [0, 1], got {p}")
    edges = np.linspace(0.0, 1.0, cells + 1)
    width = 1.0 / cells
    rows, cols, vals = [], [], []
    for i in range(cells):
        row = _gauss_row(edges[i], edges[i + 1], edges) / width
        js = np.flatnonzero(row > 0.0)
        rows.append(np.full(len(js), i))
        cols.append(js)
        vals.append(row[js])
    gauss = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(cells, cells)
    )
    # T1(x) = T0(1 - x): the Renyi rows are the Gauss rows read backwards
    renyi = gauss[np.arange(cells)[::-1], :]
    return (p * gauss + (1.0 - p) * renyi).tocsr()


def ulam_subdominant(p: float, cells: int) -> float:
    """|lambda2| of the Ulam matrix by a sparse Arnoldi solve."""
    P = ulam_matrix(p, cells)
    eigenvalues = sparse_linalg.eigs(P, k=4, which="LM", v0=np.linspace(1.0, 2.0, cells), return_eigenvectors=False)
    moduli = np.sort(np.abs(eigenvalues))[::-1]
    logging.debug(f"Ulam spectrum moduli at p={p}, {cells} cells: {moduli}")
    return float(moduli[1])
