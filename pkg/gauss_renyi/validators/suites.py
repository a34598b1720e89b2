import logging
import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from gauss_renyi import bounds, collocation, dynamics, hardy, markov_mod
from gauss_renyi.chebyshev import CollocationGrid
from gauss_renyi.functions import constant, gauss_density, monomial, polynomial, renyi_density
from gauss_renyi.transfer import TailPolicy, apply_LR, apply_Lp, invariance_residual, markov_residual

Check = Dict[str, Any]

P_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
SUITE_SEED = 20240601


def _check(name: str, value: Any, tolerance: Any, passed: bool) -> Check:
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    return {"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance}


def _at_most(name: str, value: float, tolerance: float) -> Check:
    return _check(name, float(value), tolerance, value <= tolerance)


def _random_intervals(count: int, seed: int) -> List[tuple]:
    rng = dynamics.chain_generator(seed, 0)
    pairs = np.sort(rng.random((count, 2)), axis=1)
    return [(float(a), float(b)) for a, b in pairs if b > a]


def polynomial_battery(count: int = 5, seed: int = SUITE_SEED) -> list:
    """Polynomials of degree <= 8 with nonnegative coefficients, hence nonnegative on [0, 1]."""
    rng = dynamics.chain_generator(seed, 1)
    return [polynomial(rng.random(int(rng.integers(1, 9)) + 1)) for _ in range(count)]


def check_closed_forms(policy: Optional[TailPolicy] = None) -> List[Check]:
    """Gauss recovery, the Renyi telescoping identity, Markov preservation and the Gauss measure"""

    checks = []
    gauss = collocation.density(1.0, 32, policy, with_gap=False)
    report = gauss.to_report()
    checks.append(_at_most("gauss_density_sup_error", report.closed_form_deviation, 1e-8))
    checks.append(_at_most("gauss_lambda1_error", abs(gauss.lambda1 - 1.0), 1e-9))

    x = np.linspace(0.05, 1.0, 96)
    renyi_policy = TailPolicy(N=64, order=4, tol=1e-10)
    renyi_error = np.max(np.abs(apply_LR(renyi_density(), x, renyi_policy) - 1.0 / x))
    checks.append(_at_most("renyi_fixed_density_sup_error", renyi_error, 1e-9))

    battery = [constant(1.0), monomial(1), monomial(2)] + polynomial_battery()
    worst = max(markov_residual(p, f, policy=policy) for p in (0.25, 0.5, 0.75) for f in battery)
    checks.append(_at_most("markov_preservation", worst, 1e-8))

    mass = float(np.log2(1.5))
    residual = invariance_residual(gauss_density(), 1.0, (0.0, 0.5))
    checks.append(_at_most("gauss_invariance_half", residual, 1e-8))
    computed = gauss.histogram_masses(np.array([0.0, 0.5]))[0]
    checks.append(_at_most("gauss_measure_half", abs(computed - mass), 1e-8))

    checks.append(_at_most("trigamma_at_zero", abs(apply_Lp(0.5, constant(1.0), 0.0, policy) - math.pi ** 2 / 6), 1e-10))
    return checks


def check_operators(
    policy: Optional[TailPolicy] = None,
    samples: int = 1_000_000,
    ulam_cells: int = 10_000,
) -> List[Check]:
    """Leading eigenpair over the p-grid, invariance, spectral gap and the Monte-Carlo cross-check"""

    checks = []
    grid32 = CollocationGrid(32)
    xs = np.linspace(0.0, 1.0, 1001)

    worst_lambda, worst_min, worst_refinement, worst_gap = 0.0, np.inf, 0.0, 0.0
    densities = {}
    for p in P_GRID:
        coarse = collocation.density(p, 32, policy, with_gap=False)
        fine = collocation.density(p, 64, policy, with_gap=False)
        densities[p] = coarse
        worst_lambda = max(worst_lambda, abs(coarse.lambda1 - 1.0))
        worst_min = min(worst_min, coarse.min_nodal_value)
        worst_refinement = max(worst_refinement, float(np.max(np.abs(coarse(xs) - fine(xs)))))
        worst_gap = max(worst_gap, collocation.spectral_gap(collocation.build_matrix(p, grid32, policy)))
    checks.append(_at_most("lambda1_error_p_grid", worst_lambda, 1e-8))
    checks.append(_check("density_nonnegative_p_grid", worst_min, 0.0, worst_min >= 0.0))
    checks.append(_at_most("self_convergence_32_64", worst_refinement, 1e-8))
    checks.append(_check("subdominant_below_one", worst_gap, 1.0, worst_gap < 1.0))

    worst_invariance = 0.0
    for p in (0.3, 0.5, 0.7):
        h = densities[p].h
        for interval in _random_intervals(10, SUITE_SEED + int(100 * p)):
            worst_invariance = max(worst_invariance, invariance_residual(h, p, interval))
    checks.append(_at_most("invariance_random_intervals", worst_invariance, 1e-6))

    gap32 = collocation.density(1.0, 32, policy).lambda2
    gap64 = collocation.density(1.0, 64, policy).lambda2
    checks.append(_at_most("gauss_gap_32_vs_64", abs(gap32 - gap64), 1e-6))
    ulam = collocation.ulam_subdominant(1.0, ulam_cells)
    checks.append(_at_most("gauss_gap_vs_ulam", abs(gap32 - ulam), 1e-3))

    for p in (0.5, 0.9):
        params = dynamics.CoinParams(p=p, seed=7)
        orbit = dynamics.simulate(params, 0.5, samples=samples)
        edges = np.linspace(0.0, 1.0, 101)
        distance = dynamics.histogram_l1(orbit, 100, densities[p].histogram_masses(edges))
        checks.append(_at_most(f"monte_carlo_l1_p{p}", distance, 0.02))
    return checks


def check_bounds() -> List[Check]:
    """Zeta values, the essential-radius bound, Stirling numbers and the Q-sup chain bound"""

    checks = [
        _at_most("zeta4", abs(bounds.zeta(4) - math.pi ** 4 / 90), 1e-10),
        _check("ess_bound_p05_k1", bounds.ess_radius_bound(0.5, 1).bound, 1.0, bounds.ess_radius_bound(0.5, 1).quasi_compact),
    ]
    asymmetry = max(
        abs(bounds.ess_radius_bound(p, k).bound - bounds.ess_radius_bound(1 - p, k).bound)
        for p in (0.1, 0.25, 0.4)
        for k in (1, 2, 3)
    )
    checks.append(_at_most("ess_bound_symmetry", asymmetry, 1e-15))
    checks.append(_check("min_k_p05", bounds.min_quasicompact_k(0.5), 1, bounds.min_quasicompact_k(0.5) == 1))
    checks.append(_check("min_k_p001", bounds.min_quasicompact_k(0.01), 3, bounds.min_quasicompact_k(0.01) == 3))
    checks.append(_check("stirling_4_2", bounds.stirling2(4, 2), 7, bounds.stirling2(4, 2) == 7))

    violations = bounds.stirling_bound_violations(12)
    diagonal = [(m, m) for m in range(1, 13)]
    checks.append(_check("stirling_bound_off_diagonal", len(violations), "diagonal only", violations == diagonal))

    for m in (1, 2, 3):
        q = bounds.empirical_Q(0.5, 2, m, 200)
        checks.append(_check(f"q_sup_m{m}", q.value, q.chain_bound, q.value <= q.chain_bound))
    return checks


def check_markov_mod(p: float = 0.5, degree: int = 32, policy: Optional[TailPolicy] = None) -> List[Check]:
    """Both splits: B^2 identity, resolvent, modified-operator Markov property and the lift"""

    checks = []
    identity = max(
        abs(q * q / 4 + q * (1 - q) / 4 + q * (1 - q) + (1 - q) ** 2 - markov_mod.B2_bound(q))
        for q in np.linspace(0.01, 0.99, 99)
    )
    checks.append(_at_most("b2_four_term_identity", identity, 1e-14))

    for split in markov_mod.SplitKind:
        report = markov_mod.split_report(split, p, degree, policy)
        checks.append(_at_most(f"{split.value}_resolvent_residual", report.resolvent_residual, 1e-10))
        checks.append(_at_most(f"{split.value}_lhat_markov", report.markov_residual, 1e-8))
        checks.append(_at_most(f"{split.value}_lift_discrepancy", report.lift_discrepancy, 1e-7))

    x = np.linspace(0.0, 1.0, 21)
    f = monomial(3)
    worst = max(
        float(np.max(np.abs(
            markov_mod.B_power(markov_mod.SplitKind.HARDY, p, m, f, x)
            - markov_mod.B_power_iterated(markov_mod.SplitKind.HARDY, p, m, f, x)
        )))
        for m in range(1, 11)
    )
    checks.append(_at_most("hardy_closed_form_vs_iterate", worst, 1e-12))
    return checks


def check_hardy(policy: Optional[TailPolicy] = None) -> List[Check]:
    """Hilbert-Schmidt norms, trace bound, eta/xi norms and the commuting diagram"""

    checks = [
        _at_most("hs_norm_times_2n", max(abs(hardy.hs_norm(n) * 2 * n - 1.0) for n in range(1, 11)), 1e-8),
        _at_most("trace_bound_n2", abs(hardy.trace_norm_bound(2) - math.sqrt(1 / 30)), 1e-12),
        _at_most("trace_bound_quadrature", max(abs(hardy.trace_norm_quadrature(n) - hardy.trace_norm_bound(n)) for n in range(1, 11)), 1e-10),
    ]
    norms = [hardy.xi_eta_norms(n) for n in range(0, 41)]
    checks.append(_at_most("eta_closed_vs_quadrature", max(abs(v.eta_sq - v.eta_sq_quadrature) for v in norms), 1e-10))
    excess = max(v.eta_sq - 1.0 / math.sqrt(n + 1) for n, v in enumerate(norms))
    checks.append(_check("eta_below_inverse_sqrt", excess, 0.0, excess <= 0.0))

    x_grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    for name, phi in (("one", lambda t: np.ones_like(t)), ("exp", lambda t: np.exp(-t))):
        residual = hardy.commuting_residual(hardy.HalfLineFunction(phi, name=name), x_grid, policy=policy)
        checks.append(_at_most(f"commuting_residual_{name}", residual, 1e-6))
    return checks


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "closed-forms": check_closed_forms,
    "operators": check_operators,
    "bounds": check_bounds,
    "markov-mod": check_markov_mod,
    "hardy": check_hardy,
}


def run_suite(name: str) -> List[Check]:
    names = list(SUITES) if name == "all" else [name]
    results = []
    for suite in names:
        logging.info(f"Running suite {suite}")
        for check in SUITES[suite]():
            check["suite"] = suite
            results.append(check)
    return results
