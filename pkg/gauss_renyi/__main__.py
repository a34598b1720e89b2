import argparse
import logging
import os
import sys
import time
import traceback
from typing import List, Optional

import numpy as np

from gauss_renyi import __version__, bounds, collocation, dynamics, hardy, markov_mod
from gauss_renyi.config import settings
from gauss_renyi.errors import GaussRenyiError, VerificationFailure
from gauss_renyi.models.responses import RunManifest, SimulationReport
from gauss_renyi.transfer import TailPolicy
from gauss_renyi.utils.output import digests, ensure_dir, write_csv, write_json
from gauss_renyi.verify import SUITE_NAMES, Verification

logging.basicConfig(level=logging.INFO, format='%(message)s')


class CliParser(argparse.ArgumentParser):
    """argparse parser whose usage errors surface as ValueError instead of SystemExit(2)."""

    def error(self, message):
        raise ValueError(f"{self.prog}: {message}")


def _policy(args) -> TailPolicy:
    return TailPolicy(N=args.tail_n, order=args.tail_order, tol=args.tail_tol)


def cmd_density(args) -> List[str]:
    policy = _policy(args)
    result = collocation.density(args.p, args.degree, policy, args.threads, with_gap=not args.no_gap)
    report = result.to_report()

    x, values = result.samples()
    paths = [
        write_csv(os.path.join(args.out, "density.csv"), ["x", "h"], [x, values]),
        write_csv(os.path.join(args.out, "density_nodes.csv"), ["node", "h"], [result.h.grid.nodes, result.values]),
    ]
    paths.append(write_json(os.path.join(args.out, "density.json"), report, "density-metadata.json"))

    print(f"p={args.p} degree={result.degree}: lambda1={result.lambda1:.15f}, residual={result.residual:.2e}")
    if result.lambda2 is not None:
        print(f"|lambda2|={result.lambda2:.12f}")
    if report.closed_form_deviation is not None:
        print(f"max deviation from the Gauss density: {report.closed_form_deviation:.3e}")
    return paths


def cmd_simulate(args) -> List[str]:
    params = dynamics.CoinParams(p=args.p, seed=args.seed)
    samples = dynamics.simulate(params, args.x0, args.burn_in, args.samples, args.chains)
    counts, edges = dynamics.histogram(samples, args.bins)

    masses, reference = None, None
    if args.p == 1.0:
        masses, reference = dynamics.gauss_bin_masses(edges), "gauss-closed-form"
    elif args.p > 0.0:
        policy = _policy(args)
        masses = collocation.density(args.p, args.degree, policy, args.threads, with_gap=False).histogram_masses(edges)
        reference = "collocation"

    columns = [edges[:-1], edges[1:], counts, counts / len(samples)]
    header = ["left", "right", "count", "frequency"]
    if masses is not None:
        columns.append(masses)
        header.append("reference_mass")
    paths = [
        write_csv(
            os.path.join(args.out, "orbit.csv"),
            ["step", "x"],
            [np.arange(len(samples)), samples],
            formats=["%d", "%.17g"],
        ),
        write_csv(os.path.join(args.out, "histogram.csv"), header, columns),
    ]

    l1 = float(np.sum(np.abs(counts / len(samples) - masses))) if masses is not None else None
    report = SimulationReport(
        p=args.p,
        seed=args.seed,
        rng_algorithm_id=params.rng_algorithm_id,
        burn_in=args.burn_in,
        samples=len(samples),
        chains=min(args.chains, args.samples),
        bins=args.bins,
        l1_distance=l1,
        reference=reference,
    )
    paths.append(write_json(os.path.join(args.out, "simulation.json"), report))

    if l1 is not None:
        print(f"p={args.p}: {len(samples)} samples, histogram L1 distance to {reference} = {l1:.4e}")
    return paths


def cmd_bounds(args) -> List[str]:
    table = bounds.bounds_table(args.p, args.k_max)
    ks = np.array([row.k for row in table.rows])
    paths = [
        write_csv(
            os.path.join(args.out, "bounds.csv"),
            ["k", "zeta", "bound", "quasi_compact", "ck_constant"],
            [
                ks,
                [row.zeta_value for row in table.rows],
                [row.bound for row in table.rows],
                [int(row.quasi_compact) for row in table.rows],
                table.ck_constants,
            ],
            formats=["%d", "%.17g", "%.17g", "%d", "%d"],
        )
    ]
    paths.append(write_json(os.path.join(args.out, "bounds.json"), table))

    for row in table.rows:
        print(f"k={row.k}: zeta({2 * row.k + 2})={row.zeta_value:.12f} bound={row.bound:.6f} quasi_compact={row.quasi_compact}")
    print(f"smallest quasi-compact k: {table.min_quasicompact_k}")
    return paths


def cmd_verify(args) -> List[str]:
    response = Verification(args.suite).generate()
    path = write_json(os.path.join(args.out, "verification.json"), response, "verification-result.json")
    print(f"suite {args.suite}: {response.passed} passed, {response.failed} failed")
    args.verification_valid = response.valid
    return [path]


def cmd_hardy(args) -> List[str]:
    rule = hardy.laguerre_rule(args.nodes)
    rows = hardy.hardy_table(args.n_max, rule)
    header = ["n", "hs", "trace_bound", "op_bound", "eta_sq", "xi_sq"]
    columns = [[getattr(row, name) for row in rows] for name in header]
    path = write_csv(
        os.path.join(args.out, "hardy.csv"), header, columns, formats=["%d"] + ["%.17g"] * 5
    )
    print(f"Hardy norms for n=1..{args.n_max} with {rule.count} Laguerre nodes")
    return [path]


def cmd_split(args) -> List[str]:
    kinds = list(markov_mod.SplitKind) if args.split == "both" else [markov_mod.SplitKind(args.split)]
    policy = _policy(args)
    paths = []
    for kind in kinds:
        report = markov_mod.split_report(kind, args.p, args.degree, policy, args.threads, args.powers)
        paths.append(write_json(os.path.join(args.out, f"split_{kind.value}.json"), report))
        print(
            f"{kind.value}: lambda1_hat={report.lambda1_hat:.15f} lift discrepancy={report.lift_discrepancy:.2e} "
            f"resolvent residual={report.resolvent_residual:.2e}"
        )
    return paths


def _add_tail_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--degree", type=int, default=settings.DEGREE, help="collocation degree")
    parser.add_argument("--tail-n", type=int, default=settings.TAIL_N, help="explicit branches per map, at least twice the degree in matrices")
    parser.add_argument("--tail-order", type=int, default=settings.TAIL_ORDER, help="Taylor order of the pointwise tail, 0..4")
    parser.add_argument("--tail-tol", type=float, default=settings.TAIL_TOL, help="per-evaluation tolerance")


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--out", default=settings.OUTPUT_DIR, help="output directory")
    common.add_argument("--threads", type=int, default=settings.THREADS, help="worker cap")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = CliParser(prog="gauss_renyi", description="Random Gauss-Renyi transfer operator toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    density = commands.add_parser("density", parents=[common], help="invariant density by collocation")
    density.add_argument("--p", type=float, required=True)
    density.add_argument("--no-gap", action="store_true", help="skip the |lambda2| estimate")
    _add_tail_flags(density)
    density.set_defaults(func=cmd_density)

    simulate = commands.add_parser("simulate", parents=[common], help="Monte-Carlo histogram of the random orbit")
    simulate.add_argument("--p", type=float, required=True)
    simulate.add_argument("--samples", type=int, default=1_000_000)
    simulate.add_argument("--bins", type=int, default=100)
    simulate.add_argument("--seed", type=int, default=settings.SEED)
    simulate.add_argument("--burn-in", type=int, default=settings.BURN_IN)
    simulate.add_argument("--chains", type=int, default=settings.CHAINS)
    simulate.add_argument("--x0", type=float, default=0.5, help="start of chain 0")
    _add_tail_flags(simulate)
    simulate.set_defaults(func=cmd_simulate)

    bounds_cmd = commands.add_parser("bounds", parents=[common], help="essential spectral radius bounds")
    bounds_cmd.add_argument("--p", type=float, required=True)
    bounds_cmd.add_argument("--k-max", type=int, default=8)
    bounds_cmd.set_defaults(func=cmd_bounds)

    verify = commands.add_parser("verify", parents=[common], help="run acceptance suites")
    verify.add_argument("--suite", choices=SUITE_NAMES, default="all")
    verify.set_defaults(func=cmd_verify)

    hardy_cmd = commands.add_parser("hardy", parents=[common], help="Hardy-space norms table")
    hardy_cmd.add_argument("--n-max", type=int, default=20)
    hardy_cmd.add_argument("--nodes", type=int, default=settings.LAGUERRE_NODES, help="Gauss-Laguerre nodes")
    hardy_cmd.set_defaults(func=cmd_hardy)

    split = commands.add_parser("split", parents=[common], help="Markov modification checks")
    split.add_argument("--p", type=float, required=True)
    split.add_argument("--split", choices=["banach", "hardy", "both"], default="both")
    split.add_argument("--powers", type=int, default=10, help="largest m for the ||B^m|| table")
    _add_tail_flags(split)
    split.set_defaults(func=cmd_split)
    return parser


def _check_flags(args) -> None:
    if getattr(args, "p", None) is not None and not 0.0 <= args.p <= 1.0:
        raise ValueError(f"--p must lie in [0, 1], got {args.p}")
    for name in ("samples", "bins", "k_max", "n_max", "powers", "chains"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise ValueError(f"--{name.replace('_', '-')} must be >= 1, got {value}")
    if getattr(args, "degree", None) is not None and args.degree < 4:
        raise ValueError(f"--degree must be >= 4, got {args.degree}")
    if args.threads is not None and args.threads < 1:
        raise ValueError(f"--threads must be >= 1, got {args.threads}")


def run(argv: Optional[List[str]] = None) -> RunManifest:
    """Run one subcommand and write its outputs plus manifest.json under --out."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    _check_flags(args)

    ensure_dir(args.out)
    started = time.perf_counter()
    paths = args.func(args)
    wall_time = time.perf_counter() - started

    parameters = {
        key: value for key, value in vars(args).items() if key not in ("func", "command", "verification_valid")
    }
    manifest = RunManifest(
        command=args.command,
        parameters=parameters,
        seed=getattr(args, "seed", None),
        tool_version=__version__,
        wall_time=wall_time,
        outputs=digests(paths),
    )
    write_json(os.path.join(args.out, "manifest.json"), manifest, "run-manifest.json")
    logging.info(f"{args.command} finished in {wall_time:.2f}s, {len(paths)} output files")

    if getattr(args, "verification_valid", True) is False:
        raise VerificationFailure(f"Suite {args.suite} reported failing checks")
    return manifest


def main(argv: Optional[List[str]] = None) -> int:
    try:
        run(argv)
    except GaussRenyiError as e:
        logging.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except ValueError as e:
        logging.error(f"Invalid arguments: {e}")
        return 1
    except Exception as e:
        logging.error(f"Error during run: {e}")
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
