from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class BoundReport(BaseModel):
    """
    Essential-spectral-radius bound of L_p acting on C^k([0,1]).

    Attributes:
        p: coin probability, 0 < p < 1
        k: smoothness order, k >= 1
        zeta_value: Riemann zeta at 2k+2
        bound: zeta_value - min(p, 1-p)
        quasi_compact: True when bound < 1
    """

    p: float
    k: int
    zeta_value: float
    bound: float
    quasi_compact: bool


class BoundsTable(BaseModel):
    """
    One row per k plus the derived quantities for a fixed p.

    Attributes:
        p: coin probability
        rows: BoundReport for k = 1..k_max
        min_quasicompact_k: smallest k with bound < 1
        ck_constants: (2k)^k per row
    """

    p: float
    rows: List[BoundReport] = []
    min_quasicompact_k: Optional[int] = None
    ck_constants: List[int] = []


class RunManifest(BaseModel):
    """
    Written once per CLI run next to its outputs.

    Attributes:
        command: subcommand name
        parameters: effective parameters after flags override settings
        seed: RNG seed, when the command draws random numbers
        tool_version: package version
        wall_time: seconds spent in the command
        outputs: file name -> hex SHA-256 of its bytes
    """

    command: str
    parameters: Dict[str, Any] = {}
    seed: Optional[int] = None
    tool_version: str
    wall_time: float = 0.0
    outputs: Dict[str, str] = {}


class DensityReport(BaseModel):
    """
    Metadata of one invariant-density computation.

    Attributes:
        p: coin probability
        degree: collocation degree
        tail: tail policy used for the matrix (N, order, tol)
        lambda1: leading eigenvalue
        lambda2: modulus of the subdominant eigenvalue
        residual: sup-norm of L h - lambda1 h at the nodes
        iterations: power-iteration steps
        integral: quadrature of h
        min_nodal_value: smallest value of h at a node
        tail_estimate: first omitted tail term for h
        closed_form_deviation: sup distance to the Gauss density (p = 1 only)
        representation: "nodal" for the plain eigenvector, "lifted" for the resolvent lift
        mass_correction: largest column shift that made the matrix conserve mass
    """

    p: float
    degree: int
    tail: Dict[str, Any]
    lambda1: float
    lambda2: Optional[float] = None
    residual: float
    iterations: int
    integral: float
    min_nodal_value: float
    tail_estimate: float
    closed_form_deviation: Optional[float] = None
    representation: str = "nodal"
    mass_correction: float = 0.0


class SimulationReport(BaseModel):
    """
    Metadata of one Monte-Carlo run.

    Attributes:
        p, seed, rng_algorithm_id, burn_in: the coin and the chain setup
        samples, chains, bins: sizes
        l1_distance: histogram distance to the reference density
        reference: "gauss-closed-form" or "collocation"
    """

    p: float
    seed: int
    rng_algorithm_id: str
    burn_in: int
    samples: int
    chains: int
    bins: int
    l1_distance: Optional[float] = None
    reference: Optional[str] = None


class SplitReport(BaseModel):
    """
    Checks of one sub-Markov split.

    Attributes:
        split: "banach" or "hardy"
        p: coin probability
        degree: collocation degree
        resolvent_residual: max of |J(I-B) - I| and |(I-B)J - I|
        condition_number: 2-norm condition number of I - B
        markov_residual: |w^T Lhat - w^T| in the sup norm
        lambda1_hat: leading eigenvalue of Lhat
        lift_discrepancy: sup distance between the lifted and the direct density
        lift_fixed_point_residual: sup of |L_p h - h| at the nodes for the lifted h
        neumann_terms: partial sums used by the Neumann diagnostic
        neumann_ratio: measured geometric decay of the Neumann corrections
        neumann_ratio_bound: predicted decay ratio
        b2_bound: 1 - 3p/4
        b_power_norms: m -> coefficient sup of B^m
    """

    split: str
    p: float
    degree: int
    resolvent_residual: float
    condition_number: float
    markov_residual: float
    lambda1_hat: float
    lift_discrepancy: float
    lift_fixed_point_residual: float
    neumann_terms: int
    neumann_ratio: float
    neumann_ratio_bound: float
    b2_bound: float
    b_power_norms: Dict[int, float] = {}


class HardyRow(BaseModel):
    """One n of the Hardy-space norms table."""

    n: int
    hs: float
    trace_bound: float
    op_bound: float
    eta_sq: float
    xi_sq: float


class VerificationResponse(BaseModel):
    """
    Outcome of an acceptance suite run.

    Attributes:
        suite: requested suite name
        valid: True when every check passed
        passed, failed: check counts
        checks: per-check details (name, passed, value, tolerance)
        metadata: versions and timestamps
    """

    suite: str
    valid: bool = False
    passed: int = 0
    failed: int = 0
    checks: List[Dict[str, Any]] = Field(default_factory=list)
    metadata: Optional[Dict[str, Any]] = {}
