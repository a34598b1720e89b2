"""The random Gauss-Renyi system: maps, digit expansions and Monte-Carlo orbits."""
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gauss_renyi.config import settings
from gauss_renyi.errors import DigitUndefinedError, ReconstructionError

RNG_ALGORITHM_ID = "numpy.Philox4x64-10"


class MapChoice(IntEnum):
    GAUSS = 0
    RENYI = 1


class CoinParams(BaseModel):
    """
    Parameters of the Bernoulli coin driving the random map.

    Attributes:
        p: probability of applying the Gauss map at each step
        seed: 64-bit unsigned root seed
        rng_algorithm_id: identifier of the bit generator, recorded in metadata
    """

    model_config = ConfigDict(frozen=True)

    p: float = Field(ge=0.0, le=1.0)
    seed: int = Field(default_factory=lambda: settings.SEED, ge=0, lt=2 ** 64)
    rng_algorithm_id: str = RNG_ALGORITHM_ID


@dataclass(frozen=True)
class DigitRecord:
    digit: int
    omega: MapChoice

    def __post_init__(self):
        if self.digit < 1:
            raise ValueError(f"Digits are positive integers, got {self.digit}")
        object.__setattr__(self, "omega", MapChoice(self.omega))


def _fold(omega: int, x):
    """omega + (-1)^omega x, the quantity whose reciprocal carries the digit."""
    return x if omega == MapChoice.GAUSS else 1.0 - x


def _check_unit(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"Point must lie in [0, 1], got {x}")


def apply_map(omega: MapChoice, x: float) -> float:
    """T_0(x) = {1/x}, T_1(x) = {1/(1-x)}, with T_0(0) = 0 and T_1(1) = 0."""
    _check_unit(x)
    y = _fold(omega, x)
    if y == 0.0:
        return 0.0
    inverse = 1.0 / y
    return inverse - math.floor(inverse)


def first_digit(omega: MapChoice, x: float) -> int:
    """m with omega + (-1)^omega x in (1/(m+1), 1/m]."""
    _check_unit(x)
    y = _fold(omega, x)
    if y == 0.0:
        raise DigitUndefinedError(f"First digit undefined at x={x} for map {MapChoice(omega).name}")
    return int(math.floor(1.0 / y))


def expand_orbit(x: float, omegas: Sequence[int]) -> Tuple[List[DigitRecord], float]:
    """Digit records along the coin sequence and the final state T^n(x)."""
    records = []
    for omega in omegas:
        records.append(DigitRecord(first_digit(omega, x), MapChoice(omega)))
        x = apply_map(omega, x)
    return records, x


def expand(x: float, omegas: Sequence[int]) -> List[DigitRecord]:
    records, _ = expand_orbit(x, omegas)
    return records


def reconstruct(digits: Sequence[DigitRecord], tail: float = 0.0) -> float:
    """Evaluate omega_1 + (-1)^omega_1 / (a_1 + omega_2 + ... + (-1)^omega_n / (a_n + tail))."""
    if not digits:
        raise ReconstructionError("Cannot reconstruct from an empty digit sequence")
    value = digits[-1].digit + tail
    for outer, inner in zip(reversed(digits[:-1]), reversed(digits[1:])):
        if value == 0.0:
            raise ReconstructionError("Zero denominator while folding the nested fraction")
        value = outer.digit + inner.omega + (-1) ** inner.omega / value
    if value == 0.0:
        raise ReconstructionError("Zero denominator while folding the nested fraction")
    first = digits[0].omega
    return first + (-1) ** first / value


def skew_orbit(omegas: Sequence[int], x0: float) -> np.ndarray:
    """Fibre coordinates x, T_{w1}x, T_{w2}T_{w1}x, ... of the skew product."""
    states = [x0]
    for omega in omegas:
        states.append(apply_map(omega, states[-1]))
    return np.asarray(states)


def step_many(coins: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One random step for a batch of states; True coins select the Gauss map."""
    y = np.where(coins, x, 1.0 - x)
    with np.errstate(divide="ignore"):
        inverse = np.where(y == 0.0, 0.0, 1.0 / y)
    return inverse - np.floor(inverse)


def chain_generator(seed: int, chain: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chain])))


def simulate(
    params: CoinParams,
    x0: float,
    burn_in: Optional[int] = None,
    samples: int = 1,
    chains: Optional[int] = None,
) -> np.ndarray:
    """Samples of the stationary random orbit.

    Runs ``chains`` independent Philox streams seeded by (seed, chain index); chain 0
    starts at ``x0`` and the others at a uniform draw from their own stream. Output is
    chain-major, so the result depends only on the arguments.
    """
    _check_unit(x0)
    if samples < 1:
        raise ValueError(f"Need at least one sample, got {samples}")
    burn_in = settings.BURN_IN if burn_in is None else burn_in
    chains = min(chains or settings.CHAINS, samples)
    per_chain = -(-samples // chains)
    steps = burn_in + per_chain

    generators = [chain_generator(params.seed, c) for c in range(chains)]
    coins = np.stack([g.random(steps) < params.p for g in generators])
    x = np.array([x0] + [g.random() for g in generators[1:]])

    out = np.empty((chains, per_chain))
    restarts = 0
    for t in range(steps):
        x = step_many(coins[:, t], x)
        stuck = np.flatnonzero(x == 0.0)
        for c in stuck:
            # exact zero is a roundoff artefact of the finite binary orbit
            x[c] = generators[c].random()
        restarts += len(stuck)
        if t >= burn_in:
            out[:, t - burn_in] = x

    if restarts:
        logging.debug(f"Redrew {restarts} states that hit 0 exactly")
    return out.ravel()[:samples]


def histogram(samples: np.ndarray, bins: int) -> Tuple[np.ndarray, np.ndarray]:
    counts, edges = np.histogram(samples, bins=bins, range=(0.0, 1.0))
    return counts, edges


def histogram_l1(samples: np.ndarray, bins: int, masses: np.ndarray) -> float:
    """sum over bins |empirical frequency - exact bin mass|."""
    counts, _ = histogram(samples, bins)
    return float(np.sum(np.abs(counts / len(samples) - masses)))


def gauss_bin_masses(edges: np.ndarray) -> np.ndarray:
    """Bin masses of the Gauss measure, log2((1+b)/(1+a))."""
    edges = np.asarray(edges, dtype=float)
    return np.log2((1.0 + edges[1:]) / (1.0 + edges[:-1]))
