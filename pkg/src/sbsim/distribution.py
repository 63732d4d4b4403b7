"""Exact output distributions for n photons in an m-mode interferometer.

Probability models: indistinguishable photons (squared-modulus permanent),
fully distinguishable photons (permanent of the entrywise |u|^2 matrix),
a one-parameter convex mixture of the two, and the uniform null model.
Input configurations are collision-free (one photon per input mode);
output spaces may be full Fock or restricted to collision-free outcomes.
"""

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .interferometer import submatrix
from .permanent import permanent_ryser

ENUMERATION_GUARD = 10**7
FACTORIAL_MAX_N = 20
MODELS = ("indistinguishable", "distinguishable", "partial", "uniform")


def _occupation_norm(occupation) -> float:
    norm = 1.0
    for occ in occupation:
        if occ > FACTORIAL_MAX_N:
            raise ValueError(f"occupancy {occ} exceeds factorial table (n <= {FACTORIAL_MAX_N})")
        norm *= math.factorial(occ)
    return norm


def _check_config(U, inputs, occupation):
    m = U.shape[0]
    inputs = tuple(inputs)
    occupation = tuple(int(o) for o in occupation)
    if len(occupation) != m:
        raise ValueError(f"occupation must have length m = {m}")
    if sum(occupation) != len(inputs):
        raise ValueError("photon numbers of input and output differ")
    return inputs, occupation


def prob_indistinguishable(U, inputs, occupation) -> float:
    """|Per(U_sub)|^2 / prod_j t_j! for collision-free inputs."""
    inputs, occupation = _check_config(U, inputs, occupation)
    sub = submatrix(U, inputs, occupation)
    per = permanent_ryser(sub)
    return abs(per) ** 2 / _occupation_norm(occupation)


def prob_distinguishable(U, inputs, occupation) -> float:
    """Classical independent-routing probability: Per(|U_sub|^2) / prod_j t_j!."""
    inputs, occupation = _check_config(U, inputs, occupation)
    sub = submatrix(U, inputs, occupation)
    per = permanent_ryser(np.abs(sub) ** 2)
    return per.real / _occupation_norm(occupation)


def prob_partial(U, inputs, occupation, x: float) -> float:
    """Convex mixture: x * indistinguishable + (1 - x) * distinguishable."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"indistinguishability x = {x} outside [0, 1]")
    return (x * prob_indistinguishable(U, inputs, occupation)
            + (1.0 - x) * prob_distinguishable(U, inputs, occupation))


def output_space_size(m: int, n: int, collision_free: bool) -> int:
    return math.comb(m, n) if collision_free else math.comb(m + n - 1, n)


def enumerate_outputs(m: int, n: int, collision_free: bool,
                      guard: int = ENUMERATION_GUARD) -> list[tuple[int, ...]]:
    """All output occupations in a fixed lexicographic order."""
    size = output_space_size(m, n, collision_free)
    if size > guard:
        raise ValueError(f"output space of {size} configs exceeds guard {guard}")
    configs = []
    combos = (itertools.combinations(range(m), n) if collision_free
              else itertools.combinations_with_replacement(range(m), n))
    for combo in combos:
        occ = [0] * m
        for j in combo:
            occ[j] += 1
        configs.append(tuple(occ))
    return configs


@dataclass
class OutputDistribution:
    m: int
    n: int
    configs: list[tuple[int, ...]]
    probs: np.ndarray
    collision_free_only: bool
    retained_mass: float = 1.0  # mass of the subspace before renormalization

    def __post_init__(self):
        self._index = {c: i for i, c in enumerate(self.configs)}
        self._cdf = None

    def prob(self, occupation) -> float:
        return float(self.probs[self._index[tuple(occupation)]])

    def sample(self, rng, size: int | None = None):
        """Inverse-CDF draws; returns one occupation tuple or a list."""
        if self._cdf is None:
            self._cdf = np.cumsum(self.probs)
            self._cdf[-1] = 1.0
        if size is None:
            idx = int(np.searchsorted(self._cdf, rng.random(), side="right"))
            return self.configs[idx]
        idx = np.searchsorted(self._cdf, rng.random(size), side="right")
        return [self.configs[i] for i in idx]


def sample_output(dist: OutputDistribution, seed=None):
    return dist.sample(np.random.default_rng(seed))


def full_distribution(U, inputs, model: str = "indistinguishable",
                      x: float | None = None, collision_free_only: bool = True,
                      guard: int = ENUMERATION_GUARD) -> OutputDistribution:
    """Enumerate every output configuration and compute its probability.

    The full space sums to 1 (up to round-off); the collision-free
    subspace is renormalized and remembers the retained mass.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    m = U.shape[0]
    inputs = tuple(inputs)
    n = len(inputs)
    if model == "uniform":
        return uniform_distribution(m, n, collision_free_only, guard=guard)
    configs = enumerate_outputs(m, n, collision_free_only, guard=guard)
    if model == "indistinguishable":
        prob_fn = prob_indistinguishable
    elif model == "distinguishable":
        prob_fn = prob_distinguishable
    else:
        if x is None:
            raise ValueError("partial model requires the indistinguishability x")
        def prob_fn(U, s, t, _x=x):
            return prob_partial(U, s, t, _x)
    probs = np.array([prob_fn(U, inputs, occ) for occ in configs])
    mass = float(probs.sum())
    if collision_free_only:
        if mass <= 0.0:
            raise ValueError("collision-free subspace has zero probability mass")
        probs = probs / mass
        return OutputDistribution(m, n, configs, probs, True, retained_mass=mass)
    return OutputDistribution(m, n, configs, probs, False, retained_mass=mass)


def uniform_distribution(m: int, n: int, collision_free_only: bool = True,
                         guard: int = ENUMERATION_GUARD) -> OutputDistribution:
    configs = enumerate_outputs(m, n, collision_free_only, guard=guard)
    probs = np.full(len(configs), 1.0 / len(configs))
    return OutputDistribution(m, n, configs, probs, collision_free_only)


def write_distribution_csv(dist: OutputDistribution, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["occupation", "probability"])
        for occ, p in zip(dist.configs, dist.probs):
            writer.writerow(["-".join(str(o) for o in occ), f"{p:.17g}"])
