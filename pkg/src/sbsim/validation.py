"""Statistical certification of boson-sampling event streams.

Two counter tests are provided: the scalable row-norm discriminator test
against the uniform sampler (per-event threshold calibrated on the
event's own heralded input set, which extends the test to scattershot
data) and a likelihood-ratio counter against the distinguishable or
partially distinguishable sampler.  On top of those sit bootstrap
success-probability curves, fabrication-noise trajectory bands and a
white-noise contamination injector.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import (ENUMERATION_GUARD, enumerate_outputs, full_distribution,
                           output_space_size, prob_distinguishable,
                           prob_indistinguishable, prob_partial)
from .interferometer import compile_layout, perturb_layout, NoiseSpec
from .scattershot import Event, generate_events

DEFAULT_NSET_GRID = (1, 2, 5, 10, 20, 50, 100, 150, 200, 300, 500)
DEFAULT_BOOTSTRAP_TRIALS = 1000
MIN_BOOTSTRAP_TRIALS = 100
THRESHOLD_MC_TRIALS = 20000

VERDICT_BS = "boson_sampler"
VERDICT_ALT = "alternative"
VERDICT_UNDECIDED = "undecided"


@dataclass
class CounterTrajectory:
    increments: np.ndarray  # per-event -1 / 0 / +1

    @property
    def values(self) -> np.ndarray:
        return np.cumsum(self.increments)

    @property
    def final(self) -> int:
        return int(self.increments.sum())


def _verdict(final: int) -> str:
    if final > 0:
        return VERDICT_BS
    if final < 0:
        return VERDICT_ALT
    return VERDICT_UNDECIDED


@dataclass
class ValidationReport:
    test: str
    trajectory: CounterTrajectory
    verdict: str
    n_events: int
    threshold_info: dict = field(default_factory=dict)

    @property
    def final_counter(self) -> int:
        return self.trajectory.final

    def to_json(self) -> dict:
        return {
            "test": self.test,
            "n_events": self.n_events,
            "final_counter": self.final_counter,
            "verdict": self.verdict,
            "trajectory": [int(v) for v in self.trajectory.values],
            "threshold_info": self.threshold_info,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


# --- row-norm discriminator test against the uniform sampler ----------------

def aa_discriminator(U, inputs, occupation) -> float:
    """Product over input photons of (m/n) * sum_j occ_j |u_{s_i, j}|^2.

    An O(n^2) quantity that weakly correlates with the boson-sampling
    probability; no permanent is evaluated.
    """
    U = np.asarray(U)
    m = U.shape[0]
    inputs = tuple(inputs)
    occupation = np.asarray(occupation, dtype=float)
    n = len(inputs)
    if len(occupation) != m or int(occupation.sum()) != n:
        raise ValueError("event sizes inconsistent with the unitary")
    A = np.abs(U[[s - 1 for s in inputs], :]) ** 2  # n x m
    row_sums = A @ occupation
    return float(np.prod((m / n) * row_sums))


def _discriminators_bulk(U, inputs, occ_matrix: np.ndarray) -> np.ndarray:
    """aa_discriminator for many occupations of one input set at once."""
    m = U.shape[0]
    n = len(inputs)
    A = np.abs(np.asarray(U)[[s - 1 for s in inputs], :]) ** 2
    row_sums = A @ occ_matrix.T  # n x K
    return np.prod((m / n) * row_sums, axis=0)


def aa_threshold(U, inputs, *, mode: str = "mean", collision_free: bool = True,
                 guard: int = ENUMERATION_GUARD, mc_trials: int = THRESHOLD_MC_TRIALS,
                 seed=None) -> float:
    """Discriminator threshold under the uniform output null for one input.

    Exhaustive enumeration of the output space when it fits the guard,
    otherwise a fixed-size Monte Carlo over uniform outputs.
    """
    if mode not in ("median", "mean"):
        raise ValueError(f"unknown threshold mode {mode!r}")
    m = np.asarray(U).shape[0]
    n = len(tuple(inputs))
    if output_space_size(m, n, collision_free) <= guard:
        configs = enumerate_outputs(m, n, collision_free, guard=guard)
        occ_matrix = np.array(configs, dtype=float)
    else:
        rng = np.random.default_rng(seed)
        occ_matrix = np.zeros((mc_trials, m))
        for row in occ_matrix:
            modes = (rng.choice(m, size=n, replace=False) if collision_free
                     else rng.integers(0, m, size=n))
            for j in modes:
                row[j] += 1
    vals = _discriminators_bulk(U, tuple(inputs), occ_matrix)
    return float(np.median(vals) if mode == "median" else np.mean(vals))


def aa_increments(U, events, *, threshold_mode: str = "mean",
                  collision_free: bool = True, seed=None):
    """Per-event counter increments and the per-input thresholds used."""
    thresholds: dict[tuple[int, ...], float] = {}
    incs = np.zeros(len(events), dtype=np.int64)
    for i, ev in enumerate(events):
        thr = thresholds.get(ev.input)
        if thr is None:
            thr = aa_threshold(U, ev.input, mode=threshold_mode,
                               collision_free=collision_free, seed=seed)
            thresholds[ev.input] = thr
        P = aa_discriminator(U, ev.input, ev.output)
        incs[i] = 1 if P > thr else (-1 if P < thr else 0)
    return incs, thresholds


def aa_test(U, events, *, threshold_mode: str = "mean",
            collision_free: bool = True, seed=None) -> ValidationReport:
    """Counter test of the event stream against the uniform-sampler null."""
    _check_events(events)
    incs, thresholds = aa_increments(U, events, threshold_mode=threshold_mode,
                                     collision_free=collision_free, seed=seed)
    traj = CounterTrajectory(incs)
    info = {
        "mode": threshold_mode,
        "thresholds": {"-".join(map(str, k)): v for k, v in thresholds.items()},
    }
    return ValidationReport("aa-uniform", traj, _verdict(traj.final),
                            len(events), info)


# --- likelihood-ratio test against the distinguishable sampler --------------

def lr_increments(U, events, *, alt_model: str = "distinguishable",
                  x: float | None = None) -> np.ndarray:
    if alt_model == "distinguishable":
        def q_fn(inputs, occ):
            return prob_distinguishable(U, inputs, occ)
    elif alt_model == "partial":
        if x is None:
            raise ValueError("partial alternative requires the indistinguishability x")
        def q_fn(inputs, occ):
            return prob_partial(U, inputs, occ, x)
    else:
        raise ValueError(f"unknown alternative model {alt_model!r}")
    incs = np.zeros(len(events), dtype=np.int64)
    for i, ev in enumerate(events):
        p = prob_indistinguishable(U, ev.input, ev.output)
        q = q_fn(ev.input, ev.output)
        if math.isclose(p, q, rel_tol=1e-12, abs_tol=1e-300):
            continue  # rounding noise must not drive the counter
        incs[i] = 1 if p > q else -1
    return incs


def likelihood_ratio_test(U, events, *, alt_model: str = "distinguishable",
                          x: float | None = None) -> ValidationReport:
    """Per-event comparison of indistinguishable vs alternative probabilities.

    Probabilities are always evaluated on the event's own heralded input
    set, so scattershot streams need no pooling.
    """
    _check_events(events)
    incs = lr_increments(U, events, alt_model=alt_model, x=x)
    traj = CounterTrajectory(incs)
    name = f"lr-{alt_model}" if alt_model != "partial" else f"lr-partial({x})"
    return ValidationReport(name, traj, _verdict(traj.final), len(events),
                            {"alt_model": alt_model, "x": x})


def _check_events(events) -> None:
    if not events:
        raise ValueError("empty event list")
    ns = {ev.n for ev in events}
    if len(ns) > 1:
        raise ValueError(f"mixed photon numbers in event stream: {sorted(ns)}")


# --- bootstrap success curves ------------------------------------------------

@dataclass
class SuccessCurve:
    points: list[tuple[int, float, float]]  # (N_set, P_success, stderr)

    def min_Nset_for(self, threshold: float) -> int | None:
        for n_set, p, _ in self.points:
            if p >= threshold:
                return n_set
        return None

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["N_set", "P_success", "stderr"])
            for n_set, p, se in self.points:
                writer.writerow([n_set, f"{p:.17g}", f"{se:.17g}"])


def event_increments(U, events, test: str, **kwargs) -> np.ndarray:
    """Counter increments of one of the named tests for an event stream."""
    if test == "aa-uniform":
        incs, _ = aa_increments(U, events, **kwargs)
        return incs
    if test in ("lr-distinguishable", "lr-partial"):
        alt = "distinguishable" if test == "lr-distinguishable" else "partial"
        return lr_increments(U, events, alt_model=alt, **kwargs)
    raise ValueError(f"unknown test {test!r}")


def success_curve(U, events, test: str, expected_verdict: str,
                  Nset_grid=DEFAULT_NSET_GRID,
                  bootstrap_trials: int = DEFAULT_BOOTSTRAP_TRIALS,
                  seed=None, **test_kwargs) -> SuccessCurve:
    """Bootstrap estimate of the test's success probability vs data-set size.

    For each N_set, the pooled event increments are resampled with
    replacement bootstrap_trials times; P_success is the fraction of
    resamples whose verdict matches expected_verdict.
    """
    grid = [int(n) for n in Nset_grid]
    if not grid:
        raise ValueError("empty N_set grid")
    if bootstrap_trials < MIN_BOOTSTRAP_TRIALS:
        raise ValueError(f"bootstrap_trials must be >= {MIN_BOOTSTRAP_TRIALS}")
    _check_events(events)
    incs = event_increments(U, events, test, **test_kwargs)
    rng = np.random.default_rng(seed)
    points = []
    for n_set in grid:
        if n_set < 1:
            raise ValueError("N_set values must be >= 1")
        idx = rng.integers(0, len(incs), size=(bootstrap_trials, n_set))
        finals = incs[idx].sum(axis=1)
        if expected_verdict == VERDICT_BS:
            correct = finals > 0
        elif expected_verdict == VERDICT_ALT:
            correct = finals < 0
        else:
            correct = finals == 0
        p = float(correct.mean())
        se = math.sqrt(p * (1.0 - p) / bootstrap_trials)
        points.append((n_set, p, se))
    return SuccessCurve(points)


# --- fabrication-noise trajectory bands --------------------------------------

@dataclass
class NoiseBandTable:
    mean: np.ndarray                 # per-step mean counter value
    std: np.ndarray                  # per-step std over trials
    sigma_multiples: tuple[float, ...]

    def band(self, k: float) -> tuple[np.ndarray, np.ndarray]:
        return self.mean - k * self.std, self.mean + k * self.std


def noise_bands(layout, noise: NoiseSpec, test: str, *, bank=None, inputs=None,
                n_target: int, data_model: str = "indistinguishable",
                x: float | None = None, N_events: int = 500, trials: int = 50,
                sigma_multiples=(1.0, 2.0), seed=None, per_trial_seeds=None,
                collision_free: bool = True, **test_kwargs) -> NoiseBandTable:
    """Counter-trajectory envelopes under fabrication-noise resimulation.

    Each trial perturbs the layout, regenerates N_events events from the
    perturbed chip and runs the test against the nominal (designed)
    unitary; the table holds the per-step mean and spread over trials.
    """
    if trials < 50:
        raise ValueError("noise bands need trials >= 50")
    if (bank is None) == (inputs is None):
        raise ValueError("provide exactly one of bank or inputs")
    U_nominal = compile_layout(layout)
    if per_trial_seeds is None:
        per_trial_seeds = list(np.random.SeedSequence(seed).generate_state(trials))
    elif len(per_trial_seeds) != trials:
        raise ValueError("per_trial_seeds must have one entry per trial")
    trajectories = np.zeros((trials, N_events))
    for t, trial_seed in enumerate(per_trial_seeds):
        spec = NoiseSpec(noise.sigma_t, noise.sigma_phi, seed=int(trial_seed))
        U_t = compile_layout(perturb_layout(layout, spec))
        if bank is not None:
            events = generate_events(bank, U_t, n_target, data_model, N_events,
                                     seed=int(trial_seed), x=x,
                                     collision_free=collision_free)
        else:
            rng = np.random.default_rng(int(trial_seed))
            dist = full_distribution(U_t, inputs, model=data_model, x=x,
                                     collision_free_only=collision_free)
            events = [Event(pulse_index=i, input=tuple(inputs), output=occ,
                            n=n_target)
                      for i, occ in enumerate(dist.sample(rng, size=N_events))]
        incs = event_increments(U_nominal, events, test, **test_kwargs)
        trajectories[t] = np.cumsum(incs)
    return NoiseBandTable(mean=trajectories.mean(axis=0),
                          std=trajectories.std(axis=0),
                          sigma_multiples=tuple(sigma_multiples))


# --- spurious-event contamination --------------------------------------------

def inject_spurious(events, contamination_rate: float, U, seed=None,
                    collision_free: bool = True) -> list[Event]:
    """White-noise contamination: with the given rate an event's output is
    replaced by a uniform draw while its heralded input label is kept."""
    if not (0.0 <= contamination_rate <= 1.0):
        raise ValueError("contamination rate outside [0, 1]")
    if contamination_rate == 0.0:
        return list(events)
    rng = np.random.default_rng(seed)
    m = np.asarray(U).shape[0]
    space_cache: dict[int, list] = {}
    out = []
    for ev in events:
        if rng.random() < contamination_rate:
            configs = space_cache.get(ev.n)
            if configs is None:
                configs = enumerate_outputs(m, ev.n, collision_free)
                space_cache[ev.n] = configs
            occ = configs[int(rng.integers(len(configs)))]
            out.append(Event(ev.pulse_index, ev.input, occ, ev.n,
                             ev.photon_pulse_indices))
        else:
            out.append(ev)
    return out
