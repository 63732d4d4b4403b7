"""Heralded multi-source event generation and rate estimation.

A SourceBank models k heralded pair sources feeding a photonic chip: a
per-pulse generation probability and heralding efficiency per source, an
optional source injecting a fixed pair of modes, an optional fiber
switcher cycling one source over several input ports, and an overall
detection efficiency.  Pulses whose heralded photon count matches the
target are assigned an output drawn from the chosen probability model
and post-selected on full coincidence detection.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import full_distribution

DEFAULT_MAX_PULSES = 50_000_000


@dataclass(frozen=True)
class Source:
    id: str
    epsilon: float
    eta_herald: float = 1.0
    input_mode: int | None = None  # None when the switcher routes this source
    pulse_offset: int = 0


@dataclass(frozen=True)
class FixedPair:
    """Source whose two photons enter the chip in fixed modes (no free port)."""
    epsilon: float
    eta_herald: float = 1.0
    modes: tuple[int, int] = (6, 8)
    pulse_offset: int = 0


@dataclass(frozen=True)
class Switcher:
    """Round-robin routing of one source over a cycling list of input ports."""
    source_id: str
    ports: tuple[int, ...]


@dataclass
class SourceBank:
    sources: list[Source]
    fixed_pair: FixedPair | None = None
    switcher: Switcher | None = None
    eta_detect: float = 1.0
    pulse_rate: float = 80e6

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.sources:
            raise ValueError("source bank needs at least one source")
        for src in self.sources:
            if not (0.0 <= src.epsilon <= 1.0):
                raise ValueError(f"source {src.id}: epsilon outside [0, 1]")
            if not (0.0 <= src.eta_herald <= 1.0):
                raise ValueError(f"source {src.id}: eta_herald outside [0, 1]")
        if not (0.0 <= self.eta_detect <= 1.0):
            raise ValueError("eta_detect outside [0, 1]")
        switched = self.switcher.source_id if self.switcher else None
        modes: list[int] = []
        for src in self.sources:
            if src.id == switched:
                continue
            if src.input_mode is None:
                raise ValueError(f"source {src.id} has no input mode and no switcher")
            modes.append(src.input_mode)
        if self.switcher:
            if switched not in {s.id for s in self.sources}:
                raise ValueError(f"switcher references unknown source {switched!r}")
            modes.extend(self.switcher.ports)
        if self.fixed_pair:
            modes.extend(self.fixed_pair.modes)
        if len(set(modes)) != len(modes):
            raise ValueError("input modes referenced by the bank must be distinct")

    @property
    def k(self) -> int:
        return len(self.sources)

    def max_photons(self) -> int:
        live = sum(1 for s in self.sources if s.epsilon > 0 and s.eta_herald > 0)
        if self.fixed_pair and self.fixed_pair.epsilon > 0 and self.fixed_pair.eta_herald > 0:
            live += 2
        return live


@dataclass(frozen=True)
class Event:
    """One detected coincidence: heralded input set and output occupation."""
    pulse_index: int
    input: tuple[int, ...]
    output: tuple[int, ...]
    n: int
    photon_pulse_indices: tuple[int, ...] = ()

    def occupied_output_modes(self) -> tuple[int, ...]:
        """1-based output modes, repeated per occupancy."""
        return tuple(j + 1 for j, occ in enumerate(self.output) for _ in range(occ))


def generate_events(bank: SourceBank, U, n_target: int, model: str, N: int,
                    seed=None, *, x: float | None = None,
                    collision_free: bool = True,
                    require_fixed_pair: bool | None = None,
                    max_pulses: int = DEFAULT_MAX_PULSES) -> list[Event]:
    """Simulate pump pulses until N n_target-photon events are kept.

    Per pulse each source fires independently with probability
    epsilon * eta_herald; the fixed pair injects both of its modes when it
    fires; the switcher advances its port round-robin from a seeded random
    start.  Pulses with exactly n_target heralded photons draw an output
    from the model distribution of their input set, and the event is kept
    only when every output photon survives detection (full coincidence).

    When a fixed pair is present and n_target > 2, qualifying pulses must
    include the pair by default (the experimental trigger logic for the
    3-photon analysis); pass require_fixed_pair to override.
    """
    bank.validate()
    m = U.shape[0]
    if require_fixed_pair is None:
        require_fixed_pair = bank.fixed_pair is not None and n_target > 2
    cap = bank.k + (2 if bank.fixed_pair else 0)
    if n_target > cap:
        raise ValueError(f"n_target = {n_target} exceeds the bank capacity {cap}")
    if n_target > bank.max_photons() or (N > 0 and bank.eta_detect == 0.0):
        raise ValueError("requested photon number is unreachable with this bank")
    if require_fixed_pair and (bank.fixed_pair is None or bank.fixed_pair.epsilon == 0):
        raise ValueError("fixed pair required but cannot fire")

    rng = np.random.default_rng(seed)
    ports = bank.switcher.ports if bank.switcher else ()
    switch_pos = int(rng.integers(len(ports))) if ports else 0
    dist_cache: dict[tuple[int, ...], object] = {}
    events: list[Event] = []
    pulse = 0
    while len(events) < N:
        pulse += 1
        if pulse > max_pulses:
            raise RuntimeError(f"exceeded {max_pulses} pulses with only {len(events)} events")
        heralds: list[tuple[int, int]] = []  # (input mode, pulse offset)
        pair_fired = False
        fp = bank.fixed_pair
        if fp is not None and rng.random() < fp.epsilon * fp.eta_herald:
            pair_fired = True
            heralds.append((fp.modes[0], fp.pulse_offset))
            heralds.append((fp.modes[1], fp.pulse_offset))
        port = ports[switch_pos] if ports else None
        for src in bank.sources:
            if rng.random() < src.epsilon * src.eta_herald:
                mode = port if (bank.switcher and src.id == bank.switcher.source_id) else src.input_mode
                heralds.append((mode, src.pulse_offset))
        if ports:
            switch_pos = (switch_pos + 1) % len(ports)
        if len(heralds) != n_target:
            continue
        if require_fixed_pair and not pair_fired:
            continue
        heralds.sort()
        input_modes = tuple(h[0] for h in heralds)
        if any(mode > m for mode in input_modes):
            raise ValueError(f"bank input modes {input_modes} exceed unitary size m = {m}")
        dist = dist_cache.get(input_modes)
        if dist is None:
            dist = full_distribution(U, input_modes, model=model, x=x,
                                     collision_free_only=collision_free)
            dist_cache[input_modes] = dist
        occ = dist.sample(rng)
        if bank.eta_detect < 1.0 and np.any(rng.random(n_target) >= bank.eta_detect):
            continue
        photon_pulses = tuple(pulse - h[1] for h in heralds)
        events.append(Event(pulse, input_modes, occ, n_target, photon_pulses))
    return events


def enumerate_combinations(input_sets, m: int, n: int, collision_free: bool = True) -> int:
    """Number of input x output combinations available to the bookkeeping."""
    outputs = math.comb(m, n) if collision_free else math.comb(m + n - 1, n)
    return len(list(input_sets)) * outputs


def mix_fixed_input_datasets(datasets, seed=None) -> list[Event]:
    """Uniform random interleaving of per-input event lists."""
    datasets = list(datasets)
    if not datasets or all(len(d) == 0 for d in datasets):
        raise ValueError("need at least one non-empty dataset")
    pooled = [ev for ds in datasets for ev in ds]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pooled))
    return [pooled[i] for i in order]


def scattershot_event_probability(k: int, n: int, epsilon: float) -> float:
    """Leading-order probability binom(k, n) * epsilon^n of an n-photon pulse."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError("epsilon outside [0, 1]")
    if n > k:
        raise ValueError(f"cannot herald n = {n} photons from k = {k} sources")
    return math.comb(k, n) * epsilon**n


@dataclass(frozen=True)
class RateEstimate:
    per_pulse_probability: float
    pulse_rate: float
    boost_factor: float = 1.0

    @property
    def events_per_second(self) -> float:
        return self.per_pulse_probability * self.pulse_rate

    def seconds_for(self, N: int) -> float:
        if self.events_per_second == 0.0:
            return math.inf
        return N / self.events_per_second


@dataclass(frozen=True)
class RuntimeComparison:
    fixed: RateEstimate
    scattershot: RateEstimate

    @property
    def boost_factor(self) -> float:
        return self.scattershot.boost_factor


# Reference experimental parameters behind the `estimate --preset paper` command.
PAPER_PRESET = {
    "pulse_rate": 80e6,
    "epsilon": 0.015,
    "eta_herald": 0.5,
    "eta_detect": 0.15,
    "n": 4,
    "k": 100,
    "events": 2000,
}


def runtime_estimate(k: int, n: int, epsilon: float, eta_herald: float,
                     eta_detect: float, pulse_rate: float) -> RuntimeComparison:
    """Fixed-input vs scattershot event rates for identical ideal sources.

    Fixed-input per-pulse probability is (epsilon * eta_herald * eta_detect)^n;
    the scattershot variant is boosted by binom(k, n).
    """
    if pulse_rate <= 0:
        raise ValueError("pulse rate must be positive")
    for name, val in (("epsilon", epsilon), ("eta_herald", eta_herald),
                      ("eta_detect", eta_detect)):
        if not (0.0 <= val <= 1.0):
            raise ValueError(f"{name} outside [0, 1]")
    p_fixed = (epsilon * eta_herald * eta_detect) ** n
    boost = float(math.comb(k, n))
    fixed = RateEstimate(p_fixed, pulse_rate, boost_factor=1.0)
    shot = RateEstimate(p_fixed * boost, pulse_rate, boost_factor=boost)
    return RuntimeComparison(fixed=fixed, scattershot=shot)


def default_bank_13(epsilon: float = 0.08, eta_herald: float = 0.9,
                    eta_detect: float = 0.85, pulse_rate: float = 80e6) -> SourceBank:
    """Stand-in for the 13-mode setup: a fixed pair in modes 6 and 8, four
    single-photon sources in fixed ports and a fifth distributed over four
    further ports by the fiber switcher (8 possible third-photon ports).

    Two of the sources sit one pump pulse behind the rest (time
    multiplexing), including the one feeding mode 13.
    """
    sources = [
        Source(id="S1", epsilon=epsilon, eta_herald=eta_herald, input_mode=9),
        Source(id="S3", epsilon=epsilon, eta_herald=eta_herald, input_mode=11),
        Source(id="S4", epsilon=epsilon, eta_herald=eta_herald, input_mode=4),
        Source(id="S5", epsilon=epsilon, eta_herald=eta_herald, input_mode=13,
               pulse_offset=1),
        Source(id="S6", epsilon=epsilon, eta_herald=eta_herald, input_mode=None,
               pulse_offset=1),
    ]
    return SourceBank(
        sources=sources,
        fixed_pair=FixedPair(epsilon=epsilon, eta_herald=eta_herald, modes=(6, 8)),
        switcher=Switcher(source_id="S6", ports=(1, 3, 5, 12)),
        eta_detect=eta_detect,
        pulse_rate=pulse_rate,
    )


# --- file formats -----------------------------------------------------------

def bank_to_json(bank: SourceBank) -> dict:
    obj = {
        "sources": [
            {"id": s.id, "epsilon": s.epsilon, "eta_herald": s.eta_herald,
             "input_mode": s.input_mode, "pulse_offset": s.pulse_offset}
            for s in bank.sources
        ],
        "fixed_pair": None,
        "switcher": None,
        "eta_detect": bank.eta_detect,
        "pulse_rate": bank.pulse_rate,
    }
    if bank.fixed_pair:
        fp = bank.fixed_pair
        obj["fixed_pair"] = {"epsilon": fp.epsilon, "eta_herald": fp.eta_herald,
                             "modes": list(fp.modes), "pulse_offset": fp.pulse_offset}
    if bank.switcher:
        obj["switcher"] = {"source": bank.switcher.source_id,
                           "ports": list(bank.switcher.ports)}
    return obj


def bank_from_json(obj: dict) -> SourceBank:
    sources = [
        Source(id=s["id"], epsilon=s["epsilon"], eta_herald=s.get("eta_herald", 1.0),
               input_mode=s.get("input_mode"), pulse_offset=s.get("pulse_offset", 0))
        for s in obj["sources"]
    ]
    fixed_pair = None
    if obj.get("fixed_pair"):
        fp = obj["fixed_pair"]
        fixed_pair = FixedPair(epsilon=fp["epsilon"], eta_herald=fp.get("eta_herald", 1.0),
                               modes=tuple(fp["modes"]), pulse_offset=fp.get("pulse_offset", 0))
    switcher = None
    if obj.get("switcher"):
        sw = obj["switcher"]
        switcher = Switcher(source_id=sw["source"], ports=tuple(sw["ports"]))
    return SourceBank(sources=sources, fixed_pair=fixed_pair, switcher=switcher,
                      eta_detect=obj.get("eta_detect", 1.0),
                      pulse_rate=obj.get("pulse_rate", 80e6))


def save_bank(bank: SourceBank, path) -> None:
    with open(path, "w") as fh:
        json.dump(bank_to_json(bank), fh, indent=2)


def load_bank(path) -> SourceBank:
    with open(path) as fh:
        return bank_from_json(json.load(fh))


def write_event_log(events, path) -> None:
    """CSV columns: pulse_index, n, input (dash-separated modes), output
    (dash-separated occupied modes with multiplicity)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pulse_index", "n", "input", "output"])
        for ev in events:
            writer.writerow([
                ev.pulse_index, ev.n,
                "-".join(str(s) for s in ev.input),
                "-".join(str(j) for j in ev.occupied_output_modes()),
            ])


def read_event_log(path, m: int) -> list[Event]:
    events = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            inputs = tuple(int(s) for s in row["input"].split("-"))
            occ = [0] * m
            for j in row["output"].split("-"):
                occ[int(j) - 1] += 1
            events.append(Event(pulse_index=int(row["pulse_index"]),
                                input=inputs, output=tuple(occ), n=int(row["n"])))
    return events
