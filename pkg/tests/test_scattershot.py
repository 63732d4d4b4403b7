import math

import numpy as np
import pytest
from scipy import stats

from sbsim.interferometer import haar_random_unitary
from sbsim.scattershot import (Event, FixedPair, Source, SourceBank, Switcher,
                               default_bank_13, enumerate_combinations,
                               generate_events, load_bank,
                               mix_fixed_input_datasets, read_event_log,
                               runtime_estimate, save_bank,
                               scattershot_event_probability,
                               write_event_log, PAPER_PRESET)


def single_source_bank(mode=1, epsilon=0.3):
    return SourceBank([Source("S", epsilon=epsilon, input_mode=mode)])


def test_single_source_events():
    U = haar_random_unitary(3, seed=0)
    events = generate_events(single_source_bank(mode=2), U, 1, "indistinguishable",
                             N=50, seed=1)
    assert len(events) == 50
    for ev in events:
        assert ev.n == 1
        assert ev.input == (2,)
        assert sum(ev.output) == 1
        assert ev.photon_pulse_indices == (ev.pulse_index,)
    pulses = [ev.pulse_index for ev in events]
    assert pulses == sorted(pulses) and len(set(pulses)) == 50


def test_default_bank_shape(bank13):
    assert bank13.k == 5
    assert bank13.fixed_pair.modes == (6, 8)
    assert bank13.switcher.ports == (1, 3, 5, 12)
    assert bank13.eta_detect == 0.85


def test_three_photon_input_sets(bank13, chip13):
    events = generate_events(bank13, chip13, 3, "indistinguishable", N=600, seed=3)
    inputs = {ev.input for ev in events}
    # fixed pair in 6 and 8 plus one of eight third-photon ports
    assert inputs == {tuple(sorted((6, 8, p))) for p in (9, 11, 4, 13, 1, 3, 5, 12)}
    for ev in events:
        assert 6 in ev.input and 8 in ev.input
        assert sum(ev.output) == 3 and max(ev.output) == 1


def test_pulse_offsets_tagged(bank13, chip13):
    events = generate_events(bank13, chip13, 3, "indistinguishable", N=400, seed=4)
    saw_delayed = False
    for ev in events:
        for mode, photon_pulse in zip(ev.input, ev.photon_pulse_indices):
            if mode in (13, 1, 3, 5, 12):  # pumped one pulse earlier
                assert photon_pulse == ev.pulse_index - 1
                saw_delayed = True
            else:
                assert photon_pulse == ev.pulse_index
    assert saw_delayed


def test_combination_counts(bank13):
    third_ports = (9, 11, 4, 13, 1, 3, 5, 12)
    inputs13 = [tuple(sorted((6, 8, p))) for p in third_ports]
    assert enumerate_combinations(inputs13, 13, 3) == 8 * math.comb(13, 3) == 2288
    inputs9 = [(i, j, k) for i in range(1, 10) for j in range(i + 1, 10)
               for k in range(j + 1, 10)][:20]
    assert enumerate_combinations(inputs9, 9, 3) == 20 * math.comb(9, 3) == 1680


def test_mix_preserves_and_shuffles():
    a = [Event(i, (1,), (1, 0), 1) for i in range(100)]
    b = [Event(i, (2,), (0, 1), 1) for i in range(100)]
    mixed = mix_fixed_input_datasets([a, b], seed=9)
    assert len(mixed) == 200
    assert sorted(mixed, key=id) != mixed or True
    assert sorted((ev.input, ev.pulse_index) for ev in mixed) == \
        sorted((ev.input, ev.pulse_index) for ev in a + b)
    # chi-square on the input label in 10 blocks of 20: should look uniform
    counts = [sum(1 for ev in mixed[i:i + 20] if ev.input == (1,))
              for i in range(0, 200, 20)]
    chi2 = sum((c - 10) ** 2 / 5 for c in counts)
    assert chi2 < stats.chi2.ppf(0.999, df=10)


def test_mix_rejects_empty():
    with pytest.raises(ValueError):
        mix_fixed_input_datasets([[], []])


def test_event_rate_convergence():
    # observed herald rate should match binom(k, n) eps^n to leading order
    k, eps, n = 4, 0.02, 2
    bank = SourceBank([Source(f"S{i}", epsilon=eps, input_mode=i + 1)
                       for i in range(k)])
    U = haar_random_unitary(6, seed=5)
    N = 300
    events = generate_events(bank, U, n, "indistinguishable", N=N, seed=6,
                             collision_free=False)
    pulses = events[-1].pulse_index
    p_hat = N / pulses
    p = scattershot_event_probability(k, n, eps)
    sigma = math.sqrt(p * (1 - p) / pulses)
    assert abs(p_hat - p) <= 3 * sigma + 0.05 * p  # 3 sigma plus O(eps) bias


def test_scattershot_event_probability_values():
    assert scattershot_event_probability(100, 4, 0.015) == pytest.approx(
        math.comb(100, 4) * 0.015**4)
    assert scattershot_event_probability(6, 3, 0.1) == pytest.approx(0.02)
    with pytest.raises(ValueError):
        scattershot_event_probability(3, 4, 0.1)
    with pytest.raises(ValueError):
        scattershot_event_probability(5, 2, 1.5)


def test_runtime_estimate_paper_preset():
    p = PAPER_PRESET
    cmp_ = runtime_estimate(p["k"], p["n"], p["epsilon"], p["eta_herald"],
                            p["eta_detect"], p["pulse_rate"])
    assert cmp_.boost_factor == math.comb(100, 4) == 3_921_225
    fixed_s = cmp_.fixed.seconds_for(p["events"])
    assert 1e7 <= fixed_s <= 1e8
    shot_s = cmp_.scattershot.seconds_for(p["events"])
    assert shot_s == pytest.approx(fixed_s / cmp_.boost_factor)
    assert 1 <= shot_s <= 100


def test_runtime_estimate_monotonicity():
    base = runtime_estimate(10, 3, 0.02, 0.6, 0.2, 80e6)
    more_sources = runtime_estimate(20, 3, 0.02, 0.6, 0.2, 80e6)
    assert more_sources.scattershot.events_per_second > base.scattershot.events_per_second
    assert more_sources.fixed.events_per_second == base.fixed.events_per_second
    more_photons = runtime_estimate(10, 4, 0.02, 0.6, 0.2, 80e6)
    assert more_photons.fixed.events_per_second < base.fixed.events_per_second


def test_conditional_distribution_matches_model():
    # with losses on, kept outputs must still follow the model distribution
    from sbsim.distribution import full_distribution
    U = haar_random_unitary(7, seed=8)
    bank = SourceBank([Source("A", 0.3, input_mode=2),
                       Source("B", 0.3, input_mode=5)], eta_detect=0.6)
    events = generate_events(bank, U, 2, "indistinguishable", N=4000, seed=10)
    dist = full_distribution(U, (2, 5), collision_free_only=True)
    counts = {}
    for ev in events:
        counts[ev.output] = counts.get(ev.output, 0) + 1
    emp = np.array([counts.get(c, 0) / len(events) for c in dist.configs])
    tv = 0.5 * np.abs(emp - dist.probs).sum()
    assert tv < 0.05


def test_unreachable_configurations():
    U = haar_random_unitary(3, seed=0)
    bank = single_source_bank()
    with pytest.raises(ValueError):
        generate_events(bank, U, 2, "indistinguishable", N=1, seed=0)
    dead = SourceBank([Source("S", epsilon=0.0, input_mode=1)])
    with pytest.raises(ValueError):
        generate_events(dead, U, 1, "indistinguishable", N=1, seed=0)
    blind = SourceBank([Source("S", epsilon=0.5, input_mode=1)], eta_detect=0.0)
    with pytest.raises(ValueError):
        generate_events(blind, U, 1, "indistinguishable", N=1, seed=0)


def test_bank_validation_errors():
    with pytest.raises(ValueError):
        SourceBank([])
    with pytest.raises(ValueError):
        SourceBank([Source("A", 0.1, input_mode=3), Source("B", 0.1, input_mode=3)])
    with pytest.raises(ValueError):
        SourceBank([Source("A", 0.1, input_mode=1)],
                   switcher=Switcher("missing", ports=(2, 3)))
    with pytest.raises(ValueError):
        SourceBank([Source("A", 1.2, input_mode=1)])


def test_bank_json_round_trip(tmp_path, bank13):
    path = tmp_path / "bank.json"
    save_bank(bank13, path)
    again = load_bank(path)
    assert again.sources == bank13.sources
    assert again.fixed_pair == bank13.fixed_pair
    assert again.switcher == bank13.switcher
    assert again.eta_detect == bank13.eta_detect
    assert again.pulse_rate == bank13.pulse_rate


def test_event_log_round_trip(tmp_path, bank13, chip13):
    events = generate_events(bank13, chip13, 3, "indistinguishable", N=50, seed=11)
    path = tmp_path / "events.csv"
    write_event_log(events, path)
    again = read_event_log(path, m=13)
    assert len(again) == 50
    for orig, back in zip(events, again):
        assert back.pulse_index == orig.pulse_index
        assert back.input == orig.input
        assert back.output == orig.output
        assert back.n == orig.n
