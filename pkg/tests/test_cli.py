import json

import numpy as np
import pytest

from sbsim.cli import main
from sbsim.interferometer import load_layout, load_unitary, save_unitary
from sbsim.scattershot import load_bank, read_event_log


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def gen_unitary(tmp_path, capsys, m=9, kind="chip", seed=2):
    upath = tmp_path / "u.json"
    lpath = tmp_path / "layout.json"
    code, out, _ = run(capsys, "--seed", str(seed), "unitary", "gen",
                       "--modes", str(m), "--layout", kind,
                       "--unitary-out", str(upath), "--layout-out", str(lpath))
    assert code == 0
    return upath, lpath


def test_unitary_gen_and_inspect(tmp_path, capsys):
    upath, lpath = gen_unitary(tmp_path, capsys)
    U = load_unitary(upath)
    assert U.shape == (9, 9)
    lay = load_layout(lpath)
    assert lay.m == 9
    heat = tmp_path / "heat.csv"
    code, out, _ = run(capsys, "unitary", "inspect", "--unitary-in", str(upath),
                       "--heatmap-out", str(heat))
    assert code == 0
    assert "m=9" in out
    rows = heat.read_text().strip().splitlines()
    assert rows[0] == "i,j,abs_u_sq"
    assert len(rows) == 1 + 81


def test_unitary_inspect_rejects_corruption(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys, m=5)
    U = load_unitary(upath)
    U[0, 0] += 0.3
    save_unitary(U, upath)
    code, _, err = run(capsys, "unitary", "inspect", "--unitary-in", str(upath))
    assert code == 1
    assert "REJECTED" in err


def test_unitary_perturb(tmp_path, capsys):
    upath, lpath = gen_unitary(tmp_path, capsys)
    lp = tmp_path / "lp.json"
    up = tmp_path / "up.json"
    code, _, _ = run(capsys, "--seed", "5", "unitary", "perturb",
                     "--layout-in", str(lpath), "--layout-out", str(lp),
                     "--unitary-out", str(up))
    assert code == 0
    assert not np.array_equal(load_unitary(up), load_unitary(upath))
    assert load_unitary(up, max_deviation=1e-6).shape == (9, 9)


def test_simulate_fixed_with_mix(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys)
    out_csv = tmp_path / "events.csv"
    code, out, _ = run(capsys, "--seed", "7", "simulate", "fixed",
                       "--unitary", str(upath), "--inputs", "1,4,7;2,5,8",
                       "--events", "30", "--mix", "--out", str(out_csv))
    assert code == 0
    assert "events=60" in out and "distinct_input_sets=2" in out
    assert f"combinations={2 * 84}" in out
    events = read_event_log(out_csv, m=9)
    assert len(events) == 60
    assert {ev.input for ev in events} == {(1, 4, 7), (2, 5, 8)}


def test_simulate_fixed_requires_inputs(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys)
    with pytest.raises(SystemExit):
        main(["simulate", "fixed", "--unitary", str(upath), "--events", "5"])


def test_bank_and_scattershot_simulation(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys, m=13, seed=1)
    bank_path = tmp_path / "bank.json"
    code, _, _ = run(capsys, "bank", "default13", "--out", str(bank_path))
    assert code == 0
    bank = load_bank(bank_path)
    assert bank.k == 5 and bank.fixed_pair.modes == (6, 8)
    out_csv = tmp_path / "shot.csv"
    code, out, _ = run(capsys, "--seed", "3", "simulate", "scattershot",
                       "--unitary", str(upath), "--bank", str(bank_path),
                       "--n", "3", "--events", "200", "--out", str(out_csv))
    assert code == 0
    assert "events=200" in out and "events_per_pulse=" in out
    events = read_event_log(out_csv, m=13)
    assert all(ev.n == 3 for ev in events)


def test_validate_round_trip(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys)
    events_csv = tmp_path / "ev.csv"
    run(capsys, "--seed", "11", "simulate", "fixed", "--unitary", str(upath),
        "--inputs", "2,5,8", "--events", "300", "--out", str(events_csv))
    report = tmp_path / "report.json"
    traj = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "validate", "--test", "aa-uniform",
                       "--events", str(events_csv), "--unitary", str(upath),
                       "--n", "3", "--report", str(report),
                       "--trajectory-out", str(traj))
    assert code == 0
    assert "verdict=boson_sampler" in out
    obj = json.loads(report.read_text())
    assert obj["test"] == "aa-uniform" and obj["n_events"] == 300
    lines = traj.read_text().strip().splitlines()
    assert lines[0] == "event_index,counter"
    assert len(lines) == 301


def test_validate_photon_number_mismatch(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys)
    events_csv = tmp_path / "ev.csv"
    run(capsys, "simulate", "fixed", "--unitary", str(upath),
        "--inputs", "2,5,8", "--events", "10", "--out", str(events_csv))
    code, _, err = run(capsys, "validate", "--test", "aa-uniform",
                       "--events", str(events_csv), "--unitary", str(upath),
                       "--n", "2", "--report", str(tmp_path / "r.json"))
    assert code == 1
    assert "photon-number mismatch" in err


def test_validate_success_curve(tmp_path, capsys):
    upath, _ = gen_unitary(tmp_path, capsys)
    events_csv = tmp_path / "ev.csv"
    run(capsys, "--seed", "13", "simulate", "fixed", "--unitary", str(upath),
        "--inputs", "2,5,8", "--events", "400", "--out", str(events_csv))
    curve_csv = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "--seed", "13", "validate", "--test", "aa-uniform",
                       "--events", str(events_csv), "--unitary", str(upath),
                       "--report", str(tmp_path / "r.json"), "--curve",
                       "--grid", "1,10,100,300", "--trials", "500",
                       "--curve-out", str(curve_csv))
    assert code == 0
    assert "min_Nset_for(0.95)=" in out
    lines = curve_csv.read_text().strip().splitlines()
    assert lines[0] == "N_set,P_success,stderr"
    assert len(lines) == 5


def test_estimate_paper_preset(capsys):
    code, out, _ = run(capsys, "estimate", "--preset", "paper")
    assert code == 0
    assert "boost_factor=3921225" in out
    assert "k=100 n=4" in out
    fixed_line = next(l for l in out.splitlines() if l.startswith("fixed-input:"))
    secs = float(fixed_line.rsplit("=", 1)[1])
    assert 1e7 <= secs <= 1e8
    assert "note:" in out


def test_estimate_custom(capsys):
    code, out, _ = run(capsys, "estimate", "--k", "6", "--n", "3",
                       "--epsilon", "0.1", "--eta-herald", "1.0",
                       "--eta-detect", "1.0", "--events", "100")
    assert code == 0
    assert "boost_factor=20" in out


def test_bench_small(tmp_path, capsys):
    out_csv = tmp_path / "bench.csv"
    code, out, _ = run(capsys, "bench", "--n-list", "2", "--m-min", "5",
                       "--m-max", "7", "--m-step", "2", "--count", "3",
                       "--out", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0] == "n,m,count,seconds"
    assert len(lines) == 3  # m = 5 and 7
    for line in lines[1:]:
        n, m, count, seconds = line.split(",")
        assert int(count) == 3 and float(seconds) > 0


def test_bench_rejects_bad_count(tmp_path, capsys):
    code, _, err = run(capsys, "bench", "--count", "0",
                       "--out", str(tmp_path / "b.csv"))
    assert code == 1


def test_error_exit_code_on_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "validate", "--test", "aa-uniform",
                       "--events", str(tmp_path / "nope.csv"),
                       "--unitary", str(tmp_path / "nope.json"),
                       "--report", str(tmp_path / "r.json"))
    assert code == 1
    assert "error:" in err


def test_reruns_are_byte_identical(tmp_path, capsys):
    """The same seeded command sequence writes identical files."""
    outputs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        upath = d / "u.json"
        run(capsys, "--seed", "21", "unitary", "gen", "--modes", "9",
            "--unitary-out", str(upath), "--layout-out", str(d / "l.json"))
        ev = d / "ev.csv"
        run(capsys, "--seed", "21", "simulate", "fixed", "--unitary", str(upath),
            "--inputs", "1,4,7", "--events", "100", "--out", str(ev))
        rep = d / "r.json"
        run(capsys, "--seed", "21", "validate", "--test", "aa-uniform",
            "--events", str(ev), "--unitary", str(upath), "--report", str(rep))
        outputs.append((upath.read_bytes(), (d / "l.json").read_bytes(),
                        ev.read_bytes(), rep.read_bytes()))
    assert outputs[0] == outputs[1]
