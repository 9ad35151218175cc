import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from singleprobe.claims import OCTAGON_ANGLES
from singleprobe.cli import main
from singleprobe.control_ir import SpectrumSpec
from singleprobe.synthesis import f32, synth_f32_d8


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


@pytest.fixture
def specs(tmp_path):
    return {
        "parity": write(tmp_path / "parity.json", {"builtin": "parity", "n_qubits": 3}),
        "f32": write(tmp_path / "f32.json", {"builtin": "indicator", "i": 3, "k": 2}),
        "zeros": write(tmp_path / "zeros.json", {"n_qubits": 2, "table": {str(j): 0 for j in range(4)}}),
        "generic": write(tmp_path / "generic.json",
                         {"n_qubits": 3, "couplings": [1, 2, 4],
                          "table": {str(j): int(j in (1, 4, 6)) for j in range(8)}}),
    }


def test_compile_parity_one_step(specs, tmp_path, capsys):
    out, rep = tmp_path / "p.json", tmp_path / "r.json"
    code, _ = run(["compile", specs["parity"], "--out", str(out), "--report", str(rep)], capsys)
    assert code == 0
    report = json.loads(rep.read_text())["report"]
    assert report["conditional_steps"] == 1
    prog = json.loads(out.read_text())
    assert len(prog["words"]) == 1 and prog["words"][0]["kind"] == "conditional"


def test_compile_search_f32_three_steps(specs, tmp_path, capsys):
    rep = tmp_path / "r.json"
    code, _ = run(["compile", specs["f32"], "--method", "search", "--group", "D8",
                   "--out", str(tmp_path / "p.json"), "--report", str(rep)], capsys)
    assert code == 0
    assert json.loads(rep.read_text())["report"]["conditional_steps"] == 3


def test_compile_constant_zero_is_empty(specs, tmp_path, capsys):
    out = tmp_path / "p.json"
    code, _ = run(["compile", specs["zeros"], "--out", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["words"] == []


def test_compile_strict_search_not_found(specs, capsys):
    code, err = run(["compile", specs["f32"], "--method", "search", "--mode", "strict", "--max-len", "2"], capsys)
    assert code == 3
    assert "no strict word" in err.err


def test_compile_bad_spec(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", {"n_qubits": 2, "table": {"0": 1}})
    assert run(["compile", bad], capsys)[0] == 2
    assert run(["compile", str(tmp_path / "missing.json")], capsys)[0] == 2
    odd = write(tmp_path / "odd.json", {"builtin": "indicator", "i": 5, "k": 2})
    assert run(["compile", odd], capsys)[0] == 2


def test_compile_then_simulate_round_trip(specs, tmp_path, capsys):
    prog = tmp_path / "g.json"
    assert run(["compile", specs["generic"], "--out", str(prog)], capsys)[0] == 0
    out_dir = tmp_path / "sim"
    code, _ = run(["simulate", str(prog), "--shots", "0", "--out-dir", str(out_dir)], capsys)
    assert code == 0
    res = json.loads((out_dir / "outcomes.json").read_text())
    assert res["verified"] is True
    assert "counts" not in res
    # uniform register, f = 1 on three of eight eigenvalues
    assert res["probabilities"]["-"] == pytest.approx(3 / 8)


def test_simulate_parity_shots(specs, tmp_path, capsys):
    prog = tmp_path / "p.json"
    run(["compile", specs["parity"], "--out", str(prog)], capsys)
    out_dir = tmp_path / "sim"
    code, _ = run(["simulate", str(prog), "--shots", "10000", "--seed", "42", "--out-dir", str(out_dir)], capsys)
    assert code == 0
    res = json.loads((out_dir / "outcomes.json").read_text())
    p = res["probabilities"]["+"]
    sigma = math.sqrt(p * (1 - p) / 10000)
    assert abs(res["frequencies"]["+"] - p) <= 3 * sigma
    assert res["counts"]["+"] + res["counts"]["-"] == 10000
    plus = json.loads((out_dir / "collapsed_plus.json").read_text())
    amps = np.array([complex(*a) for a in plus["amplitudes"]])
    np.testing.assert_allclose(np.abs(amps[1::2]), 0, atol=1e-12)  # odd eigenvalues removed


def test_simulate_register_options(specs, tmp_path, capsys):
    prog = tmp_path / "p.json"
    run(["compile", specs["parity"], "--out", str(prog)], capsys)
    code, _ = run(["simulate", str(prog), "--register", "basis:3", "--out-dir", str(tmp_path / "a")], capsys)
    assert code == 0
    res = json.loads((tmp_path / "a" / "outcomes.json").read_text())
    assert res["probabilities"]["-"] == pytest.approx(1.0)
    assert not (tmp_path / "a" / "collapsed_plus.json").exists()
    state = write(tmp_path / "state.json", {"n_qubits": 3, "amplitudes": [[1, 0]] + [[0, 0]] * 7})
    code, _ = run(["simulate", str(prog), "--register", state, "--out-dir", str(tmp_path / "b")], capsys)
    assert code == 0
    assert run(["simulate", str(prog), "--register", "basis:99", "--out-dir", str(tmp_path / "c")], capsys)[0] == 2


def test_trajectory_csv_reproduces_octagon(tmp_path, capsys):
    spec = SpectrumSpec.dyadic(3)
    obj = synth_f32_d8(spec).to_json()
    obj["target"] = f32(spec).to_json()
    obj["probe_init"] = [1, 0, 0]
    prog = write(tmp_path / "d8.json", obj)
    code, _ = run(["simulate", prog, "--out-dir", str(tmp_path / "sim")], capsys)
    assert code == 0
    with open(tmp_path / "sim" / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["eigenvalue", "step", "bloch_x", "bloch_y", "bloch_z"]
    for row in rows:
        step, j = int(row["step"]), int(row["eigenvalue"])
        if step == 0:
            continue
        ang = math.radians(OCTAGON_ANGLES[step][j])
        assert float(row["bloch_x"]) == pytest.approx(math.cos(ang), abs=1e-9)
        assert float(row["bloch_y"]) == pytest.approx(math.sin(ang), abs=1e-9)


def test_search_period4(capsys):
    code, out = run(["search", "--group", "D8", "--target", "period4:all", "--max-len", "4"], capsys)
    assert code == 0
    res = json.loads(out.out)["results"]
    assert len(res) == 16 and all(r["found"] for r in res)
    assert any(r["length"] == 2 for r in res)


def test_search_max_len_zero(capsys):
    code, out = run(["search", "--target", "parity", "--max-len", "0"], capsys)
    assert code == 3
    code, out = run(["search", "--target", "table:0,0,0,0,0,0,0,0", "--max-len", "0"], capsys)
    assert code == 0 and json.loads(out.out)["length"] == 0


def test_search_verify_generation_small(capsys):
    code, out = run(["search", "--group", "A5", "--verify-generation", "0..3"], capsys)
    assert code == 0
    assert json.loads(out.out)["result"] == "PASS"
    code, out = run(["search", "--group", "A5", "--verify-generation", "0,0"], capsys)
    assert code == 4
    assert run(["search", "--group", "D8", "--verify-generation", "0..3"], capsys)[0] == 2


def test_schedule_two_qubit(capsys):
    code, out = run(["schedule", "--target-coupling", "0,1,0,2"], capsys)
    assert code == 0
    res = json.loads(out.out)
    assert len(res["segments"]) == 2
    assert res["exactness"]["operator_norm_error"] <= 1e-12


def test_schedule_hamming_note(capsys):
    code, out = run(["schedule", "--target-coupling", "1,1,1"], capsys)
    assert code == 0 and "Hamming" in json.loads(out.out)["note"]


def test_schedule_singular_basis(tmp_path, capsys):
    basis = write(tmp_path / "basis.json", {"vectors": [[1, 2], [2, 4]]})
    code, out = run(["schedule", "--target-coupling", "1,2", "--basis", basis], capsys)
    assert code == 2 and "condition number" in out.err


def test_report_costs(capsys):
    code, out = run(["report", "--suite", "costs"], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.out.splitlines()))
    assert [int(r["n"]) for r in rows] == [3, 4, 5]
    assert len({r["movable_conditional_steps"] for r in rows}) == 1
    fixed = [int(r["fixed_conditional_steps"]) for r in rows]
    assert fixed == sorted(fixed) and fixed[0] < fixed[-1]


def test_report_requires_suite():
    with pytest.raises(SystemExit) as exc:
        main(["report", "--suite", ""])
    assert exc.value.code == 2


def test_outputs_are_deterministic(specs, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    outs = []
    for k in range(2):
        prog = tmp_path / f"p{k}.json"
        run(["compile", specs["generic"], "--out", str(prog)], capsys)
        d = tmp_path / f"sim{k}"
        run(["simulate", str(prog), "--shots", "500", "--seed", "9", "--out-dir", str(d)], capsys)
        outs.append([(d / name).read_bytes() for name in
                     ("outcomes.json", "trajectory.csv", "collapsed_plus.json")])
    # program paths differ between runs; everything else must match
    a = json.loads(outs[0][0])
    b = json.loads(outs[1][0])
    a["manifest"].pop("inputs"), b["manifest"].pop("inputs")
    assert a == b
    assert outs[0][1:] == outs[1][1:]
    assert a["manifest"]["timestamp"] == "2023-11-14T22:13:20Z"
    assert a["manifest"]["seed"] == 9


def test_manifest_fields(specs, capsys):
    code, out = run(["compile", specs["parity"]], capsys)
    man = json.loads(out.out)["manifest"]
    assert {"command", "inputs", "seed", "tolerances", "tool_version", "timestamp"} <= set(man)


def test_numbers_use_twelve_significant_digits(specs, tmp_path, capsys):
    prog = tmp_path / "p.json"
    run(["compile", specs["f32"], "--out", str(prog)], capsys)
    for w in json.loads(prog.read_text())["words"]:
        for x in w["axis"] + [w["angle"]]:
            assert len(repr(abs(x)).replace(".", "").lstrip("0").split("e")[0]) <= 12


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "singleprobe", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "compile" in proc.stdout
