import csv
import json

import pytest

from qlab.cli import RunRecord, SpecError, build_ensemble, fmt, main, parse_spec


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def results(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)["results"]


def test_parse_spec():
    assert parse_spec("trine:alpha=0.025") == ("trine", {"alpha": "0.025"}, [])
    assert parse_spec("platonic:cube") == ("platonic", {}, ["cube"])
    with pytest.raises(SpecError):
        build_ensemble("twostate:theta=1,bogus=2")
    with pytest.raises(SpecError):
        build_ensemble("twostate:theta=abc")


@pytest.mark.parametrize("ens,povm,expected,tol", [
    ("platonic:cube", "vn:z", 2 / 3, 1e-12),
    ("trine:alpha=0.025", "shor", 0.79999, 2e-4),
    ("twostate:theta=1.5707963,P=0", "helstrom", 1.0, 1e-12),
])
def test_eval_examples(capsys, ens, povm, expected, tol):
    r = results(capsys, "eval", "--ensemble", ens, "--povm", povm)
    assert r["achievable_fidelity"] == pytest.approx(expected, abs=tol)
    assert r["success_probability"] <= r["achievable_fidelity"]
    assert len(r["posterior_table"]) == r["outcomes"]


def test_eval_errors(capsys):
    code, _, err = run(capsys, "eval", "--ensemble", "nothing", "--povm", "srm")
    assert code != 0 and "error" in json.loads(err)
    code, _, err = run(capsys, "eval", "--ensemble", "sic:d=3", "--povm", "sic:d=2")
    assert code != 0 and json.loads(err)["diagnostics"] == {"ensemble_dim": 3, "povm_dim": 2}


def test_eval_invalid_povm_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "elements": [{"re": [[1, 0], [0, 0.5]], "im": [[0, 0], [0, 0]]}]}))
    code, _, err = run(capsys, "eval", "--ensemble", "platonic:cube", "--povm", str(bad))
    assert code == 2
    assert json.loads(err)["diagnostics"]["completeness_residual"] == pytest.approx(0.5)


def test_optimize_examples(capsys):
    r = results(capsys, "optimize", "--ensemble", "twostate:theta=0.7853981633974483,P=0", "--restarts", "8")
    assert r["accessible_fidelity"] == pytest.approx(0.93301, abs=1e-5)
    r = results(capsys, "optimize", "--ensemble", "realsym:M=3", "--restarts", "8")
    assert r["accessible_fidelity"] == pytest.approx(0.75, abs=1e-6)
    r = results(capsys, "optimize", "--ensemble", "sic:d=2", "--restarts", "8")
    assert r["accessible_fidelity"] >= 2 / 3 - 1e-6


def test_optimized_povm_replays(capsys, tmp_path):
    out = tmp_path / "opt.json"
    assert main(["optimize", "--ensemble", "trine:alpha=0.3", "--restarts", "4", "--out", str(out)]) == 0
    best = json.loads(out.read_text())["results"]["accessible_fidelity"]
    r = results(capsys, "eval", "--ensemble", "trine:alpha=0.3", "--povm", str(out))
    assert r["achievable_fidelity"] == pytest.approx(best, abs=1e-10)


def test_quantumness_orthogonal(capsys):
    r = results(capsys, "quantumness", "--states", "twostate:theta=1.5707963267948966",
                "--restarts", "4", "--grid", "5")
    assert r["quantumness"] == pytest.approx(1.0, abs=1e-9)


def test_scan_csv_matches_json(capsys, tmp_path):
    path = tmp_path / "t.csv"
    r = results(capsys, "scan", "t_two_state", "--points", "51", "--csv", str(path))
    assert r["argmax"] == pytest.approx(0.54807, abs=5e-4)
    assert r["max"] == pytest.approx(0.02514, abs=1e-4)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x", "value"]
    for (xs, vs), (x, v) in zip(rows[1:], r["rows"]):
        assert xs == fmt(x) and vs == fmt(v)


def test_scan_trine_is_labelled(capsys):
    r = results(capsys, "scan", "t_trine")
    assert "assumes" in r["note"]
    assert r["argmax"] == pytest.approx(0.68535, abs=5e-4)
    r = results(capsys, "scan", "srm_trine")
    assert r["argmin"] == pytest.approx(0.78868, abs=5e-4)
    assert r["min"] == pytest.approx(0.89682, abs=1e-4)


def test_table(capsys):
    r = results(capsys, "table")
    assert r["all_ok"]
    by_name = {row["quantity"]: row["value"] for row in r["rows"]}
    assert by_name["uniform ensemble d=2 complex"] == pytest.approx(2 / 3)
    assert by_name["uniform ensemble d=2 real"] == pytest.approx(3 / 4)
    assert by_name["uniform ensemble d=2 quaternionic"] == pytest.approx(3 / 5)


def test_haar_mc_deterministic(capsys):
    a = results(capsys, "haar-mc", "--d", "2", "--n", "5000", "--seed", "3")
    b = results(capsys, "haar-mc", "--d", "2", "--n", "5000", "--seed", "3")
    assert a == b
    assert abs(a["fidelity"] - 2 / 3) <= 3 * a["standard_error"]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("QLAB_SEED", "17")
    code, out, _ = run(capsys, "scan", "q_two_state", "--points", "5")
    assert code == 0 and json.loads(out)["seed"] == 17


def test_run_record_roundtrip(capsys):
    code, out, _ = run(capsys, "eval", "--ensemble", "platonic:tetrahedron", "--povm", "covariant")
    record = RunRecord.from_json(out)
    assert RunRecord.from_json(record.to_json()) == record
    assert record.tool_version and record.wall_time_ms >= 0
