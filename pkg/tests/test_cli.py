import json

import pytest

from svpvqa.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


@pytest.fixture()
def instance_dir(tmp_path):
    out = tmp_path / "inst"
    assert main(["gen", "benchmark", "--dim", "3", "--count", "2", "--seed", "4", "--out", str(out)]) == EXIT_OK
    return out


def test_gen_and_solve(instance_dir, tmp_path, capsys):
    path = sorted(instance_dir.glob("*.json"))[0]
    out = tmp_path / "rec.json"
    code = main(["solve", "--algorithm", "ipsa", "--instance", str(path), "--seed", "1",
                 "--max-evals", "40", "--out", str(out)])
    assert code == EXIT_OK
    rec = json.loads(out.read_text())
    assert rec["algorithm"] == "ipsa" and rec["seeds"] == {"solve": 1}
    assert "lambda1^2" in capsys.readouterr().out


def test_solve_psa_guard_is_runtime_error(tmp_path):
    main(["gen", "benchmark", "--dim", "6", "--count", "1", "--seed", "1", "--out", str(tmp_path / "i")])
    path = next((tmp_path / "i").glob("*.json"))
    code = main(["solve", "--algorithm", "psa", "--k", "4", "--instance", str(path), "--seed", "1",
                 "--out", str(tmp_path / "r.json")])
    assert code == EXIT_USAGE  # EncodingError is a ValueError: bad configuration for this instance


def test_bench_and_report(instance_dir, tmp_path, capsys):
    recs = tmp_path / "recs"
    assert main(["bench", "--instances", str(instance_dir), "--algorithms", "lll", "--seed", "3",
                 "--out", str(recs)]) == EXIT_OK
    capsys.readouterr()
    assert main(["report", "--in", str(recs), "--format", "csv", "--emit-plot-data"]) == EXIT_OK
    csv = capsys.readouterr().out
    assert csv.startswith("set,algorithm,dim,sr,aar")
    assert (recs / "plot_data.json").exists()
    assert main(["report", "--in", str(recs)]) == EXIT_OK


def test_report_detects_inconsistent_totals(instance_dir, tmp_path):
    recs = tmp_path / "recs"
    main(["bench", "--instances", str(instance_dir), "--algorithms", "lll", "--seed", "3", "--out", str(recs)])
    path = sorted(recs.glob("*.json"))[0]
    d = json.loads(path.read_text())
    d["depth_total"] += 1
    path.write_text(json.dumps(d))
    assert main(["report", "--in", str(recs)]) == EXIT_VERIFY


def test_tampered_instance_is_verification_failure(instance_dir, tmp_path):
    path = sorted(instance_dir.glob("*.json"))[0]
    d = json.loads(path.read_text())
    d["lambda1_sq"] += 1
    path.write_text(json.dumps(d))
    code = main(["solve", "--algorithm", "lll", "--instance", str(path), "--seed", "0",
                 "--out", str(tmp_path / "r.json")])
    assert code == EXIT_VERIFY


def test_usage_errors(tmp_path):
    assert main(["solve", "--algorithm", "grover", "--instance", "x", "--seed", "1", "--out", "y"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["gen", "benchmark", "--dim", "x"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK
    assert main(["bench", "--instances", str(tmp_path), "--algorithms", "ipsa", "--seed", "1",
                 "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_qubits(capsys):
    assert main(["qubits", "--max-dim", "8"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "5-psa" in out and " 8    21" in out
