import csv
import io

import numpy as np
import pytest

from tmk.cli import main
from tmk.transform import TrigPolynomial, write_trig_csv


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(["besov", "norm", "--bogus"], capsys)
    assert code == 2 and "unrecognized" in err


def test_missing_subcommand(capsys):
    assert run([], capsys)[0] == 2


def test_mult_cert_emits_measured_constant(capsys):
    code, out, _ = run(["besov", "mult-cert", "--symbol", "riesz", "--n", "1", "--p", "2", "--count", "10"], capsys)
    assert code == 0
    (row,) = rows(out)
    assert float(row["bv_sup"]) == 1.0 and 0 < float(row["op_ratio"]) <= 1.0


def test_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["besov", "equiv", "--count", "12", "--K", "8", "--s", "1", "--q", "inf", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# riesz run\ncount = 7\np = 3\nK = 4\n")
    _, out, _ = run(["--config", str(cfg), "besov", "riesz"], capsys)
    (row,) = rows(out)
    assert row["count"] == "7" and row["p"] == "3.0"
    _, out, _ = run(["--config", str(cfg), "besov", "riesz", "--count", "3"], capsys)
    assert rows(out)[0]["count"] == "3"
    cfg.write_text("nonsense = 1\n")
    assert run(["--config", str(cfg), "besov", "riesz"], capsys)[0] == 2


def test_symbol_cert_bound_failure(capsys):
    code, out, err = run(["symbol", "cert", "--symbol", "segment:3", "--dmax", "6", "--bound", "1"], capsys)
    assert code == 1 and "exceeds" in err
    assert rows(out)[-2] == {"d": "sup", "variation": "2.0"}


def test_symbol_var_on_box(capsys):
    code, out, _ = run(["symbol", "var", "--symbol", "riesz", "--n", "2", "--lo", "-2", "-2", "--hi", "2", "2"],
                       capsys)
    assert code == 0 and float(rows(out)[0]["variation"]) == pytest.approx(1.0)
    assert run(["symbol", "var", "--symbol", "riesz"], capsys)[0] == 2


def test_elliptic_commands(tmp_path, capsys):
    spec = tmp_path / "A.txt"
    spec.write_text("order = 2\nn = 1\ncoeff 2 = [[1, 0], [0, 2]]\n")
    assert run(["elliptic", "check", "--spec", str(spec), "--theta", "0"], capsys)[0] == 0
    code, out, _ = run(["elliptic", "check", "--spec", str(spec)], capsys)
    assert code == 1 and rows(out)[0]["passed"] == "0"
    code, out, _ = run(["elliptic", "omega0", "--spec", str(spec)], capsys)
    assert code == 0 and float(rows(out)[0]["omega0"]) > 0
    code, out, err = run(["elliptic", "bv-sweep", "--spec", str(spec), "--magnitudes", "2", "--dmax", "4"], capsys)
    assert code == 0 and "soft_bound=16" in err and len(rows(out)) > 10


def test_solve_commands(tmp_path, capsys):
    u0 = tmp_path / "u0.csv"
    write_trig_csv(u0, TrigPolynomial.monomial((1, 1), np.array([1.0])))
    summary = tmp_path / "s.csv"
    code, out, _ = run(["solve", "ivp", "--u0", str(u0), "--T", "1", "--steps", "2",
                        "--summary", str(summary)], capsys)
    assert code == 0
    last = rows(out)[-1]
    assert float(last["x0_re"]) == pytest.approx(np.exp(-2), rel=1e-12)
    assert rows(summary.read_text())[0]["method"] == "exact"
    f = tmp_path / "f.csv"
    write_trig_csv(f, TrigPolynomial.monomial((1, 2), np.array([1.0])))
    code, out, _ = run(["solve", "periodic", "--n", "1", "--forcing", str(f), "--omega", "1"], capsys)
    assert code == 0
    row = rows(out)[0]
    assert complex(float(row["x0_re"]), float(row["x0_im"])) == pytest.approx(1 / (1j + 5))


def test_missing_input_file(capsys):
    code, _, err = run(["solve", "ivp", "--u0", "/nonexistent.csv"], capsys)
    assert code == 2 and "error" in err


def test_suite_subset(capsys):
    code, out, err = run(["suite", "--only", "3,4"], capsys)
    assert code == 0 and "criterion  3 PASS" in err and len(rows(out)) == 2
    code, _, err = run(["suite", "--only", "5"], capsys)
    assert code == 1 and "FAIL" in err
