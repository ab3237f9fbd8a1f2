import csv
import io
import json
import math

import pytest
from hypothesis import given, strategies as st

from periodfn import cli


def invoke(*argv):
    code, text, _ = cli.run(list(argv))
    return code, text


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_linear_period_rows():
    code, text = invoke("period", "--system", "linear", "--emin", "0.1", "--emax", "1", "--n", "3")
    assert code == cli.EXIT_OK
    out = rows(text)
    assert list(out[0]) == list(cli.CSV_COLUMNS)
    assert [float(r["E"]) for r in out] == [0.1, 0.55, 1.0]
    for r in out:
        assert float(r["T"]) == pytest.approx(2 * math.pi, rel=1e-12)


def test_family_minimum_of_period():
    code, text = invoke("derivative", "--system", "1,0,2", "--emin", "0.01",
                        "--emax", "0.08", "--n", "15")
    assert code == cli.EXIT_OK
    out = rows(text)
    d = [float(r["dTdE"]) for r in out]
    E = [float(r["E"]) for r in out]
    flips = [i for i in range(len(d) - 1) if d[i] < 0 < d[i + 1]]
    assert len(flips) == 1
    assert E[flips[0]] <= 0.0427 <= E[flips[0] + 1] + 0.002


def test_sinh_period_decreasing():
    code, text = invoke("period", "--system", "sinh", "--emin", "0.5", "--emax", "10", "--n", "8")
    T = [float(r["T"]) for r in rows(text)]
    assert code == 0 and all(b < a for a, b in zip(T, T[1:]))


def test_criterion_exit_codes():
    assert invoke("criterion", "--system", "0,0,1", "--e0", "10")[0] == cli.EXIT_OK
    assert invoke("criterion", "--system", "1,1.1111111111111112,0")[0] == cli.EXIT_INDETERMINATE
    assert invoke("criterion", "--system", "1,0,1", "--e0", "0.16666")[0] == cli.EXIT_NEGATIVE


def test_criterion_beyond_separatrix_is_invalid():
    assert cli.main(["criterion", "--system", "1,0,1", "--e0", "0.2"]) == cli.EXIT_INVALID


def test_derivative_gap_gives_partial_exit():
    # the top of the grid sits on the separatrix
    code, text = invoke("derivative", "--system", "1,0,1", "--emin", "0.05",
                        "--emax", str(1 / 6), "--n", "3")
    assert code == cli.EXIT_PARTIAL
    last = rows(text)[-1]
    assert float(last["E"]) == 1 / 6 and last["method"] == "gap" and last["dTdE"] == ""


@pytest.mark.parametrize("argv", [
    ["period", "--system", "nope", "--emin", "0.1", "--emax", "1"],
    ["period", "--system", "1,2", "--emin", "0.1", "--emax", "1"],
    ["period", "--system", "linear", "--emin", "1", "--emax", "0.1"],
    ["period", "--system", "linear"],
    ["period", "--emin", "0.1", "--emax", "1"],
    ["bogus"],
    ["period", "--system", "-1,0,0,1,0", "--emin", "0.1", "--emax", "1"],
])
def test_invalid_invocations(argv):
    assert cli.main(argv) == cli.EXIT_INVALID


def test_classify_cases():
    for system, case, verdict in [("0,0,0", "A", "constant"), ("2,2,3", "G.ii", "decreasing"),
                                  ("1,0,-1", "unclassified", "outside-theorem")]:
        code, text = invoke("classify", "--system", system)
        r = rows(text)[0]
        assert code == 0 and r["case"] == case and r["verdict"] == verdict


def test_classify_batch(tmp_path):
    batch = tmp_path / "b.yaml"
    batch.write_text("- [0, 0, 0]\n- [2, 2, 3]\n- [1, 1.1111111111111112, 0]\n- [1, 0, 0.5]\n")
    code, text = invoke("classify", "--batch", str(batch), "--jobs", "3")
    out = rows(text)
    assert [r["case"] for r in out][:2] == ["A", "G.ii"]
    assert len(out) == 4
    assert code == cli.EXIT_INDETERMINATE


def test_csv_independent_of_jobs():
    args = ["period", "--system", "1,0,0.5", "--emin", "0.01", "--emax", "0.5", "--n", "9"]
    assert invoke(*args, "--jobs", "1")[1] == invoke(*args, "--jobs", "4")[1]


def test_json_and_csv_agree():
    args = ["derivative", "--system", "pendulum", "--emin", "0.2", "--emax", "1.5", "--n", "5"]
    c = rows(invoke(*args)[1])
    j = json.loads(invoke(*args, "--format", "json")[1])["rows"]
    assert len(c) == len(j)
    for a, b in zip(c, j):
        for key in ("E", "T", "dTdE"):
            assert f"{float(a[key]):.15g}" == f"{float(b[key]):.15g}"


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("system: linear\nemin: 0.1\nemax: 1.0\nn: 4\n")
    code, text = invoke("period", "--config", str(cfg), "--n", "2")
    assert code == 0 and len(rows(text)) == 2
    cfg.write_text("system: linear\nmystery: 1\n")
    assert cli.main(["period", "--config", str(cfg)]) == cli.EXIT_INVALID


def test_out_file(tmp_path):
    target = tmp_path / "t.csv"
    assert cli.main(["period", "--system", "linear", "--emin", "1", "--emax", "2",
                     "--n", "2", "--out", str(target)]) == 0
    assert len(rows(target.read_text())) == 2


def test_dict_system_in_config(tmp_path):
    cfg = tmp_path / "run.json"
    quad = {"family": "polynomial", "params": {"coeffs": [0, 0, 0.5]}}
    cfg.write_text(json.dumps({"system": {"F": quad, "G": quad},
                               "emin": 0.5, "emax": 0.5, "n": 1}))
    code, text = invoke("period", "--config", str(cfg))
    assert float(rows(text)[0]["T"]) == pytest.approx(2 * math.pi, rel=1e-10)


@pytest.mark.parametrize("argv", [
    ["verify", "--system", "relativistic"],
    ["verify", "--system", "1,0,0.2222222222222222"],
    ["verify", "--system", "1,0,1", "--emax", "0.000321"],
    ["examples", "run", "pendulum"],
])
def test_verify_passes(argv):
    code, text = invoke(*argv)
    assert code == cli.EXIT_OK, text


def test_examples_list():
    code, text = invoke("examples", "list")
    names = [r["name"] for r in rows(text)]
    assert code == 0 and "sinh" in names and "relativistic" in names


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_classify_exit_code_is_total(a, b, c):
    # leading minus signs need the --opt=value form
    code, text = invoke("classify", f"--system={a!r},{b!r},{c!r}")
    r = rows(text)[0]
    assert code in (cli.EXIT_OK, cli.EXIT_INDETERMINATE)
    assert (code == cli.EXIT_INDETERMINATE) == (r["verdict"] == "indeterminate-near-origin")
