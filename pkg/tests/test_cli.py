import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from arlb import cli, linmod
from arlb.cli import main
from arlb.linmod import hald_csv_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(autouse=True)
def no_output_dir(monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)


# -- tables -----------------------------------------------------------------------


def test_table1(capsys):
    code, out, _ = run(capsys, "table1", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    assert [r["n"] for r in rows] == ["10", "50", "100", "500", "1000", "10000"]
    got = [round(float(r["alpha_n"]), 4) for r in rows]
    assert got == [0.0500, 0.0199, 0.0135, 0.0055, 0.0038, 0.0011]


def test_table1_custom_list(capsys):
    code, out, _ = run(capsys, "table1", "--n-list", "10,20,2e6", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    assert [r["n"] for r in rows] == ["10", "20", "2000000"]
    assert float(rows[0]["alpha_n"]) == 0.05


def test_table2(capsys):
    code, out, _ = run(capsys, "table2", "--format", "csv", "--precision", "3")
    assert code == 0
    rows = parse_csv(out)
    assert [r["posterior_bound"] for r in rows] == ["0.289", "0.111", "0.067", "0.018", "0.010", "0.002"]
    assert rows[4]["p"] == "0.0005"


# -- calibrate ----------------------------------------------------------------------


def test_calibrate_hald_row(capsys):
    code, out, _ = run(capsys, "calibrate", "--p", "0.07082", "--n", "13", "--q", "1", "--format", "csv")
    assert code == 0
    row = parse_csv(out)[0]
    # the p-value is itself rounded to 5 decimals, which moves O_L by about 1e-5
    assert float(row["o_l"]) == pytest.approx(0.70192, abs=1.5e-5)
    assert row["rlb_valid"] == "true"


def test_calibrate_large_p_warns(capsys):
    code, out, err = run(capsys, "calibrate", "--p", "0.5", "--n", "10", "--q", "1", "--format", "csv")
    assert code == 0
    assert "warning" in err and "rlb_valid=false" in err
    assert parse_csv(out)[0]["rlb_valid"] == "false"


def test_calibrate_reference(capsys):
    code, out, _ = run(capsys, "calibrate", "--p", "0.01", "--n", "500", "--n0", "10", "--format", "csv")
    assert code == 0
    assert round(float(parse_csv(out)[0]["alpha_reference"]), 4) == 0.0055


def test_calibrate_matches_curve(capsys):
    _, out, _ = run(capsys, "calibrate", "--p", "0.05", "--n", "50", "--format", "csv", "--precision", "10")
    p_l = float(parse_csv(out)[0]["p_l"])
    _, out, _ = run(capsys, "curves", "--scenario", "normal-known", "--n", "50", "--p-min", "0.05",
                    "--p-max", "0.05", "--points", "1", "--format", "csv", "--precision", "10")
    assert float(parse_csv(out)[0]["arlb"]) == pytest.approx(p_l, abs=1e-10)


@pytest.mark.parametrize("argv, flag", [
    (["calibrate", "--p", "1.5", "--n", "10"], "--p"),
    (["calibrate", "--p", "abc", "--n", "10"], "--p"),
    (["calibrate", "--p", "0.1", "--n", "0.5"], "--n"),
    (["calibrate", "--p", "0.1", "--n", "10", "--q", "0"], "--q"),
    (["calibrate", "--p", "0.1", "--n", "10", "--alpha0", "0.05"], "--alpha0"),
    (["table1", "--precision", "0"], "--precision"),
    (["table1", "--precision", "16"], "--precision"),
    (["curves", "--scenario", "gamma"], "--scenario"),
    (["curves", "--scenario", "normal-known", "--p-min", "0.1", "--p-max", "0.01"], "--p-min"),
    (["curves", "--scenario", "linear", "--k", "4", "--k1", "4"], "--k1"),
    (["verify", "--theorem", "4"], "--theorem"),
    (["verify", "--theorem", "2", "--q", "2"], "--q"),
])
def test_usage_errors(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert flag in err


def test_missing_command(capsys):
    code, _, _ = run(capsys)
    assert code == 2


# -- output handling ------------------------------------------------------------------


def test_precision_respected(capsys):
    for prec in (1, 3, 12):
        _, out, _ = run(capsys, "table2", "--format", "csv", "--precision", str(prec))
        for row in parse_csv(out):
            assert len(row["b_l"].split(".")[1]) == prec


def test_jsonl(capsys):
    code, out, _ = run(capsys, "table1", "--format", "jsonl")
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert len(recs) == 6 and recs[0] == {"n": 10, "alpha_n": 0.05}


def test_table_format_has_header(capsys):
    _, out, _ = run(capsys, "table2")
    lines = out.splitlines()
    assert lines[0].split() == ["p", "b_l", "posterior_bound"]
    assert set(lines[1].replace(" ", "")) == {"-"}


def test_byte_identical(capsys):
    outs = [run(capsys, "curves", "--scenario", "exponential", "--format", "csv")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_csv_round_trip(tmp_path, capsys):
    path = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "curves", "--scenario", "normal-unknown", "--format", "csv",
                       "--output", str(path), "--precision", "15")
    assert code == 0 and out == ""
    text = path.read_text()
    rows = list(csv.reader(io.StringIO(text)))
    rerendered = cli.render(rows[0], [[float(v) for v in r] for r in rows[1:]], "csv", 15)
    # p is echoed with significant digits, every other column with fixed decimals
    reparsed = list(csv.reader(io.StringIO(rerendered)))
    for a, b in zip(rows[1:], reparsed[1:]):
        assert [float(x) for x in a] == pytest.approx([float(x) for x in b], rel=1e-14, abs=1e-15)


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(capsys, "table1", "--format", "csv")
    assert code == 0 and out == ""
    assert (tmp_path / "table1.csv").read_text().startswith("n,alpha_n\n")
    run(capsys, "table2", "--output", "sub/t2.txt")
    assert (tmp_path / "sub" / "t2.txt").exists()
    code, out, _ = run(capsys, "table2", "--output", "-")
    assert out.startswith("  ") or out.startswith("p")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# manifest\nn-list = 10, 500\nformat = csv\nprecision=4\n")
    code, out, _ = run(capsys, "table1", "--config", str(cfg))
    assert code == 0
    assert out == "n,alpha_n\n10,0.0500\n500,0.0055\n"
    # flags win over the file
    code, out, _ = run(capsys, "table1", "--config", str(cfg), "--precision", "2")
    assert out == "n,alpha_n\n10,0.05\n500,0.01\n"


def test_config_supplies_required_group(tmp_path, capsys):
    cfg = tmp_path / "v.cfg"
    cfg.write_text("lemma = 1\nsamples = 500\nformat = csv\n")
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 0
    assert parse_csv(out)[0]["samples"] == "502"


@pytest.mark.parametrize("content, flag", [("bogus = 1\n", "--config"), ("precision = 99\n", "--precision"),
                                           ("no equals sign\n", "--config")])
def test_config_errors(tmp_path, capsys, content, flag):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(content)
    code, _, err = run(capsys, "table1", "--config", str(cfg))
    assert code == 2 and flag in err


def test_config_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "table1", "--config", str(tmp_path / "nope.cfg"))
    assert code == 2 and "--config" in err


# -- curves properties ------------------------------------------------------------------


def curve(capsys, *extra):
    code, out, _ = run(capsys, "curves", "--format", "csv", "--precision", "15", *extra)
    assert code == 0
    return [{k: float(v) for k, v in r.items()} for r in parse_csv(out)]


@pytest.mark.parametrize("n", [50, 500])
def test_normal_known_band(capsys, n):
    rows = curve(capsys, "--scenario", "normal-known", "--n", str(n), "--p-min", "1e-4", "--p-max", "0.05")
    for r in rows:
        assert r["rlb"] <= r["arlb"] <= r["prior_k2"]
        assert r["arlb"] <= r["prior_k1"] <= r["prior_k2"]
    for col in ("prior_k1", "prior_k2", "rlb", "arlb"):
        vals = [r[col] for r in rows]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_normal_known_grows_with_n(capsys):
    small = curve(capsys, "--scenario", "normal-known", "--n", "50")
    large = curve(capsys, "--scenario", "normal-known", "--n", "500")
    for a, b in zip(small, large):
        for col in ("prior_k1", "prior_k2", "arlb"):
            assert b[col] > a[col]


@pytest.mark.parametrize("n", [50, 100])
def test_exponential_arlb_tracks_intrinsic(capsys, n):
    rows = curve(capsys, "--scenario", "exponential", "--n", str(n), "--p-min", "1e-4", "--p-max", "0.05")
    for r in rows:
        assert abs(r["arlb"] - r["intrinsic"]) < abs(r["rlb"] - r["intrinsic"])
        assert r["rlb"] <= r["arlb"] <= r["intrinsic"]


def test_exponential_branches(capsys):
    lo = curve(capsys, "--scenario", "exponential", "--branch", "lower")
    hi = curve(capsys, "--scenario", "exponential", "--branch", "upper")
    assert all(a["xbar"] < 1.0 < b["xbar"] for a, b in zip(lo, hi))


def test_normal_unknown_columns(capsys):
    rows = curve(capsys, "--scenario", "normal-unknown", "--n", "50")
    assert list(rows[0]) == ["p", "t", "intrinsic", "robust", "rlb", "arlb"]
    assert all(0 < r["robust"] < 1 and 0 < r["intrinsic"] < 1 for r in rows)


def test_linear_curve(capsys):
    rows = curve(capsys, "--scenario", "linear", "--n", "13", "--k", "4", "--q", "1")
    assert list(rows[0]) == ["p", "f_stat", "ibf_reference", "ibf_jeffreys", "ibf_mod_jeffreys",
                             "bic", "rlb", "arlb"]
    for col in ("ibf_reference", "ibf_jeffreys", "ibf_mod_jeffreys", "bic", "arlb"):
        vals = [r[col] for r in rows]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_linear_curve_reproduces_hald_row(capsys):
    rows = curve(capsys, "--scenario", "linear", "--n", "13", "--k", "4", "--k1", "3",
                 "--p-min", "0.07082168742972136", "--p-max", "0.07082168742972136", "--points", "1")
    b = rows[0]["ibf_reference"]
    assert b / (1 - b) == pytest.approx(0.60776, abs=5e-5)


# -- hald -------------------------------------------------------------------------------------


def test_hald_table(capsys):
    code, out, _ = run(capsys, "hald", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    assert [r["model"] for r in rows] == list(linmod.HALD_MODELS)
    assert rows[0]["o_l"] == "0.70192"
    assert list(rows[0]) == cli.HALD_COLUMNS


def test_hald_check_passes(capsys):
    code, out, err = run(capsys, "hald", "--check", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 49
    assert {r["status"] for r in rows} == {"checked", "informational"}
    assert "0 checked cell(s) off" in err


def test_hald_check_fails_on_bad_cell(capsys, monkeypatch):
    table = dict(linmod.PUBLISHED_HALD_TABLE)
    table["234c"] = table["234c"][:4] + (0.8,) + table["234c"][5:]
    monkeypatch.setattr(linmod, "PUBLISHED_HALD_TABLE", table)
    code, _, _ = run(capsys, "hald", "--check")
    assert code == 1


def test_hald_check_ignores_ibf_cells(capsys, monkeypatch):
    table = dict(linmod.PUBLISHED_HALD_TABLE)
    table["234c"] = (9.0,) + table["234c"][1:]
    monkeypatch.setattr(linmod, "PUBLISHED_HALD_TABLE", table)
    code, out, _ = run(capsys, "hald", "--check", "--format", "csv")
    assert code == 0
    bad = [r for r in parse_csv(out) if r["ok"] == "false"]
    assert [(r["model"], r["column"], r["status"]) for r in bad] == [("234c", "ibf_reference", "informational")]


def test_hald_dump_data(capsys, tmp_path):
    code, out, _ = run(capsys, "hald", "--dump-data")
    assert code == 0 and out == hald_csv_text()
    run(capsys, "hald", "--dump-data", "--output", str(tmp_path / "h.csv"))
    assert (tmp_path / "h.csv").read_text() == hald_csv_text()


def test_hald_all_subsets(capsys):
    code, out, _ = run(capsys, "hald", "--all-subsets", "--format", "csv")
    assert code == 0 and len(parse_csv(out)) == 15


# -- verify -------------------------------------------------------------------------------------


def test_verify_lemmas(capsys):
    for lemma in ("1", "2"):
        code, out, err = run(capsys, "verify", "--lemma", lemma, "--samples", "100000", "--format", "csv")
        assert code == 0
        assert parse_csv(out)[0]["violations"] == "0"
        assert "PASS" in err


def test_verify_theorem1(capsys):
    code, out, err = run(capsys, "verify", "--theorem", "1", "--format", "csv")
    assert code == 0 and "limit estimate: 1" in err
    rows = parse_csv(out)
    assert 0.9 <= float(next(r for r in rows if r["n_star"] == "10000000000")["value"]) <= 1.1


def test_verify_theorem1_failure_exit(capsys):
    code, _, err = run(capsys, "verify", "--theorem", "1", "--n-grid", "10,100")
    assert code == 1 and "FAIL" in err


def test_verify_theorem2_deterministic(capsys):
    argv = ["verify", "--theorem", "2", "--reps", "3000", "--seed", "42", "--format", "csv"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    header = out1.splitlines()[0].split(",")
    assert header[:6] == ["n", "regime", "W", "empirical_prob", "analytic_bound", "mc_stderr"]
    _, out3, _ = run(capsys, *argv[:-2], "--jobs", "3", "--format", "csv")
    assert out3 == out1


def test_verify_theorem3(capsys):
    code, out, _ = run(capsys, "verify", "--theorem", "3", "--format", "csv")
    assert code == 0
    vals = [float(r["o_l"]) for r in parse_csv(out)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-12


def test_entry_point_subprocess(tmp_path):
    env = dict(os.environ, LC_ALL="C.UTF-8")
    env.pop(cli.OUTPUT_DIR_ENV, None)
    res = subprocess.run([sys.executable, "-m", "arlb.cli", "table1", "--format", "csv"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "10,0.05000"
    res = subprocess.run([sys.executable, "-m", "arlb.cli", "calibrate", "--p", "2"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 2
