import math
import os
import subprocess
import sys

import pytest

from hypdot import cli, tables

POLE = 1.5476602252691558


def read(path):
    return tables.read_table(str(path))


def test_lambda_row(tmp_path):
    out = tmp_path / "lam.csv"
    assert cli.main(["lambda", "--nu", "0.3", "--theta", "0", "-o", str(out)]) == 0
    prov, cols, rows = read(out)
    assert prov["command"] == "lambda"
    row = rows[0]
    assert abs(row["lambda_re"] - 0.39) < 1e-15 and row["lambda_im"] == 0


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_byte_identical_reruns(tmp_path, fmt):
    argv = ["qtrace", "--a", "1", "--omega", "1", "--z-from", "0", "--z-to", "6.5", "--n", "40", "--format", fmt]
    a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
    assert cli.main(argv + ["-o", str(a)]) == 0
    assert cli.main(argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_json_agree(tmp_path):
    argv = ["coeffs", "--nu", "0.3", "--theta", "-1", "--window", "20"]
    cli.main(argv + ["-o", str(tmp_path / "c.csv")])
    cli.main(argv + ["-o", str(tmp_path / "c.json")])
    p1, c1, r1 = read(tmp_path / "c.csv")
    p2, c2, r2 = read(tmp_path / "c.json")
    assert p1 == p2 and c1 == c2 and r1 == r2
    assert [r["r"] for r in r1] == list(range(-20, 21))


def test_qtrace_monotone_between_poles(tmp_path):
    out = tmp_path / "q.csv"
    cli.main(["qtrace", "--a", "1", "--omega", "1", "--z-from", "-0.5", "--z-to", "6.5", "--n", "80", "-o", str(out)])
    _, cols, rows = read(out)
    recs = rows
    poles = [r["z"] for r in recs if r["kind"] == "pole"]
    assert len(poles) == 2 and abs(poles[0] - POLE) < 1e-6
    edges = [-math.inf] + poles + [math.inf]
    for lo, hi in zip(edges, edges[1:]):
        vals = [r["q_H"] for r in recs if r["kind"] == "sample" and lo < r["z"] < hi and not math.isnan(r["q_H"])]
        assert all(y > x for x, y in zip(vals, vals[1:]))


def test_plot_script_reads_only_table(tmp_path):
    out = tmp_path / "q.csv"
    cli.main(["qtrace", "--a", "1", "--omega", "1", "--z-from", "0", "--z-to", "3", "--n", "10", "-o", str(out)])
    script = (tmp_path / "q_plot.py").read_text()
    assert "q.csv" in script and "hypdot" not in script
    compile(script, "q_plot.py", "exec")


def test_spectrum_perturbed(tmp_path):
    out = tmp_path / "s.json"
    argv = ["spectrum", "--a", "1", "--omega", "1", "--chi", "0.5", "--window", "0", "7", "-o", str(out)]
    assert cli.main(argv) == 0
    prov, cols, rows = read(out)
    assert prov["chi"] == "0.5"
    recs = rows
    assert sorted({r["class"] for r in recs}) == ["S1", "S3"]
    assert all(r["z_tilde"] == r["z"] for r in recs)


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("HYPDOT_OUTPUT_DIR", str(tmp_path))
    assert cli.main(["lambda", "--nu", "0.3", "--theta", "-1"]) == 0
    assert (tmp_path / "lambda.csv").exists()


def test_invalid_input_exit_2(tmp_path):
    out = tmp_path / "x.csv"
    with pytest.raises(SystemExit) as e:
        cli.main(["green", "--a", "-1", "--omega", "1", "--z", "1", "--xi1", "1.3", "--xi2", "1.5", "-o", str(out)])
    assert e.value.code == 2
    assert not out.exists()


def test_runtime_error_exit_1(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code = cli.main(["green", "--a", "1", "--omega", "1", "--z", repr(POLE), "--xi1", "1.3", "--xi2", "1.5", "-o", str(out)])
    assert code == 1
    assert "PoleError" in capsys.readouterr().err
    assert os.listdir(tmp_path) == []


def test_sweep_order_independent(tmp_path):
    base = ["sweep", "--omega", "1", "--chi", "inf", "0.5", "--m-max", "1", "--window", "0", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(base + ["--a", "1", "1.2", "--jobs", "2", "-o", str(a)]) == 0
    assert cli.main(base + ["--a", "1.2", "1", "--jobs", "1", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_entry_point(tmp_path):
    out = tmp_path / "lam.csv"
    r = subprocess.run([sys.executable, "-m", "hypdot.cli", "lambda", "--nu", "0.3", "--theta", "0", "-o", str(out)], capture_output=True, text=True)
    assert r.returncode == 0 and out.exists()
