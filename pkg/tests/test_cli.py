import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rcatest import RcarParams, RngStream, TestConfig, TestOutcome, run_test, simulate
from rcatest.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main, read_series


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def _write_series(path, values, header=("t", "x")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        for t, v in enumerate(values, start=1):
            w.writerow([t, repr(float(v))])
    return path


def _field(text, key):
    for line in text.splitlines():
        if line.startswith(key + " ") or line.startswith(key + "\t"):
            return line[len(key):].strip()
    raise KeyError(key)


@pytest.fixture
def ar_csv(tmp_path):
    x = simulate(RcarParams(0.5), 2000, RngStream(21)).values
    return str(_write_series(tmp_path / "ar.csv", x))


# ---------------------------------------------------------------- input


def test_read_series_header_and_default_column():
    src = io.StringIO("date,value\n2001-01,1.5\n2001-02,2.5\n2001-03,-1\n")
    s = read_series(src)
    assert s.label == "value" and list(s.values) == [1.5, 2.5, -1.0]


def test_read_series_headerless_and_index():
    s = read_series(io.StringIO("1,10\n2,20\n"), column="0")
    assert list(s.values) == [1.0, 2.0] and s.label is None


def test_read_series_missing_policy():
    text = "t,x\n1,1.0\n2,NA\n3,3.0\n"
    with pytest.raises(Exception) as info:
        read_series(io.StringIO(text))
    assert "missing" in str(info.value)
    assert list(read_series(io.StringIO(text), drop_missing=True).values) == [1.0, 3.0]


def test_read_series_rejects_text():
    with pytest.raises(Exception):
        read_series(io.StringIO("t,x\n1,1\n2,abc\n"))


# ---------------------------------------------------------------- test command


def test_constant_column_gives_half(tmp_path):
    path = _write_series(tmp_path / "c.csv", np.full(200, 4.0))
    code, out = run("test", path, "--no-demean")
    assert code == EXIT_OK
    assert float(_field(out, "D_T")) == 0.5


def test_json_lines_round_trip(ar_csv):
    code, out = run("test", ar_csv, "--format", "json-lines", "--seed", "4")
    assert code == EXIT_OK
    rec = json.loads(out.splitlines()[0])
    parsed = TestOutcome.from_dict(rec)
    direct = run_test(read_series(ar_csv), TestConfig(), RngStream(4).child(0))
    assert parsed == direct


def test_json_lines_saturated_l_t(tmp_path):
    # a constant column with demeaning gives D_T = 0, swapped null saturates l_T
    path = _write_series(tmp_path / "c.csv", np.full(100, 2.0))
    code, out = run("test", path, "--null", "nonstationary", "--format", "json-lines")
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["l_t"] == "inf"
    assert math.isinf(TestOutcome.from_dict(rec).l_t)
    code, out = run("test", path, "--null", "nonstationary")
    assert _field(out, "l_T") == "saturated"


def test_csv_output(ar_csv):
    code, out = run("test", ar_csv, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 1
    assert rows[0]["null"] == "stationary" and int(rows[0]["T"]) == 2000


def test_stdin_input(ar_csv):
    with open(ar_csv) as fh:
        data = fh.read()
    proc = subprocess.run(
        [sys.executable, "-m", "rcatest.cli", "test", "-", "--format", "json-lines"],
        input=data, capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    _, direct = run("test", ar_csv, "--format", "json-lines")
    assert proc.stdout == direct


def test_empirical_pipeline_prints_bound(tmp_path):
    t = np.arange(1, 301)
    level = np.exp(1.0 + 0.01 * t + 0.05 * simulate(RcarParams(0.5), 300, RngStream(3)).values)
    path = _write_series(tmp_path / "gdp.csv", level, header=("date", "gdp"))
    code, out = run("test", path, "--preprocess", "log", "gls-detrend", "--S", 5000)
    assert code == EXIT_OK
    assert _field(out, "strong-rule bound (S=5000)") == "0.9436"


def test_preprocess_order_is_declared_order(tmp_path):
    path = _write_series(tmp_path / "p.csv", np.exp(np.linspace(0, 1, 50)) - 1.5)
    # log of the raw series hits non-positive values, diff first does too
    assert run("test", path, "--preprocess", "log")[0] == EXIT_DATA
    assert run("test", path, "--preprocess", "demean", "diff")[0] == EXIT_OK


# ---------------------------------------------------------------- decide


def test_decide_accepts_stationary_ar(ar_csv):
    code, out = run("decide", ar_csv, "--S", 200, "--seed", 1)
    assert code == EXIT_OK
    assert _field(out, "decision") == "stationary"
    assert _field(out, "accept null") == "yes"


def test_decide_bound_for_5000(ar_csv):
    code, out = run("decide", ar_csv, "--S", 5000, "--R", 50, "--format", "json-lines")
    rec = json.loads(out)
    assert code == EXIT_OK and rec["s_used"] == 5000
    assert f"{rec['bound']:.4f}" == "0.9436"
    assert abs(rec["bound"] - 0.9436) < 5e-5


def test_decide_diff_pass(ar_csv):
    code, out = run("decide", ar_csv, "--S", 50, "--diff-pass", "--format", "json-lines")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == EXIT_OK
    assert [r["pass"] for r in recs] == ["levels", "first-difference"]
    assert recs[1]["T"] == recs[0]["T"] - 1


# ---------------------------------------------------------------- exit codes


def test_short_file_is_data_error(tmp_path):
    path = _write_series(tmp_path / "short.csv", np.arange(1.0, 11.0))
    assert run("decide", path)[0] == EXIT_DATA
    assert run("test", path)[0] == EXIT_DATA


def test_missing_file_and_missing_value(tmp_path):
    assert run("test", tmp_path / "nope.csv")[0] == EXIT_DATA
    path = tmp_path / "m.csv"
    path.write_text("t,x\n" + "".join(f"{i},{i % 7}\n" for i in range(1, 60)) + "60,\n")
    assert run("test", path)[0] == EXIT_DATA
    assert run("test", path, "--drop-missing")[0] == EXIT_OK


def test_usage_errors(ar_csv):
    assert run("test", ar_csv, "--alpha", 2)[0] == EXIT_USAGE
    assert run("test", ar_csv, "--g", "cubic")[0] == EXIT_USAGE
    assert run("frobnicate")[0] == EXIT_USAGE
    assert run("test", ar_csv, "--column", "missing")[0] == EXIT_USAGE


def test_numeric_error_on_overflow():
    assert run("simulate", "--phi", 1.05, "--T", 20_000)[0] == EXIT_NUMERIC


def test_console_script_exit_code(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "rcatest.cli", "test", str(tmp_path / "absent.csv")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == EXIT_DATA and "error" in proc.stderr


# ---------------------------------------------------------------- classify / simulate


def test_classify():
    code, out = run("classify", "--phi", 1, "--sigma-b2", 0.25, "--format", "json-lines")
    rec = json.loads(out)
    assert code == EXIT_OK and rec["regime"] == "stationary" and rec["lyapunov"] < 0
    assert rec["finite_variance"] is False
    _, out = run("classify", "--phi", 1.05)
    assert out.startswith("explosive")
    _, out = run("classify", "--phi", 1)
    assert out.startswith("boundary")


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run("simulate", "--phi", 0, "--T", 100, "--seed", 9, "-o", path)[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    s = read_series(str(a))
    assert s.T == 100 and s.label == "x"
    assert np.array_equal(s.values, simulate(RcarParams(0.0), 100, RngStream(9)).values)
    _, c = run("simulate", "--phi", 0, "--T", 100, "--seed", 10)
    assert c != a.read_text()


# ---------------------------------------------------------------- mc-table


def test_mc_table_small_csv():
    code, out = run(
        "mc-table", "table3", "--reps", 4, "--errors", "gaussian", "--T", 60,
        "--workers", 1, "--format", "csv", "--S", 16,
    )
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 15
    assert all(r["n_reps"] == "4" and r["strong_accept_rate"] == "" for r in rows)
    assert all(0.0 <= float(r["rejection_freq"]) <= 1.0 for r in rows if r["rejection_freq"] != "nan")


def test_mc_table_text_with_strong_rule():
    code, out = run(
        "mc-table", "table1", "--reps", 2, "--errors", "gaussian", "--T", 50,
        "--workers", 1, "--S", 16,
    )
    lines = out.splitlines()
    assert code == EXIT_OK and len(lines) == 3 + 2 * 15
    # strong-rule accept rate beneath each frequency
    assert lines[4].split("|")[1].strip().startswith("(")


@pytest.mark.slow
def test_random_walk_swapped_null_accepts(tmp_path):
    path = tmp_path / "rw.csv"
    accepts = 0
    for seed in range(100):
        run("simulate", "--phi", 1, "--T", 2000, "--seed", seed, "-o", path)
        code, out = run("test", path, "--null", "nonstationary", "--seed", seed, "--format", "json-lines")
        assert code == EXIT_OK
        accepts += not json.loads(out)["reject"]
    assert accepts >= 90, accepts


@pytest.mark.slow
def test_mc_table_boundary_power_t2():
    code, out = run(
        "mc-table", "table2", "--reps", 300, "--errors", "t2", "--T", 500, 1000, 2000,
        "--no-strong", "--format", "csv",
    )
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 27
    low = [(r["phi"], r["sigma_b2"], r["T"], r["rejection_freq"]) for r in rows if float(r["rejection_freq"]) < 0.95]
    assert not low, low


@pytest.mark.slow
def test_mc_table_boundary_swapped_size():
    code, out = run("mc-table", "table4", "--reps", 300, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 9 * 3 * 4
    outside = [
        (r["phi"], r["sigma_b2"], r["error_law"], r["T"], r["rejection_freq"])
        for r in rows
        if not 0.03 <= float(r["rejection_freq"]) <= 0.09
    ]
    assert not outside, outside
