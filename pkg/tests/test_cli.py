import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hypres.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_resonances_csv_header(tmp_path):
    out = tmp_path / "res.csv"
    code = main(["resonances", "--model", "truncated", "--ell", "6.283185307", "--r0", "1",
                 "--radius", "6", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["re", "im", "multiplicity", "mode"]
    assert len(rows) > 10
    assert all(float(r[0]) < 0.5 for r in rows[1:])


def test_constant_standard_funnel(capsys):
    code, out, _ = run(capsys, "constant", "--model", "funnel", "--ell", "6.283185307", "--r0", "0")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["name"] == "A_funnel"
    assert abs(float(rows[0]["value"]) - 1.5707963) < 1e-4


def test_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "constant", "--model", "funnel", "--ell", "6.283185307", "--r0", "0")
    value = out.splitlines()[1].split(",")[1]
    assert len(value.replace(".", "").lstrip("0")) <= 12
    assert abs(float(value) - 6.283185307 / 4) < 1e-8


def test_counts_plane(capsys):
    code, out, _ = run(capsys, "counts", "--model", "plane", "--t-max", "10", "--n-points", "4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["t"] for r in rows] == ["2.5", "5", "7.5", "10"]
    assert [int(r["N"]) for r in rows] == [(math.floor(t - 0.5) + 1) ** 2 for t in (2.5, 5, 7.5, 10)]


def test_phase_json(capsys):
    code, out, _ = run(capsys, "phase", "--r0", "1", "--xi-max", "2", "--step", "0.5", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["xi"] for d in data] == [0, 0.5, 1, 1.5, 2]
    assert data[0]["sigma"] == 0


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "quick")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert all({"name", "pass"} <= set(c) for c in rep["checks"])


def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "all")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert "standard_funnel_constant" in [c["name"] for c in rep["checks"]]


@pytest.mark.parametrize("argv", [
    ["resonances", "--model", "truncated", "--r0", "1", "--radius", "61"],
    ["resonances", "--model", "truncated", "--r0", "1"],
    ["resonances", "--model", "truncated", "--r0", "-1", "--radius", "5"],
    ["constant", "--model", "funnel", "--abs-tol", "-1"],
    ["constant", "--model", "nonsense"],
    ["verify", "--suite", "everything"],
    ["bogus"],
])
def test_config_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        sys.exit(main(argv))
    assert info.value.code == 2
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["error"] == "ConfigError"


def test_module_error_exit_1(capsys):
    code, _, err = run(capsys, "constant", "--model", "obstacle", "--r0", "-1")
    assert code == 1
    rec = json.loads(err.strip().splitlines()[-1])
    assert rec["command"] == "constant" and rec["error"] != "ConfigError" and rec["message"]


def test_config_file_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_points": 3, "format": "json"}))
    code, out, _ = run(capsys, "counts", "--model", "plane", "--t-max", "6", "--config", str(cfg))
    assert code == 0
    assert len(json.loads(out)) == 3
    # command-line flags win over the file
    code, out, _ = run(capsys, "counts", "--model", "plane", "--t-max", "6", "--config", str(cfg),
                       "--n-points", "2")
    assert len(json.loads(out)) == 2


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"no_such_key": 1}))
    code, _, _ = run(capsys, "counts", "--model", "plane", "--t-max", "6", "--config", str(bad))
    assert code == 2
    code, _, _ = run(capsys, "counts", "--model", "plane", "--t-max", "6", "--config", str(tmp_path / "missing"))
    assert code == 2


def test_deterministic_output(tmp_path):
    args = ["--model", "truncated", "--r0", "1", "--radius", "5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["resonances", *args, "--out", str(a)]) == 0
    assert main(["resonances", *args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_figure_phicurve(capsys):
    code, out, _ = run(capsys, "figure", "--id", "phicurve", "--r0", "1", "--n-points", "20", "--radius", "8")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    kinds = {r["kind"] for r in rows}
    assert kinds == {"curve", "zero"}


def test_module_entry_point(tmp_path):
    out = tmp_path / "c.csv"
    proc = subprocess.run([sys.executable, "-m", "hypres.cli", "constant", "--model", "funnel",
                           "--r0", "0", "--out", str(out)], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("name,value,error_estimate\n")


def test_figure_resplot_and_aplot(capsys):
    code, out, _ = run(capsys, "figure", "--id", "resplot", "--r0", "-1", "--radius", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(float(r["re"]) < 0.5 for r in rows)
    code, out, _ = run(capsys, "figure", "--id", "aplot", "--n-points", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["r0"]) for r in rows] == [-2, -1, 0, 1, 2]
    assert abs(float(rows[2]["A_funnel"]) - math.pi / 2) < 1e-6
