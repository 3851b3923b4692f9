import json
import subprocess
import sys
from fractions import Fraction

import pytest

from zetamoments.cli import main
from zetamoments.report import loads_csv, loads_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_wpoly_json(capsys):
    code, out = run(capsys, "wpoly", "--k", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "wpoly" and doc["schema"] == "1"
    coeffs = [Fraction(r["coefficient"]) for r in doc["rows"]]
    assert coeffs == [1, 4, -6, 4, -1]


def test_gamma_rows(capsys):
    code, out = run(capsys, "gamma", "--k", "2")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 4


def test_invalid_inputs_exit_2(capsys):
    assert main(["correlate", "--k", "9", "--x", "1e4", "--h", "1"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["wpoly"]) == 2
    assert main(["correlate", "--k", "2", "--x", "abc", "--h", "1"]) == 2
    assert main(["--format", "csv", "wpoly", "--k", "2"]) == 2
    capsys.readouterr()


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_timestamp_gives_identical_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["--timestamp", "2020-01-01T00:00:00Z", "-o", str(path), "constants", "--k", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = loads_json(a.read_text())
    assert doc["timestamp"] == "2020-01-01T00:00:00Z"


def test_fingerprint_ignores_timestamp(capsys):
    _, x = run(capsys, "--timestamp", "A", "wpoly", "--k", "3")
    _, y = run(capsys, "--timestamp", "B", "wpoly", "--k", "3")
    assert json.loads(x)["fingerprint"] == json.loads(y)["fingerprint"]
    assert x != y


def test_correlate_csv_and_json_agree(tmp_path, capsys):
    cache = tmp_path / "cache"
    args = ["correlate", "--k", "2", "--x", "1e4,2e4", "--h", "1,3"]
    code, csv_text = run(capsys, "--cache-dir", str(cache), "--format", "csv", *args)
    assert code == 0
    rows = loads_csv(csv_text)
    assert len(rows) == 4
    code, js = run(capsys, "--cache-dir", str(cache), "--timestamp", "t", *args)
    doc = loads_json(js)
    for r, j in zip(rows, doc["rows"]):
        assert float(r["predicted"]) == float(j["predicted"])
        assert float(r["actual"]) == float(j["actual"])
        assert r["fingerprint"] == j["fingerprint"]


def test_cache_cold_and_warm(tmp_path, capsys):
    cache = tmp_path / "c"
    args = ["--cache-dir", str(cache), "--timestamp", "t", "correlate", "--k", "2", "--x", "1e4", "--h", "1"]
    _, cold = run(capsys, *args)
    files = sorted(p.name for p in cache.iterdir())
    assert any(name.startswith("dk_k2_") for name in files)
    _, warm = run(capsys, *args)
    assert cold == warm


def test_verify_quick_reports(capsys):
    # criterion 1 compares against the printed w_3, which has sign typos
    code, out = run(capsys, "verify-all", "--quick")
    rows = json.loads(out)["rows"]
    assert code == 1
    status = {r["criterion"]: r["passed"] for r in rows}
    assert status == {"1": "false", "2": "true", "3": "true", "4": "true"}


def test_verify_only(capsys):
    code, out = run(capsys, "verify-all", "--only", "2,3")
    assert code == 0
    assert len(json.loads(out)["rows"]) == 2


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "zetamoments.cli", "wpoly", "--k", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["rows"][0]["coefficient"] == "1/1"
