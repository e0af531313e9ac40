import io
import json
import math
import re
import subprocess
import sys
from pathlib import Path

import pytest

from quasicompact import reports
from quasicompact.cli import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def cli(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def cfg(name):
    return str(CONFIGS / f"{name}.json")


def test_drift_auto_weight():
    code, out = cli("drift", "--config", cfg("birth_death_symmetric").replace("symmetric", "lambda"), "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["result"]["weight"]["source"] == "auto"


def test_drift_homogeneous_reports_closed_form(tmp_path):
    path = tmp_path / "bd.json"
    path.write_text(json.dumps({"model": "birth_death", "params": {"p": 0.5, "r": 0.3, "q": 0.2, "a": 0.6}}))
    code, out = cli("drift", "--config", str(path), "--json", "-M", "400")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["weight"]["gamma"] == pytest.approx(math.sqrt(2.5), rel=1e-9)
    assert res["drift"]["L"] == pytest.approx(0.3 + 2 * math.sqrt(0.1), rel=1e-9)


def test_symmetric_walk_is_infeasible(capsys):
    code, _ = cli("drift", "--config", cfg("birth_death_symmetric"))
    assert code == 2
    assert "phi^(2)(1)" in capsys.readouterr().err


def test_identity_is_infeasible():
    assert cli("drift", "--config", cfg("identity"))[0] == 2


def test_unsupported_model():
    assert cli("rate", "--config", cfg("poisson_mh"))[0] == 3
    assert cli("drift", "--config", cfg("contracting_normals"))[0] == 3


def test_usage_errors(tmp_path):
    assert cli("rate", "--config", str(tmp_path / "missing.json"))[0] == 64
    assert cli("bogus")[0] == 64
    assert cli("rate")[0] == 64


def test_verify_geometric_mh_passes_and_negative_control_fails():
    assert cli("verify", "--config", cfg("geometric_mh"))[0] == 0
    assert cli("verify", "--config", cfg("geometric_mh"), "--negative-control")[0] == 1


def test_verify_mm1_passes():
    assert cli("verify", "--config", cfg("mm1"))[0] == 0


def test_json_deterministic_under_seed():
    a = cli("ifs", "--config", cfg("contracting_normals"), "--json", "--seed", "7")[1]
    b = cli("ifs", "--config", cfg("contracting_normals"), "--json", "--seed", "7")[1]
    assert a == b
    assert json.loads(a)["seed"] == 7


def test_threads_do_not_change_output():
    a = cli("spectrum", "--config", cfg("birth_death_lambda"), "--json", "--threads", "1")[1]
    b = cli("spectrum", "--config", cfg("birth_death_lambda"), "--json", "--threads", "3")[1]
    assert a == b


def test_floats_have_17_significant_digits():
    out = cli("rate", "--config", cfg("birth_death_lambda"), "--json")[1]
    rho = json.loads(out)["result"]["rho"]
    token = re.search(r'"rho": ([0-9.eE+-]+)', out).group(1)
    assert float(token) == rho
    assert len(token.replace(".", "").lstrip("0")) == 17


def test_csv_written(tmp_path):
    path = tmp_path / "decay.csv"
    assert cli("verify", "--config", cfg("birth_death_lambda"), "--csv", str(path))[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "n,e_n"
    assert len(lines) > 10


def test_dumps_formats():
    text = reports.dumps({"b": 1.0, "a": [0.1, float("inf")], "c": 3})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text
    assert "Infinity" in text
    assert '"c": 3' in text
    assert '"b": 1.0' in text


def test_console_script_exit_code():
    proc = subprocess.run([sys.executable, "-m", "quasicompact.cli", "drift", "--config", cfg("identity")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
