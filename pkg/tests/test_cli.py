import json
import subprocess
import sys

import jsonschema
import pytest

from pseudomech.cli import main
from pseudomech.suites import MODEL_SUITES, report_schema, run_suite


def _json_report(tmp_path, *args):
    out = tmp_path / "r.json"
    code = main(["verify", *args, "--json", str(out)])
    return code, json.loads(out.read_text())


def test_verify_1d_all_validates(tmp_path):
    code, data = _json_report(tmp_path, "--model", "1d", "--suite", "all")
    assert code == 0
    jsonschema.validate(data, report_schema())
    assert data["determinant_order"] == "row-major"
    assert all(c["status"] == "pass" for c in data["checks"])


@pytest.mark.parametrize("model", ["2d", "pu1", "pu2", "isotonic", "nn"])
def test_every_model_passes_all(model):
    rep = run_suite(model, "all")
    jsonschema.validate(rep.as_dict(), report_schema())
    assert rep.ok, [c for c in rep.checks if c.status != "pass"]


def test_reports_are_deterministic_modulo_timestamp():
    a, b = (run_suite("2d", "all").as_dict() for _ in range(2))
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_suite_availability():
    assert "nambu" in MODEL_SUITES["1d"]
    assert "nambu" not in MODEL_SUITES["2d"]


def test_nn3_integrals_suite(capsys):
    code = main(["verify", "--model", "nn3", "--suite", "integrals"])
    assert code == 0
    rep = run_suite("nn", "integrals", {"n": 3})
    assert sum(c.name.startswith("conserved_") for c in rep.checks) == 36


def test_exit_codes(tmp_path, capsys):
    assert main(["verify", "--model", "bogus", "--suite", "all"]) == 2
    assert main(["bracket", "q +", "p", "--model", "1d", "--basis", "qp"]) == 2
    assert main(["bracket", "q", "p", "--model", "1d", "--basis", "nope"]) == 2
    assert main(["verify", "--model", "1d", "--suite", "all", "--config", str(tmp_path / "missing")]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mu1 = 1\nmu2 = 1\nrho = 2  # not positive definite\n")
    assert main(["verify", "--model", "pu1", "--suite", "canonical", "--config", str(cfg)]) == 1
    with pytest.raises(SystemExit) as e:
        main(["verify", "--model", "1d", "--suite", "unknown"])
    assert e.value.code == 2


def test_failing_check_exits_one(tmp_path):
    cfg = tmp_path / "tight.cfg"
    cfg.write_text("dynamics_tol = 1e-30\n")
    assert main(["verify", "--model", "1d", "--suite", "dynamics", "--config", str(cfg)]) == 1


def test_bracket_command(capsys):
    assert main(["bracket", "q", "p", "--model", "1d", "--basis", "qp"]) == 0
    assert capsys.readouterr().out.strip() == "1.0"
    assert main(["bracket", "theta", "pi", "--model", "1d"]) == 0
    assert capsys.readouterr().out.strip() == "1.0"


def test_evolve_command(capsys):
    assert main(["evolve", "--model", "1d", "--t", "0", "--observable", "X*P"]) == 0
    assert "X*P" in capsys.readouterr().out


def test_nambu_command(capsys):
    assert main(["nambu", "--f", "P"]) == 0
    out = capsys.readouterr().out
    assert "row-major" in out and "defect" in out
    assert main(["nambu", "--model", "2d", "--f", "P1"]) == 2


def test_integrals_command(capsys):
    assert main(["integrals", "--model", "1d"]) == 0
    assert "Z0" in capsys.readouterr().out


def test_json_to_stdout(capsys):
    assert main(["verify", "--model", "pu2", "--suite", "canonical", "--json", "-"]) == 0
    out = capsys.readouterr().out
    data = json.loads(out[out.index("{"):])
    jsonschema.validate(data, report_schema())


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "pseudomech.cli", "verify", "--model", "1d", "--suite",
                          "canonical"], capture_output=True, text=True)
    assert out.returncode == 0


def test_isotonic_recurrence_uses_model_frequency():
    rep = run_suite("isotonic", "dynamics", {"k": 3})
    assert rep.ok, [c for c in rep.checks if c.status != "pass"]
