import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from ghlab.cli import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, json.loads(out.getvalue()), err.getvalue()


def without_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


EXIT_CODES = [
    ("classify", "lrho2_definite", 0),
    ("classify", "lrho2_signchange", 1),
    ("classify", "lrho1_golden", 0),
    ("classify", "lrho1_liouville", 1),
    ("classify", "conjugate_log", 2),
    ("classify", "resonant", 1),
    ("classify", "family_definite", 0),
    ("classify", "family_shrinking", 1),
    ("classify", "diophantine_golden", 11),
    ("solve", "solve_constant", 0),
    ("solve", "lrho1_golden", 12),
    ("solve", "family_definite", 11),
    ("witness", "torus_signchange", 0),
    ("witness", "resonant", 0),
    ("witness", "lrho2_definite", 12),
    ("witness", "lrho1_golden", 12),
    ("diophantine", "diophantine_golden", 0),
    ("diophantine", "diophantine_liouville", 0),
    ("diophantine", "resonant", 0),
    ("diophantine", "lrho2_signchange", 11),
    ("conjugate", "conjugate_log", 0),
    ("conjugate", "power_signchange", 12),
    ("conjugate", "lrho2_signchange", 12),
]


@pytest.mark.parametrize("command, config, expected", EXIT_CODES, ids=[f"{c}-{f}" for c, f, _ in EXIT_CODES])
def test_exit_code_contract(command, config, expected):
    code, report, err = invoke(command, CONFIGS / f"{config}.yaml")
    assert code == expected
    assert report["exit_code"] == expected
    if expected >= 11:
        assert "error" in report and err
    else:
        assert "payload" in report and report["provenance"]["config_hash"]


def test_malformed_config(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("operator:\n  b: 1.0\n  eigen: {kind: power}\n  colour: blue\n")
    code, report, err = invoke("classify", bad)
    assert code == 11
    assert report["error"]["location"] == "operator"
    assert "colour" in err


def test_unparseable_yaml(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("operator: [1, 2\n")
    code, report, _ = invoke("classify", bad)
    assert code == 11 and report["error"]["location"].startswith("line")


def test_missing_config(tmp_path):
    assert invoke("classify", tmp_path / "nope.yaml")[0] == 11


@pytest.mark.parametrize("command, config", [("classify", "lrho1_golden"), ("solve", "solve_constant"),
                                             ("diophantine", "diophantine_golden"), ("conjugate", "conjugate_log")])
def test_deterministic_output(command, config, tmp_path):
    path = CONFIGS / f"{config}.yaml"
    first = invoke(command, path, "--out", tmp_path / "a")
    second = invoke(command, path, "--out", tmp_path / "b")
    assert first[0] == second[0]
    r1, r2 = without_timings(first[1]), without_timings(second[1])
    r1["files"] = {k: Path(v).name for k, v in r1["files"].items()}
    r2["files"] = {k: Path(v).name for k, v in r2["files"].items()}
    assert r1 == r2
    for f in sorted((tmp_path / "a").rglob("*.csv")):
        twin = tmp_path / "b" / f.relative_to(tmp_path / "a")
        assert f.read_bytes() == twin.read_bytes()


def test_witness_export(tmp_path):
    code, report, _ = invoke("witness", CONFIGS / "resonant.yaml", "--out", tmp_path)
    assert code == 0
    assert report["payload"]["report"]["passed"] is True
    assert (tmp_path / "witness" / "witness_report.json").exists()
    assert json.loads((tmp_path / "report.json").read_text())["exit_code"] == 0


def test_overrides_change_provenance():
    _, base, _ = invoke("classify", CONFIGS / "lrho1_golden.yaml")
    _, big, _ = invoke("classify", CONFIGS / "lrho1_golden.yaml", "--jmax", "512", "--seed", "7")
    assert base["provenance"]["config_hash"] != big["provenance"]["config_hash"]
    assert big["provenance"]["seed"] == 7
    assert big["payload"]["verdict"]["decision"] == base["payload"]["verdict"]["decision"]


def test_seed_controls_random_conjugation():
    r1 = invoke("conjugate", CONFIGS / "conjugate_log.yaml", "--seed", "1")[1]["payload"]
    r2 = invoke("conjugate", CONFIGS / "conjugate_log.yaml", "--seed", "2")[1]["payload"]
    assert r1["residual"] != r2["residual"]
    assert max(r1["relative_residual"], r2["relative_residual"]) <= 1e-8


def test_floats_use_17_significant_digits():
    out = io.StringIO()
    run(["solve", str(CONFIGS / "solve_constant.yaml")], out, io.StringIO())
    text = out.getvalue()
    report = json.loads(text)
    theta = report["payload"]["rows"][0]["theta"]
    assert format(theta, ".17g") in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ghlab", "classify", str(CONFIGS / "lrho2_signchange.yaml")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["payload"]["verdict"]["rule"] == "sign-change-superlog"
