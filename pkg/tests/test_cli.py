import json
import subprocess
import sys

import pytest

from heavenlift import cli

BF_OK = """
name = "bf A"
samples = 6
rng_seed = 7

[family]
kind = "bf_lift"
[family.params]
variant = "A"
b = [[0.0, 0.0], [1.0, 0.0]]
r = [0.3, 0.2, -0.1]

[[suite]]
check = "residual"
equations = ["HCMA_LEG_ROT", "BF_REAL"]
tolerance = 1e-9
"""

BF_CONSTRAINTS_FAIL = BF_OK + """
[[suite]]
check = "residual"
equations = ["ROT_CONSTRAINTS"]
tolerance = 1e-9
"""

HELMHOLTZ_BAD_ALPHA = """
[family]
kind = "helmholtz_lift"
[[family.params.modes]]
alpha = 0.5
F = 1.0
G = 0.0

[[suite]]
check = "residual"
equations = ["CMA_LEGENDRE"]
"""


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_verify_pass_exit_zero(tmp_path, capsys):
    cfg = _write(tmp_path, BF_OK)
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "pass" and rep["environment"]["rng_seed"] == 7
    assert {r["name"] for r in rep["checks"]} == {"HCMA_LEG_ROT", "BF_REAL"}
    assert rep["transform"] == {"kind": "rot", "zeta_branch": "principal"}


def test_verify_negative_control_exit_one(tmp_path):
    cfg = _write(tmp_path, BF_CONSTRAINTS_FAIL)
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--config", cfg, "--out", str(out)]) == 1
    rep = json.loads(out.read_text())
    failed = {r["name"] for r in rep["checks"] if not r["pass"]}
    assert "ROT_CONSTRAINT_1" in failed and "BF_REAL" not in failed


@pytest.mark.parametrize("text, path", [
    ("[family\nkind = 1", "<document>"),
    (HELMHOLTZ_BAD_ALPHA, "family.params.modes[0].alpha"),
    (BF_OK.replace('variant = "A"', 'variant = "C"'), "family.params.k"),
    (BF_OK.replace("tolerance = 1e-9", "tolerance = -1"), "suite[0].tolerance"),
    (BF_OK.replace('"BF_REAL"', '"NOPE"'), "suite[0].equations[1]"),
    (BF_OK.replace('"BF_REAL"', '"CMA_ELLIPTIC"'), "suite[0]"),
    (BF_OK.replace('"BF_REAL"', '"BACKLUND_1"'), "suite[0]"),
])  # fmt: skip
def test_config_errors_exit_two(tmp_path, capsys, text, path):
    assert cli.main(["verify", "--config", _write(tmp_path, text)]) == 2
    err = capsys.readouterr().err
    assert f"config error: {path}:" in err


def test_missing_config_file_exit_two(tmp_path, capsys):
    assert cli.main(["verify", "--config", str(tmp_path / "absent.toml")]) == 2
    assert "--config" in capsys.readouterr().err


def test_reports_are_byte_identical(tmp_path):
    cfg = _write(tmp_path, BF_CONSTRAINTS_FAIL)
    outs = []
    for i, jobs in enumerate((1, 1, 3)):
        out = tmp_path / f"r{i}.json"
        cli.main(["verify", "--config", cfg, "--out", str(out), "--seed", "11", "--jobs", str(jobs)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    other = tmp_path / "other.json"
    cli.main(["verify", "--config", cfg, "--out", str(other), "--seed", "12"])
    assert other.read_bytes() != outs[0]


def test_csv_output(tmp_path):
    cfg = _write(tmp_path, BF_OK)
    csv_path = tmp_path / "v.csv"
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "r.json"), "--csv", str(csv_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "c0,c1,c2,c3,value_re,value_im,residual_HCMA_LEG_ROT,residual_BF_REAL"
    assert len(lines) == 1 + 6


def test_sample_grid(tmp_path, capsys):
    cfg = _write(tmp_path, BF_OK)
    assert cli.main(["sample", "--config", cfg, "--grid", "2", "2", "1", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 8


def test_dispersion_default_table(capsys):
    assert cli.main(["dispersion"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "pass" and len(rep["checks"][0]["table"]) == 15


def test_geometry_subcommand_defaults(tmp_path, capsys):
    cfg = _write(tmp_path, BF_OK)
    assert cli.main(["geometry", "--config", cfg]) == 0
    rep = json.loads(capsys.readouterr().out)
    names = [r["name"] for r in rep["checks"]]
    assert names == ["det_g", "ricci_trace", "ricci_logdet", "signature", "nonflatness", "rank"]


def test_geometry_needs_push_forward(tmp_path):
    text = """
[family]
kind = "wave_lift"
[[family.params.modes]]
beta = 1.0
[[suite]]
check = "geometry"
"""
    assert cli.main(["geometry", "--config", _write(tmp_path, text)]) == 2


@pytest.mark.parametrize("pipeline", ["helmholtz", "bf"])
def test_lift_demo_passes(pipeline, capsys):
    assert cli.main(["lift-demo", "--pipeline", pipeline]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "pass"
    assert all(r["pass"] for st in rep["stages"] for r in st["checks"])


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "heavenlift.cli", "dispersion"], capture_output=True, text=True)
    assert proc.returncode == 0 and '"verdict": "pass"' in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "heavenlift.cli", "verify"], capture_output=True, text=True)
    assert proc.returncode == 2  # argparse usage error
