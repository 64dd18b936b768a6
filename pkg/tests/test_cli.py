import json
import subprocess
import sys

import pytest

from ampqed import report as report_io
from ampqed.cli import main
from ampqed.config import SUITES, bundled_scenarios, load_config, parse_config
from ampqed.suites import run

SMALL = """
name = "small"
seed = 3
analyses = {analyses}

[grid]
z_min = 0.0
z_max = 2.0
n = 32

[frequencies]
omega_min = 5.0
omega_max = 12.0
n = 2
cutoff = 400.0
n_quad = 160

[[layers]]
z_min = 0.5
z_max = 1.5
[[layers.oscillators]]
strength = -1.0
resonance = 10.0
damping = 1.0
plasma = 2.0

[output]
densities = {densities}
"""


def write(tmp_path, text, name="small.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def small(tmp_path, analyses=None, densities=False):
    a = json.dumps(list(SUITES) if analyses is None else analyses)
    return write(tmp_path, SMALL.format(analyses=a, densities=str(densities).lower()))


def test_bundled_scenarios_validate(capsys):
    names = bundled_scenarios()
    assert {"absorbing-slab", "gain-slab-subthreshold", "gain-cavity-overthreshold",
            "vacuum", "nonlocal-slab"} <= set(names)
    for name in names:
        assert main(["validate", name]) == 0
    assert "valid:" in capsys.readouterr().out


@pytest.mark.parametrize("bad", [
    ('analyses = ["validate-kernel"]', 'analyses = ["no-such-suite"]'),
    ("n = 32", "n = 8"),
    ("omega_min = 5.0", "omega_min = -5.0"),
    ("damping = 1.0", "damping = -1.0"),
    ("name = ", "name = = "),
    ("seed = 3", "seed = 3\ncolour = 1"),
])
def test_validate_rejects(tmp_path, capsys, bad):
    text = SMALL.format(analyses='["validate-kernel"]', densities="false")
    assert main(["validate", str(write(tmp_path, text))]) == 0
    p = write(tmp_path, text.replace(*bad, 1), "bad.toml")
    assert main(["validate", str(p)]) == 2
    assert "invalid:" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["validate", "/nonexistent/scenario.toml"]) == 2
    assert main(["run", "/nonexistent/scenario.toml"]) == 2


def test_config_hash_is_deterministic(tmp_path):
    a = load_config(small(tmp_path))
    b = load_config(small(tmp_path))
    assert a.config_hash == b.config_hash and len(a.config_hash) == 64
    c = load_config(small(tmp_path, densities=True))
    assert c.config_hash != a.config_hash


def test_run_and_export(tmp_path, capsys):
    cfg = small(tmp_path, densities=True)
    out = tmp_path / "rep.json"
    assert main(["run", str(cfg), "-o", str(out)]) == 0
    printed = capsys.readouterr().out
    for s in SUITES:
        assert s in printed
    rep = report_io.load(out)
    assert rep.passed and [a["name"] for a in rep.analyses] == list(SUITES)
    data = json.loads(out.read_text())
    assert data["format"] == "ampqed-report/1" and data["config_hash"] == rep.config_hash

    d1, d2 = tmp_path / "e1", tmp_path / "e2"
    assert main(["export", str(out), "--format", "csv", "--out-dir", str(d1)]) == 0
    assert main(["export", str(out), "--format", "csv", "--out-dir", str(d2)]) == 0
    for f in d1.iterdir():
        assert f.read_bytes() == (d2 / f.name).read_bytes()
    rows = [l for l in (d1 / "small_densities.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert rows[0].startswith("omega,z_row,z_col,EE_re,EE_im")
    assert len(rows) - 1 == 2 * 32 * 32
    res = [l for l in (d1 / "small_residuals.csv").read_text().splitlines()
           if not l.startswith("#")]
    assert res[0] == "analysis,status,omega,quantity,value" and len(res) > 1

    assert main(["export", str(out), "--format", "json", "--out-dir", str(d1)]) == 0
    assert json.loads((d1 / "small.json").read_text()) == data


def test_export_empty_analysis_list(tmp_path):
    out = tmp_path / "empty.json"
    assert main(["run", str(small(tmp_path, analyses=[])), "-o", str(out)]) == 0
    paths = report_io.export(report_io.load(out), "csv", tmp_path / "csv")
    for p in paths:
        lines = [l for l in p.read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 1


def test_export_bad_report(tmp_path, capsys):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    assert main(["export", str(p), "--format", "json"]) == 2


def test_coarse_gain_slab_fails_closed(tmp_path, capsys):
    # at 16 nodes the discretized gain slab has a genuine upper-half-plane pole
    text = SMALL.format(analyses=json.dumps(list(SUITES)), densities="false")
    cfg = write(tmp_path, text.replace("n = 32", "n = 16", 1))
    assert main(["run", str(cfg), "-o", str(tmp_path / "r.json")]) == 1
    assert "SKIPPED  (analyticity-violation)" in capsys.readouterr().out


def test_cavity_fails_closed():
    # the bundled cavity model with only the scan and the analytic suites
    cfg = load_config("gain-cavity-overthreshold")
    raw = dict(cfg.raw, analyses=["pole-scan", "commutator", "correlations"])
    rep = run(parse_config(raw))
    status = {a["name"]: a for a in rep.analyses}
    assert status["pole-scan"]["status"] == "fail"
    assert status["pole-scan"]["reason"] == "analyticity-violation"
    assert status["commutator"]["status"] == "skipped"
    assert status["correlations"]["status"] == "skipped"
    assert not rep.passed


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ampqed", "validate", "vacuum"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "valid: vacuum" in r.stdout
