import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fourierdirac import cli
from fourierdirac.specfun import chi_minus

DETS = ["dets", "--kind", "cos", "--a-min", "0.1", "--a-max", "1.5", "--steps", "15", "--nodes", "64"]


@pytest.fixture(scope="module")
def seeded_cache(tmp_path_factory, profile_cos, profile_sin):
    directory = tmp_path_factory.mktemp("cache")
    cli.store_profile(directory, profile_cos)
    cli.store_profile(directory, profile_sin)
    return str(directory)


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dets_format_contract(capsys):
    code, out, _ = run(DETS + ["--format", "csv", "--no-cache"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "a,u,det_plus,det_minus,det_d,log_det_d"
    assert len(lines) == 16
    # 17 significant digits reproduce the doubles exactly
    row = lines[2].split(",")
    a = float(row[0])
    assert a == np.linspace(0.1, 1.5, 15)[1]
    assert float(row[1]) == math.log(a)


def test_empty_range_is_an_error(capsys):
    code, _, err = run(["dets", "--a-min", "1.0", "--a-max", "0.5", "--no-cache"], capsys)
    assert code != 0 and "empty" in err
    code, _, err = run(["potentials", "--u-min", "0", "--u-max", "0", "--du", "0.1", "--no-cache"], capsys)
    assert code != 0
    code, _, _ = run(["dets", "--a", "0.5", "--nodes", "4"], capsys)
    assert code != 0


def test_json_round_trip(tmp_path, capsys):
    cli.main(DETS + ["--format", "json", "--out", str(tmp_path / "d.json"), "--no-cache"])
    cli.main(DETS + ["--format", "csv", "--out", str(tmp_path / "d.csv"), "--no-cache"])
    js, cs = cli.read_table(tmp_path / "d.json"), cli.read_table(tmp_path / "d.csv")
    assert js == cs
    assert json.loads((tmp_path / "d.json").read_text())["columns"][0] == "a"


def test_deterministic_output(tmp_path):
    for name in ("x", "y"):
        cli.main(DETS + ["--out", str(tmp_path / f"{name}.csv"), "--no-cache", "--workers", "3"])
    assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()


def test_dets_cache_reuse_and_rejection(tmp_path, capsys):
    args = DETS + ["--cache", str(tmp_path)]
    run(args, capsys)
    files = list(tmp_path.glob("dets-cos-*.json"))
    assert len(files) == 1
    first = run(args, capsys)[1]
    assert first == run(DETS + ["--no-cache"], capsys)[1]
    doc = json.loads(files[0].read_text())
    doc["version"] = 99
    files[0].write_text(json.dumps(doc))
    code, _, err = run(args, capsys)
    assert code != 0 and "schema version" in err


def test_cache_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FOURIERDIRAC_CACHE_DIR", str(tmp_path))
    run(["dets", "--a", "0.5"], capsys)
    assert list(tmp_path.glob("dets-*.json"))


def test_config_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# sweep settings\nkind = sin\na = 0.7\nno_cache = true\n")
    _, from_file, _ = run(["mu", "--config", str(conf)], capsys)
    _, from_flag, _ = run(["mu", "--config", str(conf), "--kind", "cos"], capsys)
    _, direct, _ = run(["mu", "--a", "0.7", "--kind", "cos", "--no-cache"], capsys)
    assert from_flag == direct and from_file != from_flag
    sin_mu = float(from_file.splitlines()[1].split(",")[2])
    cos_mu = float(direct.splitlines()[1].split(",")[2])
    assert sin_mu < cos_mu
    conf.write_text("colour = blue\n")
    code, _, err = run(["mu", "--config", str(conf)], capsys)
    assert code != 0 and "unknown key" in err


def test_phi_and_mu(capsys):
    code, out, _ = run(["phi", "--a", "0.5", "--points", "5", "--format", "json", "--no-cache"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 5
    assert doc["rows"][-1]["g_plus"] == pytest.approx(doc["endpoint_plus"], rel=1e-12)
    code, out, _ = run(["mu", "--a-min", "0.001", "--a-max", "0.002", "--steps", "2", "--no-cache"], capsys)
    assert float(out.splitlines()[1].split(",")[3]) == pytest.approx(4.0, rel=1e-3)


def test_scatter_headline_grid(seeded_cache, capsys):
    args = ["scatter", "--kind", "cos", "--gamma-max", "5", "--dgamma", "0.5", "--branch", "A",
            "--cache", seeded_cache, "--strict"]
    code, out, _ = run(args, capsys)
    rows = [r.split(",") for r in out.splitlines()]
    assert rows[0] == ["gamma", "branch", "re_s", "im_s", "abs_s", "arg_s", "arg_ref", "phase_error", "flag"]
    assert code == 0 and len(rows) == 11
    assert all(float(r[7]) < 1e-2 and r[8] == "ok" for r in rows[1:])
    assert run(args, capsys)[1] == out


def test_scatter_branch_offset_and_sine_reference(seeded_cache, capsys):
    _, out, _ = run(["scatter", "--gamma", "1.5", "--cache", seeded_cache], capsys)
    a, b = out.splitlines()[1:]
    diff = float(a.split(",")[5]) - float(b.split(",")[5])
    assert abs(abs(diff) - math.pi) < 1e-2
    _, out, _ = run(["scatter", "--kind", "sin", "--gamma", "1.5", "--branch", "A", "--format", "json",
                     "--cache", seeded_cache], capsys)
    doc = json.loads(out)
    assert doc["reference"] == "chi_-"
    assert doc["rows"][0]["arg_ref"] == pytest.approx(np.angle(chi_minus(1.5)), abs=1e-14)


def test_scatter_strict_failure(seeded_cache, capsys):
    code, out, _ = run(["scatter", "--gamma", "0.5", "--tolerance", "1e-12", "--strict", "--cache", seeded_cache],
                       capsys)
    assert code == 1 and "phase" in out
    code, _, _ = run(["scatter", "--gamma", "0.5", "--tolerance", "1e-12", "--cache", seeded_cache], capsys)
    assert code == 0


def test_jost_command(seeded_cache, capsys):
    code, out, _ = run(["jost", "--gamma", "1", "--u-probe", "-16", "--strict", "--cache", seeded_cache], capsys)
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(row["ode_residual"]) < 1e-4
    code, _, _ = run(["jost", "--kind", "sin", "--gamma", "1", "--cache", seeded_cache], capsys)
    assert code != 0


def test_potentials_and_zeros(capsys):
    code, out, _ = run(["potentials", "--u-min", "-1", "--u-max", "0", "--du", "0.05", "--no-cache"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == ",".join(cli.POTENTIAL_COLUMNS) and len(lines) == 22
    code, out, _ = run(["zeros", "--gamma-max", "25", "--format", "json", "--no-cache"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["count"] == len(doc["rows"]) == 2
    assert doc["rows"][0]["gamma"] == pytest.approx(19.1007, abs=1e-4)


def test_asymfit_command(capsys):
    code, out, _ = run(["asymfit", "--kind", "cos", "--strict", "--format", "json", "--no-cache"], capsys)
    doc = json.loads(out)
    c2 = next(r for r in doc["rows"] if r["fit"] == "cos" and r["coefficient"] == "c2")
    assert code == 0 and c2["value"] == pytest.approx(-0.25, abs=5e-3)


def test_report_default_and_failure_injection(seeded_cache, tmp_path, capsys):
    code, out, _ = run(["report", "--cache", seeded_cache, "--json", str(tmp_path / "r.json")], capsys)
    doc = json.loads((tmp_path / "r.json").read_text())
    assert code == 0 and doc["pass"]
    assert len(doc["identities"]) >= 12
    entry = doc["entries"][0]
    assert set(entry) >= {"identity", "anchor", "point", "residual", "tolerance", "pass"}
    assert all(e["pass"] == (e["residual"] <= e["tolerance"]) for e in doc["entries"])
    assert out.startswith("# fourierdirac verification report")
    code, _, _ = run(["report", "--cache", seeded_cache, "--tolerance", "1e-16", "--format", "json"], capsys)
    assert code != 0


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "fourierdirac.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "fourierdirac" in out.stdout
