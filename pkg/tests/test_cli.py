import json
import subprocess
import sys

import pytest

from casimir_fluct import cli
from casimir_fluct import polarization as pol


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eta_csv(tmp_path, capsys):
    out = tmp_path / "eta.csv"
    code, _, _ = run(["eta", "--zmin", "1e-3", "--zmax", "100", "--points", "12", "--out", str(out)], capsys)
    assert code == 0
    header, cols, rows = cli.read_csv(out)
    assert cols[:3] == ["z_over_lambda", "eta_over_nalphas", "abs_error"]
    assert len(rows) == 12
    assert float(rows[-1][1]) == pytest.approx(23 / 60, rel=1e-2)
    assert float(rows[0][1]) == pytest.approx(3.2899e-3, rel=2e-2)
    man = json.loads((tmp_path / "eta.csv.manifest.json").read_text())
    # round trip: the header reconstructs the run parameters
    assert header["config"] == man["config"]
    assert header["config-sha256"] == cli.config_hash(man["config"])
    assert man["config"]["points"] == 12


def test_eta_default_points(capsys):
    code, out, _ = run(["eta", "--zmin", "1e-3", "--zmax", "1e2"], capsys)
    assert code == 0
    assert len([l for l in out.splitlines() if l and not l.startswith("#")]) == 61


@pytest.mark.parametrize(
    "argv",
    [
        ["eta", "--points", "1"],
        ["eta", "--zmin", "2", "--zmax", "1"],
        ["eta", "--bogus"],
        ["gamma", "--order", "3"],
        ["gamma", "--budget", "1000", "--points", "2"],
        ["gamma", "--threads", "0", "--points", "2"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = cli.main(argv)
        raise SystemExit(code)
    assert info.value.code == 64


def test_io_error(capsys):
    code, _, err = run(["eta", "--points", "2", "--out", "/nonexistent/dir/x.csv"], capsys)
    assert code == 74
    code, _, _ = run(["fit-asymptotes", "--input", "/nonexistent.csv", "--regime", "long"], capsys)
    assert code == 74


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["eta", "--config", str(bad)], capsys)[0] == 65
    unk = tmp_path / "unk.json"
    unk.write_text(json.dumps({"zeta": 1}))
    assert run(["eta", "--config", str(unk)], capsys)[0] == 64


def test_config_precedence(tmp_path, capsys):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"points": 3, "zmin": 0.5, "zmax": 5.0}))
    out = tmp_path / "o.csv"
    assert run(["eta", "--config", str(cfgf), "--points", "4", "--out", str(out)], capsys)[0] == 0
    header, _, rows = cli.read_csv(out)
    assert header["config"]["points"] == 4  # flag beats file
    assert header["config"]["zmin"] == 0.5  # file beats default
    assert header["config"]["tol"] == 1e-4  # default survives
    assert len(rows) == 4


def _gamma(tmp_path, name, *extra, capsys):
    out = tmp_path / name
    code, _, _ = run(["gamma", "--zmin", "10", "--zmax", "100", "--points", "4", "--budget", "2048",
                      "--replications", "4", "--seed", "7", "--target-rel-error", "0.5",
                      "--out", str(out), *extra], capsys)
    return code, out


def test_gamma_rerun_bitwise_identical(tmp_path, capsys):
    c1, a = _gamma(tmp_path, "a.csv", capsys=capsys)
    c2, b = _gamma(tmp_path, "b.csv", "--threads", "3", capsys=capsys)
    assert c1 == c2 == 0
    assert a.read_bytes() == b.read_bytes()
    man = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert man["threads"] == 3
    assert man["quad_spec"]["seed"] == 7
    assert man["double_options"] == {"reading": "projected", "weights": "derived", "coherent_factor": 1.0}


def test_gamma_numpy_backend_matches(tmp_path, capsys):
    _, a = _gamma(tmp_path, "a.csv", capsys=capsys)
    _, b = _gamma(tmp_path, "b.csv", "--backend", "numpy", capsys=capsys)
    _, _, ra = cli.read_csv(a)
    _, _, rb = cli.read_csv(b)
    for x, y in zip(ra, rb):
        assert float(x[1]) == pytest.approx(float(y[1]), rel=1e-10)


def test_gamma_flagged_exit(tmp_path, capsys):
    code, out = _gamma(tmp_path, "f.csv", "--target-rel-error", "1e-6", capsys=capsys)
    assert code == 2
    _, _, rows = cli.read_csv(out)
    assert all(r[-1] == "flagged" for r in rows)


def test_gamma_order2_and_fit(tmp_path, capsys):
    code, out = _gamma(tmp_path, "g2.csv", "--order", "2", capsys=capsys)
    assert code in (0, 2)
    code, js, _ = run(["fit-asymptotes", "--input", str(out), "--regime", "long"], capsys)
    assert code == 0
    res = json.loads(js)
    assert res["order"] == 2 and res["n_points"] == 4
    assert 0.05 < res["constant"] < 0.3


def _synthetic(path, value, zs):
    cfg = dict(cli.DEFAULTS["gamma"])
    rows = [(z, value, 0.0, 1, 1, "ok") for z in zs]
    path.write_text(cli.render_csv("gamma", cfg, ["z_over_lambda", "scaled_value", "std_error",
                                                  "n_samples", "seed", "status"], rows))


def test_fit_constant_exact(tmp_path, capsys):
    f = tmp_path / "s.csv"
    _synthetic(f, 0.42, [10, 20, 40, 80, 100])
    code, js, _ = run(["fit-asymptotes", "--input", str(f), "--regime", "long"], capsys)
    assert code == 0
    res = json.loads(js)
    assert res["constant"] == 0.42
    assert res["ci95"] == [0.42, 0.42]


def test_fit_insufficient_points(tmp_path, capsys):
    f = tmp_path / "s.csv"
    _synthetic(f, 0.5, [0.01, 0.02, 0.05])
    assert run(["fit-asymptotes", "--input", str(f), "--regime", "short"], capsys)[0] == 65


def test_fit_bad_data(tmp_path, capsys):
    f = tmp_path / "x.csv"
    f.write_text("a,b\n1,2\n")
    assert run(["fit-asymptotes", "--input", str(f), "--regime", "short"], capsys)[0] == 65


def test_verify_fast(capsys):
    code, out, _ = run(["verify", "--level", "fast"], capsys)
    assert code == 0, out
    assert "all 9 checks passed" in out


def test_verify_mutation(monkeypatch, capsys):
    orig = pol._pair_dot

    def corrupted(px, py, *a):
        v = orig(px, py, *a)
        return -v if (px, py) == (pol.Pol.TE, pol.Pol.TE) else v

    monkeypatch.setattr(pol, "_pair_dot", corrupted)
    code, out, _ = run(["verify"], capsys)
    assert code == 1
    assert "FAIL  polarization oracle" in out
    assert "failed: polarization oracle" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "casimir_fluct", "--version"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "casimir-fluct" in r.stdout
