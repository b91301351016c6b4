import csv
import io
import json

import numpy as np
import pytest

from mu2amp import cli
from mu2amp.channels import linear_amp_channel
from mu2amp.fock import DensityOperator


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_design_rows(capsys):
    code, out, _ = run(capsys, "design", "--mu2", "0,0.5,1", "--gain", "9")
    assert code == 0
    assert out.startswith("# mu2amp design ")
    rows = parse_csv(out)
    assert [round(float(r["g1"]), 3) for r in rows] == [9.0, 1.406, 1.0]
    assert rows[2]["alpha_tilde_n1"] == "-"


def test_precision_and_format(capsys):
    _, out, _ = run(capsys, "design", "--mu2", "0.5", "--gain", "9", "--precision", "4")
    assert parse_csv(out)[0]["g2"] == "6.403"
    _, js, _ = run(capsys, "design", "--mu2", "0.5", "--gain", "9", "--format", "json")
    doc = json.loads(js)
    _, out, _ = run(capsys, "design", "--mu2", "0.5", "--gain", "9")
    row = parse_csv(out)[0]
    for name, value in zip(doc["columns"], doc["rows"][0]):
        assert str(value) == row[name] or (value is None and row[name] == "-")


def test_usage_errors(capsys):
    assert run(capsys, "design", "--gain", "9")[0] == 1
    assert run(capsys, "sweep", "--mu2", "0", "--gain", "9", "--metric", "nope")[0] == 1
    assert run(capsys, "nosuch")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "table1", "--gain", "x")[0] == 1
    # unphysical spec
    assert run(capsys, "sweep", "--mu2", "2", "--gain", "9", "--nbar", "0")[0] == 1


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nmu2 = 0.5\ngain=9\nalpha-max = 0.2\nsteps=3\n")
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--steps", "5")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 5 and float(rows[-1]["alpha"]) == 0.2
    cfg.write_text("mu2=0.5\ngain=9\nbogus=1\n")
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 1 and "bogus" in err


def test_sweep_markers_and_bump(capsys):
    _, out, _ = run(capsys, "sweep", "--mu2", "0", "--gain", "9", "--alpha-max", "0.3", "--steps", "3001")
    rows = parse_csv(out)
    vals = np.array([float(r["pfp"]) for r in rows])
    a = np.array([float(r["alpha"]) for r in rows])
    assert vals.max() == pytest.approx(1.4536823, abs=1e-6)
    assert a[vals.argmax()] == pytest.approx(0.1097, abs=1e-4)
    assert rows[0]["alpha_bump"] == "0.109747733"


def test_sweep_ideal_flat(capsys):
    for metric in ("pfp", "pfp-exact"):
        _, out, _ = run(capsys, "sweep", "--metric", metric, "--mu2", "1", "--gain", "9", "--steps", "11", "--alpha-max", "3")
        assert {r[metric.replace("-", "_")] for r in parse_csv(out)} == {"1.0"}


def test_sweep_n2_below_one(capsys):
    _, out, _ = run(capsys, "sweep", "--mu2", "0.5", "--gain", "9", "--ncut", "2", "--steps", "301", "--alpha-max", "3")
    rows = parse_csv(out)
    assert max(float(r["pfp"]) for r in rows) <= 1 + 1e-9
    assert "alpha_bump" not in rows[0]


def test_contour(capsys):
    _, out, _ = run(capsys, "contour", "--mu2-values", "1,0.5", "--gain2-values", "2,50")
    rows = parse_csv(out)
    assert [r["pfp_region"] for r in rows[:2]] == ["1.0", "1.0"]
    assert rows[2]["regime"] == "Boundary"


def test_qgrid_and_determinism(tmp_path, capsys, monkeypatch):
    args = ["qgrid", "--mu2", "0", "--gain", "9", "--alpha", "0.11", "--grid=-3,3,-3,3,41,41"]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("MU2AMP_THREADS", "1")
    assert cli.main(args + ["--output", str(p1)]) == 0
    monkeypatch.setenv("MU2AMP_THREADS", "8")
    assert cli.main(args + ["--output", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()
    text = p1.read_text()
    assert "target_re=0.99" in text
    assert len(parse_csv(text)) == 41 * 41


def test_snr_modes(capsys):
    _, out, _ = run(capsys, "snr", "--mu2", "0.5", "--gain", "9", "--steps", "5")
    rows = parse_csv(out)
    assert float(rows[0]["snr_x1"]) == 0.0
    assert all(float(r["sqrtp_snr_x1"]) <= float(r["snr_in"]) + 1e-9 for r in rows)
    _, out, _ = run(capsys, "snr", "--mode", "number", "--mu2", "0.5", "--gain", "9", "--steps", "5")
    assert "sqrtp_snr_n" in parse_csv(out)[0]


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert "FAIL" not in out and "margin=" in out


def test_verify_detects_fault(capsys):
    def perturbed(rho, g, nbar=0.0, out_cutoff=None, **kw):
        out = linear_amp_channel(rho, g, nbar, out_cutoff)
        # mix in 1e-4 of vacuum: still a valid state, 1e-4 away in trace distance
        m = (1 - 1e-4) * np.array(out.matrix)
        m[0, 0] += 1e-4
        return DensityOperator(m)

    code = cli.main(["verify"], channel=perturbed)
    out = capsys.readouterr().out
    assert code == 3
    assert "FAIL" in out


def test_verify_small_cutoff(capsys):
    code, _, err = run(capsys, "verify", "--cutoff", "3")
    assert code == 2
    assert "cutoff" in err
