import json

import pytest

from kgm.cli import main
from kgm.config import (
    SECTION_TYPES,
    SolveConfig,
    SweepConfig,
    ZeroMassConfig,
    parse_ini,
    parse_range,
    serialize_ini,
)
from kgm.errors import ConfigError


def test_parse_range_inclusive():
    vals = parse_range("2.05:3.95:0.05")
    assert len(vals) == 39
    assert vals[0] == pytest.approx(2.05)
    assert vals[-1] == pytest.approx(3.95)
    assert len(parse_range("0.05:1.0:0.05")) == 20


def test_config_roundtrip_all_sections():
    configs = {name: cls() for name, cls in SECTION_TYPES.items()}
    configs["solve"] = SolveConfig(p=3.0, omega=0.5, n=123, force=True)
    configs["zero-mass"] = ZeroMassConfig(steps=3, eps0=0.25)
    text = serialize_ini(configs)
    parsed = parse_ini(text)
    assert parsed == configs


def test_config_validation_names_field():
    with pytest.raises(ConfigError, match="^p:"):
        SolveConfig(omega=0.5).validate()
    with pytest.raises(ConfigError, match="^omega:"):
        SolveConfig(p=3.0).validate()
    with pytest.raises(ConfigError, match="^q:"):
        ZeroMassConfig(q=5.5).validate()
    with pytest.raises(ConfigError, match="^p_range:"):
        SweepConfig(p_range="oops").validate()


def test_solve_command_writes_outputs(tmp_path):
    out = tmp_path / "run"
    code = main(
        [
            "solve", "--p", "3", "--m", "1", "--omega", "0.5", "--e", "1",
            "--n", "600", "--rmax", "30", "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "report.json").exists()
    assert (out / "profiles.csv").exists()
    assert (out / "profiles.png").exists()
    doc = json.loads((out / "report.json").read_text())
    assert doc["converged"] is True
    assert doc["residuals"]["gradient_norm"] <= 1e-6
    header = (out / "profiles.csv").read_text().splitlines()[0]
    assert header == "r,u,phi"


def test_solve_missing_required_field(capsys):
    code = main(["solve", "--omega", "0.5"])
    assert code == 1
    assert "p" in capsys.readouterr().err


def test_solve_nonexistence_gate(tmp_path, capsys):
    code = main(["solve", "--p", "6", "--m", "1", "--omega", "0.5"])
    out = capsys.readouterr().out
    assert code == 1
    assert "Nonexistence region" in out
    # --force attempts the run (and is expected to fail to converge)
    code = main(
        [
            "solve", "--p", "6", "--m", "1", "--omega", "0.5", "--force",
            "--n", "300", "--rmax", "20", "--max-iters", "400",
            "--out", str(tmp_path / "forced"), "--no-plots",
        ]
    )
    assert code in (0, 2)


def test_zero_mass_command(tmp_path):
    out = tmp_path / "zm"
    code = main(
        [
            "zero-mass", "--p", "5", "--q", "7", "--m", "1", "--e", "1",
            "--eps0", "1", "--steps", "2", "--n", "400", "--rmax", "25",
            "--out", str(out),
        ]
    )
    assert code == 0
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "parameter,energy,d12_u,d12_phi,nehari,pohozaev,fprime_mass"
    params = [float(line.split(",")[0]) for line in trace[1:]]
    assert params == [1.0, 0.5, 0.25, 0.0]
    assert (out / "final.json").exists()
    assert (out / "trace.png").exists()


def test_zero_mass_rejects_subcritical_q(capsys):
    code = main(["zero-mass", "--q", "5.5"])
    assert code == 1
    assert "q" in capsys.readouterr().err


def test_sweep_determinism_and_contents(tmp_path):
    args = ["sweep", "--p-range", "2.1:3.9:0.2", "--ratio-range", "0.1:1.0:0.1", "--no-plots"]
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    for name in ("regions.csv", "curves.csv", "g_curve.dat"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    rows = (out1 / "regions.csv").read_text().splitlines()
    assert len(rows) - 1 == len(parse_range("2.1:3.9:0.2")) * len(parse_range("0.1:1.0:0.1"))

    dat = (out1 / "g_curve.dat").read_text().splitlines()
    assert dat[0].startswith("#")
    by_p = dict(line.split() for line in dat[1:])
    assert float(by_p["3"]) == 1.0


def test_sweep_solve_sample(tmp_path):
    out = tmp_path / "sw"
    code = main(
        [
            "sweep", "--p-range", "2.5:3.5:0.5", "--ratio-range", "0.3:0.6:0.3",
            "--solve-sample", "2", "--n", "400", "--rmax", "25",
            "--out", str(out),
        ]
    )
    assert code == 0
    lines = (out / "solves.csv").read_text().splitlines()
    assert lines[0] == "p,omega_ratio,converged,gradient_norm,level"
    assert all(line.split(",")[2] == "True" for line in lines[1:])
    assert (out / "region_map.png").exists()


def test_sweep_worker_pool_matches_serial(tmp_path, monkeypatch):
    args = [
        "sweep", "--p-range", "2.5:3.5:0.5", "--ratio-range", "0.3:0.6:0.3",
        "--solve-sample", "2", "--n", "400", "--rmax", "25", "--no-plots",
    ]
    serial, pooled = tmp_path / "serial", tmp_path / "pooled"
    monkeypatch.setenv("KGM_THREADS", "1")
    assert main(args + ["--out", str(serial)]) == 0
    monkeypatch.setenv("KGM_THREADS", "2")
    assert main(args + ["--out", str(pooled)]) == 0
    assert (serial / "solves.csv").read_bytes() == (pooled / "solves.csv").read_bytes()
    assert (serial / "regions.csv").read_bytes() == (pooled / "regions.csv").read_bytes()


def test_thresholds_command(tmp_path, capsys):
    out = tmp_path / "th"
    code = main(["thresholds", "--p", "3", "--m", "1", "--omega", "0.9", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "inf K_p = 1" in text
    doc = json.loads((out / "thresholds.json").read_text())
    assert doc["inf_kp"] == pytest.approx(1.0)
    assert doc["region"] == "ExistenceThm1"
    assert (out / "certificate.png").exists()

    code = main(["thresholds", "--p", "3.5", "--m", "1", "--omega", "0.99", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "thresholds.json").read_text())
    assert doc["alpha_star"] == pytest.approx(-1.0 / 22.0)
    assert doc["certificate"]["passed"] is True

    assert main(["thresholds", "--p", "2", "--omega", "0.5"]) == 1


def test_selftest_quick_and_sabotage(capsys):
    assert main(["selftest", "--quick"]) == 0
    capsys.readouterr()
    assert main(["selftest", "--quick", "--sabotage", "ab-identity"]) == 2
    out = capsys.readouterr().out
    assert "A+B=C" in out and "FAIL" in out


def test_config_file_with_cli_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[solve]\np = 3.0\nomega = 0.5\nn = 600\nrmax = 30.0\nplots = false\n"
        f"out = {tmp_path / 'from_file'}\n"
    )
    out = tmp_path / "override"
    code = main(["--config", str(cfg), "solve", "--out", str(out), "--n", "400"])
    assert code == 0
    assert (out / "report.json").exists()
    doc = json.loads((out / "report.json").read_text())
    assert doc["grid"]["n"] == 400  # CLI override beat the file value
