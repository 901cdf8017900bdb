import json

import numpy as np
import pytest

from elflow import cli, constitutive, diagnostics, doi_onsager, fields, solver
from elflow.config import RunOptions, config_to_text

CLOSURE = doi_onsager.generate(doi_onsager.MaierSaupeParams())
SIMPLE = "alpha1 = 0\nalpha2 = -1\nalpha3 = 0\nalpha4 = 2\nalpha5 = 1\nalpha6 = 0\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_check_coeffs_simple_set(tmp_path, capsys):
    code = cli.main(["check-coeffs", "--coeffs", write(tmp_path, "c.txt", SIMPLE),
                     "--oracle", "--samples", "500"])
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert "admissible  yes" in out and "holds" in out and "oracle" in out


def test_check_coeffs_parodi_violation(tmp_path, capsys):
    bad = SIMPLE.replace("alpha6 = 0", "alpha6 = 1")
    assert cli.main(["check-coeffs", "--coeffs", write(tmp_path, "c.txt", bad)]) == cli.EXIT_FAIL
    assert "VIOLATED" in capsys.readouterr().out


def test_check_coeffs_usage_errors(tmp_path):
    assert cli.main(["check-coeffs", "--coeffs", str(tmp_path / "none.txt")]) == cli.EXIT_USAGE
    garbled = write(tmp_path, "g.txt", "alpha1 = zero\n")
    assert cli.main(["check-coeffs", "--coeffs", garbled]) == cli.EXIT_USAGE
    assert cli.main(["check-coeffs"]) == cli.EXIT_USAGE
    assert cli.main(["no-such-command"]) == cli.EXIT_USAGE


def test_gen_coeffs_output_checks_clean(tmp_path, capsys):
    assert cli.main(["gen-coeffs", "--eta1", "5", "--lambda", "1"]) == cli.EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("#")
    assert all(line.split("=")[1].strip() != "-0.0" for line in text.splitlines()[1:])
    assert cli.main(["check-coeffs", "--coeffs", write(tmp_path, "g.txt", text)]) == cli.EXIT_OK


def test_gen_coeffs_inadmissible_shape_factor(tmp_path, capsys):
    # a strongly elongated shape factor breaks the dissipation inequality
    cli.main(["gen-coeffs", "--eta1", "5", "--lambda", "2"])
    text = capsys.readouterr().out
    assert cli.main(["check-coeffs", "--coeffs", write(tmp_path, "g.txt", text)]) == cli.EXIT_FAIL
    assert "admissible  no" in capsys.readouterr().out


def test_verify_identities(capsys):
    assert cli.main(["verify-identities", "--samples", "2000"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and "all identities hold" in out
    assert cli.main(["verify-identities", "--samples", "0"]) == cli.EXIT_USAGE


def test_verify_identities_catches_sign_flip(monkeypatch, capsys):
    original = constitutive.sigma2_pointwise
    monkeypatch.setattr(constitutive, "sigma2_pointwise", lambda *a: -original(*a))
    assert cli.main(["verify-identities", "--samples", "2000"]) == cli.EXIT_FAIL
    assert "FAIL" in capsys.readouterr().out


def _config_file(tmp_path, t_end=0.004, dt=1e-3, initial=None):
    initial = initial or solver.InitialData("random_smooth", amplitude=0.05, seed=2)
    cfg = solver.SimConfig(fields.GridSpec(2, 16), dt, t_end, 0.1, CLOSURE, initial=initial)
    return write(tmp_path, "run.cfg", config_to_text(cfg, RunOptions(snapshot_every=2)))


def test_simulate_writes_outputs(tmp_path):
    path = _config_file(tmp_path, t_end=0.005)
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", path, "--output-dir", str(out)]) == cli.EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["diagnostics.csv", "manifest.json", "snapshot_0000000.elf",
                     "snapshot_0000002.elf", "snapshot_0000004.elf", "snapshot_0000005.elf"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["termination"] == "completed" and manifest["steps_taken"] == 5
    assert manifest["seed"] == 2 and "diagnostics.csv" in manifest["outputs"]
    grid, t, vals = fields.read_snapshot(out / "snapshot_0000005.elf")
    assert vals.shape == (5, 16, 16) and t == pytest.approx(0.005)
    assert np.all(np.isfinite(vals))
    assert len(diagnostics.read_csv(out / "diagnostics.csv")) == 6


def test_simulate_zero_duration_default_dir(tmp_path):
    path = _config_file(tmp_path, t_end=0.0)
    assert cli.main(["simulate", "--config", path]) == cli.EXIT_OK
    out = tmp_path / "output"
    assert sorted(p.name for p in out.glob("*.elf")) == ["snapshot_0000000.elf"]


def test_simulate_bad_config(tmp_path):
    bad = write(tmp_path, "bad.cfg", "dim = 2\nn = 16\n")
    assert cli.main(["simulate", "--config", bad]) == cli.EXIT_USAGE
    assert cli.main(["simulate", "--config", str(tmp_path / "absent.cfg")]) == cli.EXIT_USAGE


def test_simulate_instability_exit_code(tmp_path):
    probe = solver.SimConfig(fields.GridSpec(2, 16), 1e-3, 1.0, 0.1, CLOSURE)
    dt = probe.max_stable_dt(0.0)
    path = _config_file(tmp_path, t_end=1.0, dt=dt,
                        initial=solver.InitialData("random_smooth", amplitude=200.0, seed=3))
    out = tmp_path / "out"
    with pytest.warns(solver.StabilityWarning), np.errstate(over="ignore", invalid="ignore"):
        code = cli.main(["simulate", "--config", path, "--output-dir", str(out)])
    assert code == cli.EXIT_UNSTABLE
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["termination"].startswith("instability")


def test_energy_report(tmp_path, capsys):
    path = _config_file(tmp_path, t_end=0.005)
    out = tmp_path / "out"
    cli.main(["simulate", "--config", path, "--output-dir", str(out)])
    capsys.readouterr()
    assert cli.main(["energy-report", "--csv", str(out / "diagnostics.csv")]) == cli.EXIT_OK
    report = capsys.readouterr().out
    assert "rows                  6" in report and "Es monotone           yes" in report


def test_energy_report_bad_input(tmp_path):
    assert cli.main(["energy-report", "--csv", str(tmp_path / "none.csv")]) == cli.EXIT_USAGE
    corrupt = write(tmp_path, "c.csv", "t,E\n1,2\n")
    assert cli.main(["energy-report", "--csv", corrupt]) == cli.EXIT_USAGE


def test_version(capsys):
    assert cli.main(["--version"]) == 0
    assert "elflow" in capsys.readouterr().out
