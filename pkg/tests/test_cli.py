from __future__ import annotations

import json
import math

import pytest

from kolwave.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_roots_discrete_two_negative(tmp_path):
    code = run(tmp_path, "roots", "--gamma", "9", "--tau", "3",
               "--kernel", "discrete", "--c", "1e6")
    assert code == 0
    doc = json.loads((tmp_path / "roots.json").read_text())
    assert doc["real_negative_count"] == 2
    assert doc["critical_delays"]["discrete"] == pytest.approx(10.0 / math.e)
    assert (tmp_path / "roots.csv").exists()
    assert (tmp_path / "roots.manifest.json").exists()


def test_roots_weak_focus(tmp_path):
    code = run(tmp_path, "roots", "--gamma", "40", "--tau", "11",
               "--kernel", "weak", "--c", "1e6")
    assert code == 0
    doc = json.loads((tmp_path / "roots.json").read_text())
    assert doc["class"] == "focus"


def test_malformed_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = run(tmp_path, "iterate", "--json", str(bad))
    assert code == 2
    assert (tmp_path / "iterate.manifest.json").exists()  # manifest even on failure


def test_heteroclinic_outputs(tmp_path):
    code = run(tmp_path, "heteroclinic", "--gamma", "40", "--tau", "10")
    assert code == 0
    doc = json.loads((tmp_path / "phi.json").read_text())
    assert doc["shape"] == "non-monotone-non-oscillating"
    assert doc["phi_max"] > 1.0
    svg = (tmp_path / "phi.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg
    assert (tmp_path / "psi.csv").exists()


def test_limit_profile_outputs(tmp_path):
    code = run(tmp_path, "limit-profile", "--gamma", "9", "--tau", "3")
    assert code == 0
    doc = json.loads((tmp_path / "phi.json").read_text())
    assert doc["shape"] == "non-monotone-non-oscillating"
    header = (tmp_path / "phi.csv").read_text().splitlines()[0]
    assert header == "t,phi"


def test_overshoot_and_test_function(tmp_path):
    assert run(tmp_path, "overshoot", "--gamma", "9", "--tau", "3") == 0
    doc = json.loads((tmp_path / "overshoot.json").read_text())
    assert doc["value"] > 1.0
    assert run(tmp_path, "test-function", "--gamma", "40", "--tau", "10",
               "--a", "0.12") == 0
    doc = json.loads((tmp_path / "test-function.json").read_text())
    assert doc["holds"] is True


def test_overshoot_gamma_zero_exit_code(tmp_path):
    code = run(tmp_path, "overshoot", "--gamma", "0", "--tau", "1")
    assert code == 2


def test_iterate_preset_kpp(tmp_path):
    code = run(tmp_path, "iterate", "--preset", "kpp", "--c", "2.5",
               "--dt", "0.02")
    assert code == 0
    doc = json.loads((tmp_path / "front.json").read_text())
    assert doc["converged"] is True
    assert doc["residual"] < 1e-4
    assert doc["bound"]["U"] == 1.0


def test_iterate_subcritical_exits_2(tmp_path):
    code = run(tmp_path, "iterate", "--preset", "kpp", "--c", "1.0")
    assert code == 2


def test_iterate_with_config_json(tmp_path):
    from kolwave.models import GrowthModel, Kernel, WaveParams
    from kolwave.semiwavefront import config_to_json, default_config

    params = WaveParams(GrowthModel.kpp(), Kernel.dirac(), 2.5)
    config, _ = default_config(params, dt=0.05, tol=1e-8)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config_to_json(config)))
    code = run(tmp_path, "iterate", "--preset", "kpp", "--c", "2.5",
               "--config", str(cfg_path))
    assert code == 0
    doc = json.loads((tmp_path / "front.json").read_text())
    assert doc["converged"] is True
    assert doc["b"] == pytest.approx(config.b)


def test_check_asymptotics(tmp_path):
    code = run(tmp_path, "check-asymptotics", "--preset", "kpp", "--c", "2.5",
               "--dt", "0.02")
    assert code == 0
    doc = json.loads((tmp_path / "asymptotics.json").read_text())
    assert doc["rel_err_minus"] < 0.05
    assert doc["rel_err_plus"] < 0.10


def test_region_overshoot_curve(tmp_path):
    code = run(tmp_path, "region", "overshoot", "--gamma", "6:10:2")
    assert code == 0
    lines = (tmp_path / "region-overshoot.csv").read_text().splitlines()
    assert lines[0] == "gamma,tau_lower,tau_upper"
    assert len(lines) == 4


def test_iterate_with_kernel_table_file(tmp_path):
    import numpy as np

    s = np.linspace(-0.5, 2.1, 131)
    dens = np.exp(-((s - 0.8) ** 2) / 0.18)
    table = tmp_path / "kernel.json"
    table.write_text(json.dumps({"s": list(s), "density": list(dens)}))
    code = run(tmp_path, "iterate", "--model", "food", "--gamma", "1",
               "--kernel", f"table:{table}", "--c", "2.5")
    assert code == 0
    doc = json.loads((tmp_path / "front.json").read_text())
    assert doc["converged"] is True


def test_region_tau_star_with_jobs(tmp_path):
    code = run(tmp_path, "region", "tau-star", "--gamma", "30:40:10",
               "--tol", "0.1", "--jobs", "2")
    assert code == 0
    rows = (tmp_path / "region-tau-star.csv").read_text().splitlines()
    assert rows[0] == "gamma,tau_sharp,tau_star,tau_upper"
    star = [float(r.split(",")[2]) for r in rows[1:]]
    upper = [float(r.split(",")[3]) for r in rows[1:]]
    assert all(s < u for s, u in zip(star, upper))


def test_outputs_are_byte_reproducible(tmp_path):
    d1 = tmp_path / "r1"
    d2 = tmp_path / "r2"
    for d in (d1, d2):
        assert main(["limit-profile", "--gamma", "9", "--tau", "3",
                     "--out", str(d)]) == 0
        assert main(["roots", "--gamma", "9", "--tau", "3", "--kernel",
                     "discrete", "--out", str(d)]) == 0
    for name in ("phi.csv", "phi.json", "phi.svg", "roots.csv", "roots.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_env_var_sets_default_tolerance(tmp_path, monkeypatch):
    monkeypatch.setenv("KW_SEED_TOL", "not-a-number")
    assert run(tmp_path, "limit-profile", "--gamma", "9", "--tau", "0.5") == 2
    monkeypatch.setenv("KW_SEED_TOL", "1e-8")
    assert run(tmp_path, "limit-profile", "--gamma", "9", "--tau", "0.5") == 0


def test_weak_and_finite_profile_commands(tmp_path):
    d1 = tmp_path / "w"
    assert main(["weak-profile", "--gamma", "40", "--tau", "10", "--eps", "0.02",
                 "--out", str(d1)]) == 0
    doc = json.loads((d1 / "phi.json").read_text())
    assert doc["shape"] == "non-monotone-non-oscillating"
    d2 = tmp_path / "f"
    assert main(["finite-profile", "--gamma", "9", "--tau", "3", "--eps", "0.02",
                 "--out", str(d2)]) == 0
    doc = json.loads((d2 / "phi.json").read_text())
    assert doc["sup"] > 1.0
