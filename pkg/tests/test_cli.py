import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from floqlab.cli import fmt, main
from floqlab.config import Grid, RunConfig
from floqlab.errors import ConfigError
from floqlab.floquet import fold

DEMOS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(tmp_path, command, doc, *extra):
    cfg = write(tmp_path, doc)
    out = tmp_path / f"{command}.out"
    code = main([command, "--config", cfg, "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def by_f(table, key):
    out = {}
    for r in table:
        out.setdefault(float(r["f_over_omega"]), []).append(float(r[key]))
    return out


# -- formatting and configuration ------------------------------------------------


def test_number_format():
    assert fmt(-0.0) == "0"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(np.int64(7)) == "7"
    assert fmt(1e-20) == "1e-20"


def test_config_round_trip():
    cfg = RunConfig.load(DEMOS / "dimer_sweep.json")
    again = RunConfig.loads(cfg.dumps(), base_dir=cfg.base_dir)
    assert again == cfg
    assert again.dumps() == cfg.dumps()


@pytest.mark.parametrize("doc", [
    {"model": {"builtin": "dimer"}, "sweep": {"probe": {"start": -1, "stop": 1, "count": 0}}},
    {"model": {"builtin": "dimer"}, "sweep": {"drive": {"start": 1, "stop": 0, "count": 3}}},
    {"model": {"builtin": "hexagon"}},
    {"model": {"builtin": "tls", "path": "x.json"}},
    {"model": {"builtin": "tls"}, "colour": "blue"},
    {"model": {"builtin": "tls"}, "response": {"populations": {"source": "explicit", "values": [0.7, 0.7]}}},
    {"model": {"builtin": "tls"}, "response": {"bands": [15], "m_cutoff": 10}},
    {"model": {"builtin": "tls"}, "outputs": ["plots"]},
])
def test_invalid_configs(doc):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(doc)


def test_grid_values():
    assert np.allclose(Grid(0.0, 3.0, 301).values()[240], 2.4)
    assert list(Grid(0.5, 0.5, 1).values()) == [0.5]


# -- commands --------------------------------------------------------------------


def test_tls_gap_minimum_near_first_crossing(tmp_path):
    doc = {"model": {"builtin": "tls", "params": {"h_x": 0.05}},
           "sweep": {"drive": {"start": 2.3, "stop": 2.5, "count": 21}}}
    code, text = run(tmp_path, "quasienergies", doc)
    assert code == 0
    eps = by_f(rows(text), "eps_over_omega")
    fs = sorted(eps)
    gaps = [abs(fold(eps[f][1] - eps[f][0], 1.0)) for f in fs]
    assert abs(fs[int(np.argmin(gaps))] - 2.40) <= 0.01


def test_single_point_static_run(tmp_path):
    doc = {"model": {"builtin": "benzene"}, "sweep": {"drive": {"start": 0, "stop": 0, "count": 1}}}
    code, text = run(tmp_path, "quasienergies", doc)
    assert code == 0
    table = rows(text)
    assert [r["branch"] for r in table] == [str(i) for i in range(7)]
    ring = 0.45 + 0.1 * np.cos(2 * np.pi * np.arange(6) / 6)
    expected = np.sort(fold(np.append(ring, 0.0), 1.0))
    assert np.allclose(sorted(float(r["eps_over_omega"]) for r in table), expected, atol=1e-10)


def test_dimer_spectrum_symmetric_per_row(tmp_path):
    doc = {"model": {"builtin": "dimer"}, "sweep": {"drive": {"start": 0, "stop": 3, "count": 7}}}
    code, text = run(tmp_path, "quasienergies", doc)
    assert code == 0
    for f, e in by_f(rows(text), "eps_over_omega").items():
        e = np.array(e)
        d = np.abs(fold(e[:, None] + e[None, :], 1.0))
        assert np.max(np.min(d, axis=1)) < 1e-8


def test_benzene_band_one_plane_vanishes(tmp_path):
    doc = {"model": {"builtin": "benzene"},
           "response": {"bands": [0, 1], "populations": {"source": "state", "index": 0}},
           "sweep": {"drive": {"start": 0.5, "stop": 1.5, "count": 3},
                     "probe": {"start": -0.5, "stop": 0.5, "count": 101}}}
    code, text = run(tmp_path, "susceptibility", doc)
    assert code == 0
    table = rows(text)
    assert list(table[0]) == ["f_over_omega", "omega_p_over_omega", "band", "re_chi", "im_chi",
                              "abs_chi", "log10_abs_chi"]
    assert [r["band"] for r in table[:4]] == ["0", "1", "0", "1"]
    band0 = max(float(r["abs_chi"]) for r in table if r["band"] == "0")
    band1 = max(float(r["abs_chi"]) for r in table if r["band"] == "1")
    assert band0 > 0 and band1 < 1e-10 * band0
    assert all(float(r["log10_abs_chi"]) >= -300 for r in table)


def test_zero_size_probe_grid_is_a_config_error(tmp_path, capsys):
    doc = {"model": {"builtin": "dimer"}, "sweep": {"probe": {"start": -1, "stop": 1, "count": 0}}}
    code, _ = run(tmp_path, "susceptibility", doc)
    assert code == 2
    assert "sweep.probe" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["quasienergies", "--config", str(tmp_path / "none.json")]) == 2


def test_solver_error_exit_code(tmp_path, capsys):
    doc = {"model": {"builtin": "benzene"}, "solver": {"time_steps": 16, "time_samples": 8},
           "sweep": {"drive": {"start": 3.0, "stop": 3.0, "count": 1}}}
    code, _ = run(tmp_path, "quasienergies", doc)
    assert code == 3
    assert "f = 3" in capsys.readouterr().err


def test_report_examples(tmp_path):
    code, text = run(tmp_path, "symmetry-report", {"model": {"builtin": "benzene"}, "n_range": 6})
    assert code == 0
    (rs,) = json.loads(text)["points"][0]["symmetries"]
    assert rs["kind"] == "RS" and rs["verified"]
    assert rs["predicted_vanishing_bands"] == [-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]
    assert rs["validation"]["all_dark"]

    code, text = run(tmp_path, "symmetry-report", {"model": {"builtin": "dimer"}})
    phs = [s for s in json.loads(text)["points"][0]["symmetries"] if s["kind"] == "PHS"][0]
    assert phs["verified"] and len(phs["state_labels"]["pairs"]) == 2
    assert len(phs["predicted_dark"]) == 4 * 21 and phs["validation"]["all_dark"]

    doc = {"model": {"builtin": "tls", "params": {"h_x": 0.0, "f_drive": 1.0}}, "n_range": 3}
    code, text = run(tmp_path, "symmetry-report", doc)
    point = json.loads(text)["points"][0]
    assert sum(s["kind"] == "PHS" and s["verified"] for s in point["symmetries"]) == 2
    (sit,) = point["transparency"]
    assert sit["applicable"] and sit["all_bands_suppressed"]


def tls_with_bad_phs(h_x=0.0):
    # i sigma_y is a PHS operator of the h_x = 0 TLS, but (i sigma_y)* (i sigma_y) = -1
    zero = [[0, 0], [0, 0]]
    return {
        "dim": 2,
        "omega": 1.0,
        "fourier": [{"k": 0, "re": [[0, 0.5 * h_x], [0.5 * h_x, 0]], "im": zero},
                    {"k": 1, "re": [[0.25, 0], [0, -0.25]], "im": zero}],
        "probe": {"re": [[0, 1], [1, 0]], "im": zero},
        "symmetries": [{"kind": "PHS", "operator": {"re": [[0, 1], [-1, 0]], "im": zero},
                        "t_shift_over_tau": 0.0, "alpha_v": -1}],
    }


def test_strict_mode_turns_inapplicable_rules_into_errors(tmp_path, capsys):
    write(tmp_path, tls_with_bad_phs(), "model.json")
    doc = {"model": {"path": "model.json"}, "n_range": 2}
    code, text = run(tmp_path, "symmetry-report", doc)
    assert code == 0
    (phs,) = json.loads(text)["points"][0]["symmetries"]
    assert phs["verified"] and "dark_rule_inapplicable" in phs["notes"]
    code, _ = run(tmp_path, "symmetry-report", doc, "--strict")
    assert code == 4
    assert "P* P" in capsys.readouterr().err


def test_custom_model_drive_scaling(tmp_path):
    write(tmp_path, tls_with_bad_phs(0.05), "model.json")
    doc = {"model": {"path": "model.json"}, "sweep": {"drive": {"start": 0.5, "stop": 2.0, "count": 4}}}
    code, custom = run(tmp_path, "quasienergies", doc)
    assert code == 0
    doc = {"model": {"builtin": "tls", "params": {"h_x": 0.05}},
           "sweep": {"drive": {"start": 0.5, "stop": 2.0, "count": 4}}}
    _, builtin = run(tmp_path, "quasienergies", doc)
    a = [float(r["eps_over_omega"]) for r in rows(custom)]
    b = [float(r["eps_over_omega"]) for r in rows(builtin)]
    assert np.allclose(a, b, atol=1e-10)


def test_dimer_dark_scan(tmp_path):
    doc = {"model": {"builtin": "dimer"}, "sweep": {"drive": {"start": 0.5, "stop": 2.5, "count": 3}},
           "n_range": 4}
    code, text = run(tmp_path, "dark-scan", doc)
    assert code == 0
    table = rows(text)
    assert list(table[0]) == ["f_over_omega", "mu", "nu", "n", "abs_v_over_max"]
    assert len(table) == 3 * 16 * 9
    pairs = {("0", "3"), ("3", "0"), ("1", "2"), ("2", "1")}
    for r in table:
        if (r["mu"], r["nu"]) in pairs:
            assert float(r["abs_v_over_max"]) < 1e-8


def test_static_dark_scan(tmp_path):
    doc = {"model": {"builtin": "tls", "params": {"h_x": 0.05, "f_drive": 0.0}}, "n_range": 3}
    code, text = run(tmp_path, "dark-scan", doc)
    for r in rows(text):
        if r["n"] != "0":
            assert float(r["abs_v_over_max"]) < 1e-12


def test_dipoles_columns(tmp_path):
    code, text = run(tmp_path, "dipoles", {"model": {"builtin": "tls"}, "n_range": 2})
    table = rows(text)
    assert list(table[0]) == ["f_over_omega", "mu", "nu", "n", "re_v", "im_v", "abs_v"]
    for r in table:
        assert np.isclose(np.hypot(float(r["re_v"]), float(r["im_v"])), float(r["abs_v"]))


def test_output_independent_of_worker_count(tmp_path):
    doc = {"model": {"builtin": "dimer"}, "sweep": {"drive": {"start": 0, "stop": 3, "count": 9},
                                                     "probe": {"start": -0.5, "stop": 0.5, "count": 21}}}
    texts = []
    for workers in ("1", "3", "1"):
        code, text = run(tmp_path, "susceptibility", doc, "--workers", workers, "--seed", "17")
        assert code == 0
        texts.append(text)
    assert texts[0] == texts[1] == texts[2]
    assert "\r" not in texts[0]


def test_run_writes_every_output(tmp_path):
    doc = {"model": {"builtin": "dimer"}, "sweep": {"drive": {"start": 0.5, "stop": 1.0, "count": 2},
                                                     "probe": {"start": -0.5, "stop": 0.5, "count": 11}},
           "outputs": ["quasienergies", "susceptibility", "dipoles", "symmetry_report", "dark_scan"],
           "n_range": 2}
    cfg = write(tmp_path, doc)
    out = tmp_path / "results"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "dark_scan.csv", "dipoles.csv", "quasienergies.csv", "susceptibility.csv", "symmetry_report.json"]
    single = tmp_path / "q.csv"
    main(["quasienergies", "--config", cfg, "--out", str(single)])
    assert (out / "quasienergies.csv").read_text() == single.read_text()


def test_run_needs_output_directory(tmp_path):
    assert main(["run", "--config", write(tmp_path, {"model": {"builtin": "tls"}})]) == 2


def test_console_script_writes_stdout(tmp_path):
    cfg = write(tmp_path, {"model": {"builtin": "tls"}})
    proc = subprocess.run([sys.executable, "-m", "floqlab.cli", "quasienergies", "--config", cfg],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "f_over_omega,branch,eps_over_omega"
    assert len(proc.stdout.splitlines()) == 3
