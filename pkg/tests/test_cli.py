import hashlib
import json
import subprocess
import sys


from spdcsim.biphoton import sigma_plus
from spdcsim.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_DOMAIN, EXIT_IO, main
from spdcsim.dispersion import CrystalConfig, omega_from_wavelength
from spdcsim.phasematch import FWHM_TO_TAU, CollectionConfig, taylor_coefficients


def record(path):
    out = {}
    for line in path.read_text().splitlines():
        k, v = (p.strip() for p in line.split("=", 1))
        out[k] = v
    return out


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def uncorrelated_fwhm_fs(L_mm=2.5, wf_um=300.0):
    crystal = CrystalConfig(L_mm * 1e-3)
    sig = sigma_plus(taylor_coefficients(crystal, omega_from_wavelength(1550e-9)), CollectionConfig(wf_um * 1e-6),
                     crystal).value
    return float(1 / sig / FWHM_TO_TAU * 1e15)


def test_analytic_point_at_unit_product(tmp_path):
    fwhm = uncorrelated_fwhm_fs()
    cfg = write(tmp_path, f"L_mm = 2.5\ntau_fwhm_fs = {fwhm!r}\nwp_um = 100\nwf_um = 300\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--backend", "analytic", "--out", str(out)]) == 0
    rec = record(out / "point_analytic.txt")
    assert abs(float(rec["r"])) <= 1e-3
    assert rec["backend"] == "analytic"


def test_numeric_point_thin_crystal_is_anticorrelated(tmp_path, capsys):
    cfg = write(tmp_path, "L_mm = 1\ntau_fwhm_fs = 50\nwp_um = 100\nwf_um = 440\n"
                          "[run]\ngrid_points = 64\nquad_order = 8\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out)]) == 0
    rec = record(out / "point_numeric.txt")
    assert float(rec["r"]) < 0
    assert 0 < float(rec["eta"]) <= 1
    assert "r = " in capsys.readouterr().out


def test_sweep_outputs_and_manifest(tmp_path):
    cfg = write(tmp_path, "mode = sweep\nL_mm = 2.5\ntau_fwhm_fs = 50\nwp_um = 100\nwf_um = 100\n"
                          "wp_count = 3\nwf_count = 3\nsweep_order = 6\nsweep_grid_points = 32\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out)]) == 0
    rows = (out / "sweep_numeric.csv").read_text().splitlines()
    assert rows[0].startswith("wp_um,wf_um,r,eta")
    assert len(rows) == 10
    manifest = json.loads((out / "manifest.json").read_text())
    names = [o["path"] for o in manifest["outputs"]]
    assert names == ["sweep_numeric.csv", "sweep_numeric.svg"]
    for entry in manifest["outputs"]:
        data = (out / entry["path"]).read_bytes()
        assert entry["bytes"] == len(data)
        assert entry["sha256"] == hashlib.sha256(data).hexdigest()
    assert manifest["config"]["mode"] == "sweep"
    assert manifest["sellmeier"]


def test_grid_mode_both_backends(tmp_path):
    cfg = write(tmp_path, "mode = grid\nbackend = both\nL_mm = 2.5\ntau_fwhm_fs = 50\nwp_um = 100\n"
                          "wf_um = 300\ngrid_points = 24\nquad_order = 6\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out)]) == 0
    for backend in ("analytic", "numeric"):
        for ext in ("csv", "bpg", "svg"):
            assert (out / f"grid_{backend}.{ext}").stat().st_size > 0


def test_recipe_mode(tmp_path):
    cfg = write(tmp_path, "mode = recipe\nL_mm = 2.5\ntau_fwhm_fs = 50\nwp_um = 100\nwf_um = 100\n"
                          "wp_count = 2\nwf_count = 2\nsweep_order = 6\nsweep_grid_points = 32\n"
                          "target_r = 0.3\ntolerance = 1.5\n")
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out)]) == 0
    rec = record(out / "recipe.txt")
    assert rec["found"] == "1"
    assert float(rec["eta"]) > 0


def test_exit_code_config(tmp_path, capsys):
    cfg = write(tmp_path, "L_mm = -1\n")
    assert main(["--config", cfg]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 1" in err and "missing required key 'wf_um'" in err


def test_exit_code_io(tmp_path):
    assert main(["--config", str(tmp_path / "missing.cfg")]) == EXIT_IO


def test_exit_code_domain(tmp_path):
    cfg = write(tmp_path, "L_mm = 1\ntau_fwhm_fs = 50\nwp_um = 100\nwf_um = 100\n"
                          "wavelength_nm = 4000\ngrid_points = 16\n")
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_DOMAIN


def test_exit_code_convergence(tmp_path):
    cfg = write(tmp_path, "L_mm = 7.5\ntau_fwhm_fs = 50\nwp_um = 25\nwf_um = 25\n"
                          "grid_points = 16\n")
    assert main(["--config", cfg, "--quad-order", "3", "--out", str(tmp_path / "o")]) == EXIT_CONVERGENCE


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spdcsim.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "--quad-order" in proc.stdout
