import json
import math

import numpy as np
import pytest

from sphkol.cli import (
    ManifestError,
    fit_rate,
    identity_oracle_residuals,
    load_manifest,
    main,
    run_manifest,
)
from sphkol.pde_solver import TRAJECTORY_HEADER


def write_manifest(tmp_path, doc, name="manifest.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def two_jet_manifest(tmp_path, outname="out"):
    return {
        "scenario": "two_jet",
        "cfg": {"nu": 0.5, "amplitude": 1.0, "N": 8, "t_end": 0.5, "snapshot_stride": 20},
        "init": [
            {"n": 1, "m": 0, "re": 1.0, "im": 0.0},
            {"n": 1, "m": 1, "re": 0.5, "im": 0.0},
            {"n": 3, "m": 0, "re": 0.01, "im": 0.0},
        ],
        "seed": 7,
        "output_dir": str(tmp_path / outname),
    }


class TestFitRate:
    def test_exact_exponential(self):
        t = np.linspace(0.0, 2.0, 81)
        fit = fit_rate(t, np.exp(-10.0 * t), (0.0, 2.0), reference_rate=-10.0, tolerance=0.001)
        assert fit.fitted_rate == pytest.approx(-10.0, abs=1e-6)
        assert fit.r_squared > 0.999999
        assert fit.passed

    def test_zero_series_short_circuits(self):
        t = np.linspace(0.0, 1.0, 20)
        fit = fit_rate(t, np.zeros_like(t), (0.0, 1.0), reference_rate=-5.0)
        assert fit.passed and fit.fitted_rate == -5.0

    def test_negative_values_are_a_data_error(self):
        t = np.linspace(0.0, 1.0, 20)
        v = np.exp(-t)
        v[7] = -0.5
        with pytest.raises(ValueError, match="nonpositive"):
            fit_rate(t, v, (0.0, 1.0), reference_rate=-1.0)

    def test_window_needs_ten_samples(self):
        t = np.linspace(0.0, 1.0, 20)
        with pytest.raises(ValueError, match="10 samples"):
            fit_rate(t, np.exp(-t), (0.0, 0.2), reference_rate=-1.0)

    def test_poor_fit_fails(self):
        rng = np.random.default_rng(0)
        t = np.linspace(0.0, 1.0, 40)
        v = np.exp(-t) * np.exp(rng.standard_normal(40))
        fit = fit_rate(t, v, (0.0, 1.0), reference_rate=-1.0, tolerance=0.5)
        assert not fit.passed  # r^2 gate

    def test_no_reference_reports_only(self):
        t = np.linspace(0.0, 1.0, 30)
        fit = fit_rate(t, np.exp(-2.0 * t), (0.0, 1.0))
        assert fit.passed and fit.reference_rate is None
        assert fit.fitted_rate == pytest.approx(-2.0, abs=1e-9)

    def test_zonal_run_fits_viscous_rate(self, grid8):
        from sphkol.pde_solver import SolverConfig, run
        from sphkol.sht import SpectralField

        nu = 0.5
        omega0 = SpectralField.zeros(8)
        omega0[3, 0] = 0.01
        cfg = SolverConfig(nu=nu, amplitude=1.0, N=8, t_end=2.0, snapshot_stride=25)
        recs = run(omega0, cfg, grid8)
        t = np.array([r.t for r in recs])
        v = np.array([r.norm_ge3 for r in recs])
        fit = fit_rate(t, v, (1.0, 2.0), reference_rate=-10.0 * nu, tolerance=0.001)
        assert fit.passed
        assert fit.fitted_rate == pytest.approx(-5.0, rel=1e-6)


class TestManifests:
    def test_two_jet_scenario_outputs(self, tmp_path):
        doc = two_jet_manifest(tmp_path)
        code, report = run_manifest(doc)
        assert code == 0
        out = tmp_path / "out"
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == TRAJECTORY_HEADER
        eq = json.loads((out / "equilibrium.json").read_text())
        assert eq["method"] == "closed_form"
        rep = json.loads((out / "report.json").read_text())
        names = [c["name"] for c in rep["checks"]]
        assert names == ["degree1_conservation", "degree_ge3_decay", "degree2_convergence_envelope"]
        assert rep["all_pass"] is True

    def test_determinism_byte_identical(self, tmp_path):
        doc1 = two_jet_manifest(tmp_path, "out1")
        doc2 = two_jet_manifest(tmp_path, "out2")
        run_manifest(doc1)
        run_manifest(doc2)
        for name in ("trajectory.csv", "equilibrium.json", "report.json"):
            a = (tmp_path / "out1" / name).read_bytes()
            b = (tmp_path / "out2" / name).read_bytes()
            assert a == b

    def test_one_jet_scenario(self, tmp_path):
        doc = {
            "scenario": "one_jet",
            "cfg": {"nu": 0.5, "amplitude": 1.0, "N": 8, "t_end": 0.5, "snapshot_stride": 20,
                    "jet_order": "one_jet"},
            "init": [{"n": 2, "m": 0, "re": 0.01, "im": 0.0}],
            "output_dir": str(tmp_path / "oj"),
        }
        code, report = run_manifest(doc)
        assert code == 0
        names = [c["name"] for c in report["checks"]]
        assert "degree_ge2_decay" in names

    def test_rotating_scenario(self, tmp_path):
        doc = {
            "scenario": "rotating",
            "cfg": {"nu": 1.0, "amplitude": 1.0, "N": 8, "t_end": 0.25, "snapshot_stride": 16},
            "Omega": 2.0,
            "init": [
                {"n": 1, "m": 1, "re": 0.4, "im": 0.0},
                {"n": 2, "m": 2, "re": 0.2, "im": -0.1},
            ],
            "output_dir": str(tmp_path / "rot"),
        }
        code, report = run_manifest(doc)
        assert code == 0
        first = (tmp_path / "rot" / "trajectory.csv").read_text().splitlines()[0]
        assert first.startswith("# Omega=2")
        names = [c["name"] for c in report["checks"]]
        assert "degree1_phase_law" in names

    def test_reduced_only_scenario(self, tmp_path):
        alpha_coeff = 2.0 * math.sqrt(6.0 * math.pi)  # makes alpha = 1
        doc = {
            "scenario": "reduced_only",
            "cfg": {"nu": 1.0, "amplitude": 1.0, "N": 4},
            "init": [{"n": 1, "m": 1, "re": alpha_coeff, "im": 0.0}],
            "output_dir": str(tmp_path / "red"),
        }
        code, report = run_manifest(doc)
        assert code == 0
        for method in ("closed_form", "solve"):
            eq = json.loads((tmp_path / "red" / f"equilibrium_{method}.json").read_text())
            w0 = eq["omega_inf"][2]
            assert w0["re"] == pytest.approx(-0.375, abs=1e-12)
        assert report["checks"][0]["measured"] < 1e-12

    def test_identity_oracles_scenario(self, tmp_path):
        doc = {
            "scenario": "identity_oracles",
            "seed": 7,
            "lmax": 8,
            "output_dir": str(tmp_path / "orc"),
        }
        code, report = run_manifest(doc)
        assert code == 0
        residuals = json.loads((tmp_path / "orc" / "oracle_residuals.json").read_text())
        assert max(residuals.values()) < 1e-10

    def test_env_var_overrides_output_dir(self, tmp_path, monkeypatch):
        target = tmp_path / "redirected"
        monkeypatch.setenv("SPHKOL_OUT", str(target))
        doc = two_jet_manifest(tmp_path)
        code, _ = run_manifest(doc)
        assert code == 0
        assert (target / "report.json").exists()
        assert not (tmp_path / "out").exists()

    def test_bad_manifest_rejected(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(write_manifest(tmp_path, {"scenario": "nope", "output_dir": "x"}))
        with pytest.raises(ManifestError):
            run_manifest({"scenario": "two_jet", "cfg": {}, "output_dir": str(tmp_path / "bad")})


class TestMain:
    def test_run_exit_codes(self, tmp_path, capsys):
        path = write_manifest(tmp_path, two_jet_manifest(tmp_path))
        assert main(["run", str(path)]) == 0
        out = capsys.readouterr().out
        assert "[PASS] degree1_conservation" in out

    def test_run_bad_manifest_exit_2(self, tmp_path, capsys):
        path = write_manifest(tmp_path, {"scenario": "bogus"})
        assert main(["run", str(path)]) == 2

    def test_fit_subcommand(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        t = np.linspace(0.0, 2.0, 60)
        rows = ["t,norm_ge3"] + [f"{ti},{math.exp(-4.0 * ti)}" for ti in t]
        csv_path.write_text("\n".join(rows) + "\n")
        code = main([
            "fit", "--input", str(csv_path), "--column", "norm_ge3",
            "--window", "0:2", "--reference", "-4.0", "--tolerance", "0.01",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["fitted_rate"] == pytest.approx(-4.0, abs=1e-9)
        assert doc["pass"] is True

    def test_fit_missing_column_exit_2(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        csv_path.write_text("t,x\n0,1\n1,2\n")
        assert main(["fit", "--input", str(csv_path), "--column", "nope", "--window", "0:1"]) == 2

    def test_fit_rate_mismatch_exit_1(self, tmp_path, capsys):
        csv_path = tmp_path / "series.csv"
        t = np.linspace(0.0, 2.0, 40)
        rows = ["t,norm_ge3"] + [f"{ti},{math.exp(-4.0 * ti)}" for ti in t]
        csv_path.write_text("\n".join(rows) + "\n")
        code = main([
            "fit", "--input", str(csv_path), "--column", "norm_ge3",
            "--window", "0:2", "--reference", "-10.0",
        ])
        assert code == 1

    def test_init_from_field_file(self, tmp_path):
        from sphkol.sht import SpectralField

        field = SpectralField.zeros(8)
        field[1, 0] = 1.0
        field[3, 0] = 0.01
        path = tmp_path / "init.json"
        field.save(path)
        doc = {
            "scenario": "two_jet",
            "cfg": {"nu": 0.5, "amplitude": 1.0, "N": 8, "t_end": 0.25, "snapshot_stride": 20},
            "init": str(path),
            "output_dir": str(tmp_path / "file_init"),
        }
        code, report = run_manifest(doc)
        assert code == 0
        assert report["all_pass"]

    def test_equilibrium_subcommand(self, capsys):
        code = main([
            "equilibrium", "--nu", "1", "--a", "1", "--alpha-re", "1", "--alpha-im", "0", "--b", "0",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["closed_form"]["omega_inf"][2]["re"] == pytest.approx(-0.375, abs=1e-12)
        assert doc["max_difference"] < 1e-12

    def test_equilibrium_subcommand_with_rotation(self, capsys):
        code = main([
            "equilibrium", "--nu", "1", "--a", "1", "--alpha-re", "1", "--b", "0",
            "--omega", "1.5",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["closed_form"]["b"] == pytest.approx(1.0)

    def test_oracles_subcommand(self, capsys):
        assert main(["oracles", "--seed", "3", "--lmax", "6"]) == 0
        out = capsys.readouterr().out
        assert "killing_identity" in out


class TestOracleSuite:
    def test_residuals_are_tiny(self):
        residuals = identity_oracle_residuals(seed=11, lmax=10, n_triples=25, n_axes=6)
        assert max(residuals.values()) < 1e-11

    def test_lmax_floor(self):
        with pytest.raises(ValueError):
            identity_oracle_residuals(seed=0, lmax=3)
