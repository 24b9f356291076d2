"""Batch experiment runner and verification reporting.

Subcommands:
    run <manifest.json>      execute a scenario, write CSV/JSON outputs
    fit                      log-linear decay-rate fit on a trajectory column
    equilibrium              degree-2 equilibrium by both routes
    oracles                  randomized integral-identity suites

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 runtime (integration) failure.  The environment variable SPHKOL_OUT
overrides the manifest's output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pde_solver, reduced_ode, rotating
from .harmonics import build_grid, harmonic_indices, recurrence_coeff
from .operators import (
    KillingParams,
    convection,
    killing_advect,
    killing_degree2_matrix,
    killing_identity_residual,
    killing_pairing_residuals,
    laplacian,
)
from .pde_solver import IntegrationError, SolverConfig, write_trajectory_csv
from .rotating import RotatingConfig
from .serialize import dumps17
from .sht import SpectralField, analyze, random_real_field, synthesize

SCENARIOS = ("two_jet", "one_jet", "rotating", "reduced_only", "identity_oracles")


class ManifestError(ValueError):
    """The experiment manifest is malformed or inconsistent."""


@dataclass
class ExperimentManifest:
    """Validated scenario description; mirrors the manifest JSON document."""

    scenario: str
    output_dir: str
    cfg: dict
    init: object = None
    Omega: float | None = None
    seed: int = 0
    lmax: int | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentManifest":
        if doc.get("scenario") not in SCENARIOS:
            raise ManifestError(f"scenario must be one of {SCENARIOS}")
        if "output_dir" not in doc:
            raise ManifestError("manifest needs an output_dir")
        if doc["scenario"] == "rotating" and "Omega" not in doc:
            raise ManifestError("rotating scenario needs Omega")
        try:
            seed = int(doc.get("seed", 0))
        except (TypeError, ValueError) as exc:
            raise ManifestError(f"seed must be an integer: {exc}") from exc
        return cls(
            scenario=doc["scenario"],
            output_dir=str(doc["output_dir"]),
            cfg=doc.get("cfg", {}),
            init=doc.get("init"),
            Omega=None if doc.get("Omega") is None else float(doc["Omega"]),
            seed=seed,
            lmax=None if doc.get("lmax") is None else int(doc["lmax"]),
        )


@dataclass
class RateFit:
    """Least-squares exponent of log(norm) vs t over a window."""

    window: tuple[float, float]
    fitted_rate: float
    r_squared: float
    reference_rate: float | None
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "window": [self.window[0], self.window[1]],
            "fitted_rate": self.fitted_rate,
            "r_squared": self.r_squared,
            "reference_rate": self.reference_rate,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def fit_rate(times, values, window, reference_rate=None, tolerance=0.05) -> RateFit:
    """Fit values ~ exp(rate * t) over the window; pass needs rate match and r^2 >= 0.999.

    A series identically below 1e-14 short-circuits to a pass at the reference
    rate (nothing left to measure); nonpositive values above that floor are a
    data error.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    mask = (t >= lo) & (t <= hi)
    if int(mask.sum()) < 10:
        raise ValueError(f"need at least 10 samples in window [{lo}, {hi}], have {int(mask.sum())}")
    tw, vw = t[mask], v[mask]
    if np.all(np.abs(vw) < 1e-14):
        ref = 0.0 if reference_rate is None else float(reference_rate)
        return RateFit((lo, hi), ref, 1.0, reference_rate, tolerance, True)
    if np.any((vw <= 0.0) & (np.abs(vw) > 1e-14)):
        raise ValueError("nonpositive norms inside the fit window")
    keep = vw >= 1e-14
    if int(keep.sum()) < 10:
        raise ValueError("fewer than 10 usable samples above the 1e-14 floor")
    x, y = tw[keep], np.log(vw[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    if reference_rate is None:
        passed = True
    elif reference_rate == 0.0:
        passed = abs(slope) <= tolerance and r2 >= 0.999
    else:
        passed = abs(slope - reference_rate) / abs(reference_rate) <= tolerance and r2 >= 0.999
    return RateFit((lo, hi), float(slope), float(r2), reference_rate, tolerance, bool(passed))


def _parse_init(init, N: int) -> SpectralField:
    if isinstance(init, str):
        return SpectralField.load(init)
    if isinstance(init, dict) and "path" in init:
        return SpectralField.load(init["path"])
    if isinstance(init, list):
        out = SpectralField.zeros(N)
        for item in init:
            n, m = int(item["n"]), int(item["m"])
            c = complex(float(item["re"]), float(item.get("im", 0.0)))
            if m < 0:
                raise ManifestError("inline coefficients use m >= 0; negative orders are implied")
            out[n, m] = c if m > 0 else c.real
            if m > 0:
                out[n, -m] = (-1.0) ** m * np.conj(c)
        return out
    raise ManifestError("init must be an inline coefficient list or a file path")


def _solver_config(doc: dict, jet_order: str) -> SolverConfig:
    try:
        return SolverConfig(
            nu=float(doc["nu"]),
            amplitude=float(doc["amplitude"]),
            N=int(doc["N"]),
            t_end=float(doc["t_end"]),
            dt=None if doc.get("dt") is None else float(doc["dt"]),
            snapshot_stride=int(doc.get("snapshot_stride", 10)),
            jet_order=jet_order,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"bad solver configuration: {exc}") from exc


def load_manifest(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    if doc.get("scenario") not in SCENARIOS:
        raise ManifestError(f"scenario must be one of {SCENARIOS}")
    if "output_dir" not in doc:
        raise ManifestError("manifest needs an output_dir")
    return doc


def _check(name: str, measured: float, tolerance: float) -> dict:
    return {
        "name": name,
        "measured": float(measured),
        "tolerance": float(tolerance),
        "pass": bool(measured <= tolerance),
    }


def _decay_margin(records, rate: float, norm_fn) -> float:
    """max over snapshots of norm(t) / (norm(0) e^{-rate t}) - 1; 0 for an empty start."""
    n0 = norm_fn(records[0])
    if n0 < 1e-14:
        return 0.0
    worst = 0.0
    for rec in records[1:]:
        bound = n0 * math.exp(-rate * rec.t)
        if bound < 1e-300:
            continue
        worst = max(worst, norm_fn(rec) / bound - 1.0)
    return worst


def _envelope_margin(records, nu: float) -> float:
    """Degree-2 distance against the e^{-2 nu t} envelope anchored past the transient."""
    anchor = next((r for r in records if r.t >= 1.0 / nu), None)
    if anchor is None or anchor.norm_eq2_dist < 1e-12:
        return 0.0
    worst = 0.0
    for rec in records:
        if rec.t <= anchor.t:
            continue
        bound = anchor.norm_eq2_dist * math.exp(-2.0 * nu * (rec.t - anchor.t))
        worst = max(worst, rec.norm_eq2_dist / bound - 1.0)
    return worst


def _run_jet_scenario(manifest: ExperimentManifest, outdir: Path) -> tuple[list[dict], dict]:
    jet = manifest.scenario
    cfg = _solver_config(manifest.cfg, jet)
    omega0 = _parse_init(manifest.init, cfg.N)
    grid = build_grid(cfg.N)
    records = pde_solver.run(omega0, cfg, grid)
    write_trajectory_csv(records, outdir / "trajectory.csv")
    files = {"trajectory": "trajectory.csv"}

    checks = []
    drift = max(float(np.max(np.abs(rec.mode1 - records[0].mode1))) for rec in records)
    checks.append(_check("degree1_conservation", drift, 1e-9))
    if jet == "two_jet":
        checks.append(
            _check(
                "degree_ge3_decay",
                _decay_margin(records, 10.0 * cfg.nu, lambda r: r.norm_ge3),
                1e-6,
            )
        )
        checks.append(_check("degree2_convergence_envelope", _envelope_margin(records, cfg.nu), 1e-6))
        params = KillingParams.from_field(omega0)
        report = reduced_ode.equilibrium_report(params, cfg.amplitude, cfg.nu, "closed_form")
        (outdir / "equilibrium.json").write_text(dumps17(report, indent=2) + "\n")
        files["equilibrium"] = "equilibrium.json"
    else:
        checks.append(
            _check(
                "degree_ge2_decay",
                _decay_margin(
                    records,
                    4.0 * cfg.nu,
                    lambda r: math.hypot(r.norm_eq2_dist, r.norm_ge3),
                ),
                1e-6,
            )
        )
    return checks, files


def _run_rotating_scenario(manifest: ExperimentManifest, outdir: Path) -> tuple[list[dict], dict]:
    cfg = _solver_config(manifest.cfg, "two_jet")
    if manifest.Omega is None:
        raise ManifestError("rotating scenario needs Omega")
    Omega = manifest.Omega
    zeta0 = _parse_init(manifest.init, cfg.N)
    grid = build_grid(cfg.N)
    records = rotating.run_rotating(zeta0, RotatingConfig(base=cfg, Omega=Omega), grid)
    write_trajectory_csv(records, outdir / "trajectory.csv", header_comment=f"Omega={Omega:.17g}")
    files = {"trajectory": "trajectory.csv"}

    checks = []
    mode1_0 = records[0].mode1
    phase_drift = 0.0
    for rec in records:
        phases = np.exp(1j * Omega * rec.t * np.array([1.0, 0.0, -1.0]))
        phase_drift = max(phase_drift, float(np.max(np.abs(rec.mode1 - phases * mode1_0))))
    checks.append(_check("degree1_phase_law", phase_drift, 1e-9))
    checks.append(
        _check("degree_ge3_decay", _decay_margin(records, 10.0 * cfg.nu, lambda r: r.norm_ge3), 1e-6)
    )
    checks.append(_check("degree2_convergence_envelope", _envelope_margin(records, cfg.nu), 1e-6))

    params = KillingParams.from_field(zeta0)
    shifted = KillingParams(alpha=params.alpha, b=params.b + 2.0 * Omega / 3.0)
    report = reduced_ode.equilibrium_report(shifted, cfg.amplitude, cfg.nu, "closed_form")
    (outdir / "equilibrium.json").write_text(dumps17(report, indent=2) + "\n")
    files["equilibrium"] = "equilibrium.json"
    return checks, files


def _run_reduced_scenario(manifest: ExperimentManifest, outdir: Path) -> tuple[list[dict], dict]:
    try:
        nu = float(manifest.cfg["nu"])
        amplitude = float(manifest.cfg["amplitude"])
        N = int(manifest.cfg.get("N", 4))
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"reduced_only needs cfg.nu and cfg.amplitude: {exc}") from exc
    omega0 = _parse_init(manifest.init, N)
    params = KillingParams.from_field(omega0)
    files = {}
    reports = {}
    for method in ("closed_form", "solve"):
        rep = reduced_ode.equilibrium_report(params, amplitude, nu, method)
        name = f"equilibrium_{method}.json"
        (outdir / name).write_text(dumps17(rep, indent=2) + "\n")
        files[method] = name
        reports[method] = np.array(
            [complex(z["re"], z["im"]) for z in rep["omega_inf"]], dtype=complex
        )
    diff = float(np.linalg.norm(reports["closed_form"] - reports["solve"]))
    checks = [_check("equilibrium_cross_check", diff, 1e-12)]
    return checks, files


def identity_oracle_residuals(seed: int, lmax: int, n_triples: int = 100, n_axes: int = 20) -> dict:
    """Max residuals of the integral identities on seeded random data.

    Families: quadrature normalization, harmonic orthonormality, conjugation
    symmetry, the cos(theta) recurrence projections, the Laplacian
    eigenfunction roundtrip, the Killing integral identity, the stream/
    transport pairings, the degree-1 projections of convection, the
    closed-form degree-2 rotation table, and the tangent-basis identities.
    """
    if lmax < 4:
        raise ValueError("oracle suites need lmax >= 4")
    rng = np.random.default_rng(seed)
    grid = build_grid(lmax)
    res: dict[str, float] = {}

    ones = np.ones((grid.n_theta, grid.n_phi))
    res["surface_area"] = abs(float(grid.integrate(ones)) - 4.0 * math.pi) / (4.0 * math.pi)

    # orthonormality on a seeded sample of harmonic pairs
    indices = list(harmonic_indices(lmax))

    def sample_nm():
        idx = indices[int(rng.integers(0, len(indices)))]
        return idx.n, idx.m

    from .sht import synthesize_complex

    worst = 0.0
    for _ in range(60):
        n1, m1 = sample_nm()
        n2, m2 = sample_nm()
        u1 = SpectralField.zeros(lmax); u1[n1, m1] = 1.0
        u2 = SpectralField.zeros(lmax); u2[n2, m2] = 1.0
        v1 = synthesize_complex(u1, grid)
        v2 = synthesize_complex(u2, grid)
        expected = 1.0 if (n1, m1) == (n2, m2) else 0.0
        worst = max(worst, abs(complex(grid.inner(v1, v2)) - expected))
    res["orthonormality"] = worst

    worst = 0.0
    theta = grid.theta_nodes[:, None]
    phi = grid.phi_nodes[None, :]
    for _ in range(12):
        n, m = sample_nm()
        u = SpectralField.zeros(lmax); u[n, m] = 1.0
        um = SpectralField.zeros(lmax); um[n, -m] = 1.0
        v = synthesize_complex(u, grid)
        vm = synthesize_complex(um, grid)
        worst = max(worst, float(np.max(np.abs(vm - (-1.0) ** m * np.conj(v)))))
    res["conjugation"] = worst

    worst = 0.0
    cos_t = np.cos(theta) * np.ones_like(phi)
    for _ in range(30):
        n, m = sample_nm()
        if n >= lmax:
            continue
        u = SpectralField.zeros(lmax); u[n, m] = 1.0
        v = synthesize_complex(u, grid) * cos_t
        for target, coeff in ((n - 1, recurrence_coeff(n, m)), (n + 1, recurrence_coeff(n + 1, m))):
            if target < max(1, abs(m)):
                continue
            ut = SpectralField.zeros(lmax); ut[target, m] = 1.0
            proj = complex(grid.inner(v, synthesize_complex(ut, grid)))
            worst = max(worst, abs(proj - coeff))
    res["cos_theta_recurrence"] = worst

    worst = 0.0
    for _ in range(8):
        f = random_real_field(lmax, rng)
        vals = synthesize(f, grid)
        lap_grid = synthesize(laplacian(analyze(vals)), grid)
        n_arr = np.arange(lmax + 1)
        expected = synthesize(f.apply_degree_multiplier(-(n_arr * (n_arr + 1.0))), grid)
        scale = max(1.0, float(np.max(np.abs(expected.values))))
        worst = max(worst, float(np.max(np.abs(lap_grid.values - expected.values))) / scale)
    res["laplacian_eigenfunction"] = worst

    worst = 0.0
    for _ in range(n_triples):
        f = random_real_field(lmax, rng, amplitude=1.0, decay=0.6)
        g = random_real_field(lmax, rng, amplitude=1.0, decay=0.6)
        axis = rng.standard_normal(3)
        worst = max(worst, abs(killing_identity_residual(f, g, axis, grid)))
    res["killing_identity"] = worst

    worst = 0.0
    for _ in range(20):
        f = random_real_field(lmax, rng, amplitude=1.0, decay=0.6)
        axis = rng.standard_normal(3)
        r1, r2 = killing_pairing_residuals(f, axis, grid)
        worst = max(worst, abs(r1), abs(r2))
    res["killing_pairings"] = worst

    worst = 0.0
    for _ in range(10):
        f = random_real_field(lmax, rng, amplitude=1.0, decay=0.6)
        conv = convection(f, grid)
        for m in (-1, 0, 1):
            worst = max(worst, abs(conv[1, m]))
    res["convection_degree1_projection"] = worst

    worst_coeff, worst_leak = 0.0, 0.0
    for _ in range(n_axes):
        axis = rng.standard_normal(3)
        table = killing_degree2_matrix(axis)
        for col, m in enumerate(reduced_ode.MODE2_ORDER):
            u = SpectralField.zeros(lmax); u[2, m] = 1.0
            adv = killing_advect(axis, u, grid)
            worst_coeff = max(worst_coeff, float(np.max(np.abs(adv.mode2_vector() - table[:, col]))))
            leak = adv.copy()
            leak.coeffs[2] = 0.0
            worst_leak = max(worst_leak, float(np.max(np.abs(leak.coeffs))))
    res["degree2_rotation_coefficients"] = worst_coeff
    res["degree2_rotation_leakage"] = worst_leak

    e1, e2, e3 = np.eye(3)
    dtheta, dphi = grid.dtheta_x, grid.dphi_x
    xyz = grid.nodes_xyz
    sin_t = grid.sin_theta[:, None]
    cos_t2 = grid.cos_theta[:, None]
    cp = np.cos(phi)
    sp = np.sin(phi)
    pairs = [
        (np.cross(e1, xyz), -sp * np.ones_like(sin_t), -sin_t * cos_t2 * cp),
        (np.cross(e2, xyz), cp * np.ones_like(sin_t), -sin_t * cos_t2 * sp),
        (np.cross(e3, xyz), np.zeros_like(sin_t * cp), sin_t**2 * np.ones_like(cp)),
    ]
    worst = 0.0
    for field_vals, want_theta, want_phi in pairs:
        worst = max(worst, float(np.max(np.abs(np.sum(field_vals * dtheta, axis=-1) - want_theta))))
        worst = max(worst, float(np.max(np.abs(np.sum(field_vals * dphi, axis=-1) - want_phi))))
    res["tangent_basis_identities"] = worst
    return res


def _run_oracles_scenario(manifest: ExperimentManifest, outdir: Path) -> tuple[list[dict], dict]:
    lmax = manifest.lmax if manifest.lmax is not None else int(manifest.cfg.get("N", 16))
    residuals = identity_oracle_residuals(manifest.seed, lmax)
    (outdir / "oracle_residuals.json").write_text(dumps17(residuals, indent=2) + "\n")
    checks = [_check(name, value, 1e-10) for name, value in residuals.items()]
    return checks, {"residuals": "oracle_residuals.json"}


def run_manifest(manifest) -> tuple[int, dict]:
    """Execute a manifest (ExperimentManifest, dict, or path); returns (exit_code, report)."""
    if isinstance(manifest, ExperimentManifest):
        man = manifest
    else:
        doc = manifest if isinstance(manifest, dict) else load_manifest(manifest)
        man = ExperimentManifest.from_dict(doc)
    outdir = Path(os.environ.get("SPHKOL_OUT", man.output_dir))
    outdir.mkdir(parents=True, exist_ok=True)

    if man.scenario in ("two_jet", "one_jet"):
        checks, files = _run_jet_scenario(man, outdir)
    elif man.scenario == "rotating":
        checks, files = _run_rotating_scenario(man, outdir)
    elif man.scenario == "reduced_only":
        checks, files = _run_reduced_scenario(man, outdir)
    else:
        checks, files = _run_oracles_scenario(man, outdir)

    report = {
        "scenario": man.scenario,
        "seed": man.seed,
        "checks": checks,
        "files": files,
        "all_pass": all(c["pass"] for c in checks),
    }
    (outdir / "report.json").write_text(dumps17(report, indent=2) + "\n")
    return (0 if report["all_pass"] else 1), report


def _load_csv_series(path, column: str):
    times, values = [], []
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or column not in reader.fieldnames:
        raise ValueError(f"column {column!r} not present in {path}")
    for row in reader:
        times.append(float(row["t"]))
        values.append(float(row[column]))
    return np.array(times), np.array(values)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sphkol", description="spherical two-jet flow experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment manifest")
    p_run.add_argument("manifest")

    p_fit = sub.add_parser("fit", help="fit a decay rate on a trajectory column")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--column", required=True)
    p_fit.add_argument("--window", required=True, help="lo:hi")
    p_fit.add_argument("--reference", type=float, default=None)
    p_fit.add_argument("--tolerance", type=float, default=0.05)

    p_eq = sub.add_parser("equilibrium", help="degree-2 equilibrium by both routes")
    p_eq.add_argument("--nu", type=float, required=True)
    p_eq.add_argument("--a", type=float, required=True)
    p_eq.add_argument("--alpha-re", type=float, required=True)
    p_eq.add_argument("--alpha-im", type=float, default=0.0)
    p_eq.add_argument("--b", type=float, required=True)
    p_eq.add_argument("--omega", type=float, default=None)

    p_or = sub.add_parser("oracles", help="randomized identity-oracle suites")
    p_or.add_argument("--seed", type=int, default=0)
    p_or.add_argument("--lmax", type=int, default=16)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            code, report = run_manifest(args.manifest)
            for check in report["checks"]:
                state = "PASS" if check["pass"] else "FAIL"
                print(f"[{state}] {check['name']}: measured {check['measured']:.3e} "
                      f"(tolerance {check['tolerance']:.3e})")
            return code
        if args.command == "fit":
            lo, _, hi = args.window.partition(":")
            t, v = _load_csv_series(args.input, args.column)
            fit = fit_rate(t, v, (float(lo), float(hi)), args.reference, args.tolerance)
            print(dumps17(fit.to_dict(), indent=2))
            return 0 if fit.passed else 1
        if args.command == "equilibrium":
            b_eff = args.b if args.omega is None else args.b + 2.0 * args.omega / 3.0
            params = KillingParams(alpha=complex(args.alpha_re, args.alpha_im), b=b_eff)
            doc = {
                "closed_form": reduced_ode.equilibrium_report(params, args.a, args.nu, "closed_form"),
                "solve": reduced_ode.equilibrium_report(params, args.a, args.nu, "solve"),
            }
            cf = np.array([complex(z["re"], z["im"]) for z in doc["closed_form"]["omega_inf"]])
            sv = np.array([complex(z["re"], z["im"]) for z in doc["solve"]["omega_inf"]])
            doc["max_difference"] = float(np.max(np.abs(cf - sv)))
            print(dumps17(doc, indent=2))
            return 0
        # oracles
        residuals = identity_oracle_residuals(args.seed, args.lmax)
        worst = 0.0
        for name, value in residuals.items():
            print(f"{name}: {value:.3e}")
            worst = max(worst, value)
        return 0 if worst < 1e-10 else 1
    except (ManifestError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
