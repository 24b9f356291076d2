"""Time integration of the nonlinear perturbation dynamics on the sphere.

Two-jet form:  d_t w = nu (Lap w + 2w) - (a/4) sqrt(5/pi) cos(theta) d_phi (I + 6 Lap^{-1}) w - u . grad w
One-jet form:  d_t w = nu (Lap w + 2w) - (a/4) sqrt(3/pi) d_phi (I + 2 Lap^{-1}) w - u . grad w

with u = n x grad Lap^{-1} w.  The diagonal diffusion is integrated exactly
through an integrating factor; the remaining terms ride on classical RK4
stages (Lawson scheme), so zonal states decay exactly and degree-1 states are
fixed points of the discrete map up to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import reduced_ode
from .harmonics import QuadratureGrid
from .operators import KillingParams, convection, perturbation_operator, velocity_values
from .sht import SpectralField

TRAJECTORY_HEADER = (
    "t,norm_eq1,norm_eq2_dist,norm_ge3,"
    "re_w22,im_w22,re_w21,im_w21,re_w20,im_w20,re_w2m1,im_w2m1,re_w2m2,im_w2m2"
)


class IntegrationError(RuntimeError):
    """The time stepper produced a non-finite state."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.6g})")
        self.t = t


@dataclass
class SolverConfig:
    """Run parameters; dt = None selects the CFL-style default at run time."""

    nu: float
    amplitude: float
    N: int
    t_end: float
    dt: float | None = None
    snapshot_stride: int = 10
    jet_order: str = "two_jet"
    store_snapshots: bool = False

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("viscosity must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and (self.dt <= 0 or self.dt > self.t_end):
            raise ValueError("dt must lie in (0, t_end]")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")
        if self.jet_order not in ("one_jet", "two_jet"):
            raise ValueError(f"unknown jet_order {self.jet_order!r}")
        min_degree = 3 if self.jet_order == "two_jet" else 2
        if self.N < min_degree:
            raise ValueError(f"{self.jet_order} dynamics need N >= {min_degree}")


@dataclass
class TrajectoryRecord:
    """Snapshot diagnostics: conserved part, degree-2 distance, high-degree norm."""

    t: float
    norm_eq1: float
    norm_eq2_dist: float
    norm_ge3: float
    mode2: np.ndarray
    mode1: np.ndarray
    snapshot: SpectralField | None = None


@dataclass
class CouplingSeries:
    """Per-step couplings (M, f) of the degree-2 block to the remainder."""

    times: np.ndarray
    M: np.ndarray
    f: np.ndarray


def linear_diffusion_factors(N: int, nu: float) -> np.ndarray:
    """Per-degree coefficients nu (2 - n(n+1)) of the exactly-integrated part."""
    n = np.arange(N + 1, dtype=float)
    out = nu * (2.0 - n * (n + 1.0))
    out[0] = 0.0
    return out


def _one_jet_operator(omega: SpectralField) -> SpectralField:
    """Spectral action of d_phi (I + 2 Lap^{-1}): multiplier i m (1 - 2/(n(n+1)))."""
    N = omega.N
    n = np.arange(N + 1, dtype=float)
    weight = np.zeros(N + 1)
    weight[1:] = 1.0 - 2.0 / (n[1:] * (n[1:] + 1.0))
    m_factors = 1j * np.arange(-N, N + 1)
    return SpectralField(N=N, coeffs=omega.coeffs * weight[:, None] * m_factors[None, :])


def _explicit(
    omega: SpectralField,
    grid: QuadratureGrid,
    jet_order: str,
    amplitude: float,
    extra_multiplier: np.ndarray | None = None,
) -> SpectralField:
    """Everything except diagonal diffusion: base-flow coupling, convection, extras."""
    if jet_order == "two_jet":
        coupling = (amplitude / 4.0) * math.sqrt(5.0 / math.pi)
        out = (-coupling) * perturbation_operator(omega)
    else:
        coupling = (amplitude / 4.0) * math.sqrt(3.0 / math.pi)
        out = (-coupling) * _one_jet_operator(omega)
    out = out - convection(omega, grid)
    if extra_multiplier is not None:
        out = out + SpectralField(N=omega.N, coeffs=omega.coeffs * extra_multiplier)
    return out


def rhs_two_jet(omega: SpectralField, cfg: SolverConfig, grid: QuadratureGrid) -> SpectralField:
    """Full right-hand side of the two-jet perturbation dynamics."""
    diffusion = omega.apply_degree_multiplier(linear_diffusion_factors(omega.N, cfg.nu))
    return diffusion + _explicit(omega, grid, "two_jet", cfg.amplitude)


def rhs_one_jet(omega: SpectralField, cfg: SolverConfig, grid: QuadratureGrid) -> SpectralField:
    """Full right-hand side of the one-jet perturbation dynamics."""
    diffusion = omega.apply_degree_multiplier(linear_diffusion_factors(omega.N, cfg.nu))
    return diffusion + _explicit(omega, grid, "one_jet", cfg.amplitude)


def default_dt(omega0: SpectralField, cfg: SolverConfig, grid: QuadratureGrid) -> float:
    """min(0.1/(nu N^2), 0.5/(|v|_inf N)), from the initial condition only."""
    dt = 0.1 / (cfg.nu * cfg.N**2)
    vmax = float(np.max(np.abs(velocity_values(omega0, grid))))
    if vmax > 0.0:
        dt = min(dt, 0.5 / (vmax * cfg.N))
    return dt


class Stepper:
    """Lawson-RK4 stepper with the diffusion factors frozen for a fixed dt."""

    def __init__(self, cfg, grid, dt, extra_multiplier=None):
        self.cfg = cfg
        self.grid = grid
        self.dt = dt
        self.extra_multiplier = extra_multiplier
        lin = linear_diffusion_factors(cfg.N, cfg.nu)[:, None]
        self.exp_half = np.exp(lin * (dt / 2.0))
        self.exp_full = np.exp(lin * dt)

    def nonlinear(self, state: SpectralField) -> SpectralField:
        return _explicit(
            state, self.grid, self.cfg.jet_order, self.cfg.amplitude, self.extra_multiplier
        )

    def step(self, state: SpectralField) -> SpectralField:
        dt, e_half, e_full = self.dt, self.exp_half, self.exp_full
        u = state.coeffs
        k1 = self.nonlinear(state).coeffs
        u2 = e_half * (u + (dt / 2.0) * k1)
        k2 = self.nonlinear(SpectralField(state.N, u2)).coeffs
        u3 = e_half * u + (dt / 2.0) * k2
        k3 = self.nonlinear(SpectralField(state.N, u3)).coeffs
        u4 = e_full * u + dt * e_half * k3
        k4 = self.nonlinear(SpectralField(state.N, u4)).coeffs
        advanced = e_full * u + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
        return SpectralField(state.N, advanced).symmetrized()


def step(omega: SpectralField, cfg: SolverConfig, grid: QuadratureGrid, dt: float | None = None) -> SpectralField:
    """Advance one time step (convenience wrapper building a fresh stepper)."""
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else default_dt(omega, cfg, grid)
    out = Stepper(cfg, grid, dt).step(omega)
    if not np.all(np.isfinite(out.coeffs)):
        raise IntegrationError("state became non-finite after one step", dt)
    return out


def equilibrium_from_initial(omega0: SpectralField, cfg: SolverConfig) -> np.ndarray:
    """Degree-2 equilibrium determined by the initial degree-1 data (zero for one-jet)."""
    if cfg.jet_order != "two_jet":
        return np.zeros(5, dtype=complex)
    params = KillingParams.from_field(omega0)
    return reduced_ode.equilibrium_closed_form(params, cfg.amplitude, cfg.nu)


def _integrate(
    omega0: SpectralField,
    cfg: SolverConfig,
    grid: QuadratureGrid,
    extra_multiplier: np.ndarray | None = None,
    equilibrium_fn=None,
    record_coupling: bool = False,
):
    if omega0.N != cfg.N:
        raise ValueError(f"initial condition degree {omega0.N} != configured N {cfg.N}")
    if cfg.N > grid.N:
        raise ValueError("grid does not support the configured truncation degree")
    reality = omega0.reality_residual()
    if reality > 1e-12 * max(1.0, omega0.norm()):
        raise ValueError(f"initial condition is not a real field (residual {reality:.3e})")

    dt_req = cfg.dt if cfg.dt is not None else default_dt(omega0, cfg, grid)
    nsteps = max(1, math.ceil(cfg.t_end / dt_req - 1e-12))
    dt = cfg.t_end / nsteps

    if equilibrium_fn is None:
        w_inf = equilibrium_from_initial(omega0, cfg)
        equilibrium_fn = lambda t: w_inf

    stepper = Stepper(cfg, grid, dt, extra_multiplier)
    state = omega0.symmetrized()

    records: list[TrajectoryRecord] = []
    coupling_M = [] if record_coupling else None
    coupling_f = [] if record_coupling else None

    def snap(t, state):
        records.append(
            TrajectoryRecord(
                t=t,
                norm_eq1=state.degree_norm(1),
                norm_eq2_dist=float(np.linalg.norm(state.mode2_vector() - equilibrium_fn(t))),
                norm_ge3=state.highpass_norm(3),
                mode2=state.mode2_vector(),
                mode1=state.mode1_vector(),
                snapshot=state.copy() if cfg.store_snapshots else None,
            )
        )

    snap(0.0, state)
    if record_coupling:
        M, f = reduced_ode.extract_coupling(state, cfg.amplitude, grid)
        coupling_M.append(M)
        coupling_f.append(f)

    for k in range(1, nsteps + 1):
        state = stepper.step(state)
        t = k * dt
        if not np.all(np.isfinite(state.coeffs)):
            raise IntegrationError("state became non-finite", t)
        if record_coupling:
            M, f = reduced_ode.extract_coupling(state, cfg.amplitude, grid)
            coupling_M.append(M)
            coupling_f.append(f)
        if k % cfg.snapshot_stride == 0 or k == nsteps:
            snap(t, state)

    coupling = None
    if record_coupling:
        coupling = CouplingSeries(
            times=dt * np.arange(nsteps + 1),
            M=np.array(coupling_M),
            f=np.array(coupling_f),
        )
    return records, coupling, dt


def run(omega0: SpectralField, cfg: SolverConfig, grid: QuadratureGrid) -> list[TrajectoryRecord]:
    """Integrate to t_end; trajectory records at snapshot_stride intervals plus the endpoint."""
    records, _, _ = _integrate(omega0, cfg, grid)
    return records


def run_with_coupling(
    omega0: SpectralField, cfg: SolverConfig, grid: QuadratureGrid
) -> tuple[list[TrajectoryRecord], CouplingSeries]:
    """As run(), also extracting (M, f) couplings at every step for ODE cross-checks."""
    records, coupling, _ = _integrate(omega0, cfg, grid, record_coupling=True)
    return records, coupling


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(records, path, header_comment: str | None = None):
    """Write snapshot diagnostics; 17-significant-digit floats, LF endings."""
    with open(path, "w", newline="\n") as fh:
        if header_comment is not None:
            fh.write(f"# {header_comment}\n")
        fh.write(TRAJECTORY_HEADER + "\n")
        for rec in records:
            cells = [
                format_float(rec.t),
                format_float(rec.norm_eq1),
                format_float(rec.norm_eq2_dist),
                format_float(rec.norm_ge3),
            ]
            for z in rec.mode2:
                cells.append(format_float(z.real))
                cells.append(format_float(z.imag))
            fh.write(",".join(cells) + "\n")
