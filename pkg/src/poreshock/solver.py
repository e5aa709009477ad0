"""Operator-split explicit Eulerian hydrocode for reverse-ballistic pore collapse.

One :func:`advance` step runs, in order: CFL time step selection, a
conservative finite-volume update of (rho, rho*u, rho*v, rho*E) with
Rusanov fluxes (pressure and deviatoric stress included) plus upwind
transport of the passive fields, a Jaumann-rate elastic stress predictor,
the radial-return plastic correction, explicit Fourier conduction, and an
EOS sync that refreshes the derived pressure/temperature caches.

Geometry: cell centers at ((i + 0.5) dx, (j + 0.5) dx); the rigid wall is
the y = 0 face of the bottom row.  A material block (volume fraction
mu = 1) moving downward at the impact speed occupies the lower portion of
the domain, with a circular pore cut out and vacuum above.

Interface treatment is a diffuse volume fraction: mu is advected with the
flow and cells below ``mu_vacuum`` carry no pressure and no deviatoric
stress (free-surface closure).  Faces touching such cells use a
pressureless donor-cell flux instead of the Rusanov flux, so a quiescent
free surface is an exact fixed point and mass entering a collapsing pore
is conserved to round-off.  Interface cells can therefore hold small
advected densities while mu < mu_vacuum; the p = S = 0 contract is
enforced exactly after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import materials as mat
from .materials import MaterialModel
from .fields import upwind_tendency

__all__ = [
    "RunConfig",
    "SimState",
    "ConfigError",
    "SolverAbort",
    "StepInfo",
    "AuditReport",
    "initialize_reverse_ballistic",
    "compute_dt",
    "hyperbolic_step",
    "stress_predictor",
    "radial_return",
    "conduction_step",
    "eos_sync",
    "advance",
    "run_simulation",
]


class ConfigError(ValueError):
    """Invalid run configuration."""


class SolverAbort(RuntimeError):
    """Numerical failure (typically a CFL violation); carries step and time."""

    def __init__(self, message, step=None, t=None):
        if step is not None:
            message = f"{message} (step={step}, t={t:.6e} s)"
        super().__init__(message)
        self.step = step
        self.t = t


@dataclass
class RunConfig:
    """Everything one simulation needs besides the impact velocity sweep."""

    up: float = 0.0                      # impact speed, m/s (>= 0)
    nx: int = 128
    ny: int = 256
    dx: float = 1.1719e-9                # m
    pore_diameter: float = 50e-9         # m; 0 disables the pore
    pore_center: Optional[tuple] = None  # m; default: centered in x, mid-block in y
    block_height_fraction: float = 0.85
    cfl: float = 0.4
    t_init: float = 298.0                # K
    snapshot_dt: float = 2.5e-12         # s
    n_snapshots: int = 40                # including t = 0
    strength: bool = True                # deviatoric stress + plasticity on/off
    conduction: bool = True
    conduction_rk4: bool = False
    second_order: bool = False           # minmod-limited reconstruction
    boundary: str = "reverse_ballistic"  # or "periodic", "open"
    mu_vacuum: float = 0.5
    mu_solid: float = 0.99
    p_floor: float = -0.5e9              # bulk tension cutoff, Pa
    material: MaterialModel = field(default_factory=mat.rdx)

    @property
    def t_end(self) -> float:
        return (self.n_snapshots - 1) * self.snapshot_dt

    def pore_center_or_default(self) -> tuple:
        if self.pore_center is not None:
            return self.pore_center
        cx = 0.5 * self.nx * self.dx
        cy = 0.5 * self.block_height_fraction * self.ny * self.dx
        return (cx, cy)

    def validate(self):
        if self.up < 0.0:
            raise ConfigError(f"impact speed must be non-negative, got {self.up}")
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("grid must have at least one cell per direction")
        if self.dx <= 0.0:
            raise ConfigError("dx must be positive")
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError("cfl must lie in (0, 1)")
        if self.snapshot_dt <= 0.0 or self.n_snapshots < 1:
            raise ConfigError("snapshot cadence must be positive")
        if not 0.0 < self.block_height_fraction <= 1.0:
            raise ConfigError("block_height_fraction must lie in (0, 1]")
        if self.boundary not in ("reverse_ballistic", "periodic", "open"):
            raise ConfigError(f"unknown boundary mode {self.boundary!r}")
        if self.pore_diameter < 0.0:
            raise ConfigError("pore diameter must be non-negative")
        if self.pore_diameter > 0.0:
            r = 0.5 * self.pore_diameter
            cx, cy = self.pore_center_or_default()
            top = self.block_height_fraction * self.ny * self.dx
            if (cx - r <= 0.0 or cx + r >= self.nx * self.dx
                    or cy - r <= 0.0 or cy + r >= top):
                raise ConfigError("pore must lie fully inside the material block")


@dataclass
class StepInfo:
    """Per-step bookkeeping filled in by advance()."""

    step: int = 0
    dt: float = 0.0
    # net outflow through the domain boundary during the step (integrated)
    mass_out: float = 0.0
    energy_out: float = 0.0
    xmom_out: float = 0.0
    ymom_out: float = 0.0


@dataclass
class SimState:
    """Co-located fields on the uniform grid; arrays are (ny, nx) float64.

    rho/U/V/E are the hydrodynamic state (E = e + u.u/2 specific total
    energy); Sxx/Syy/Sxy the independent plane-strain deviatoric stress
    components (Szz = -(Sxx+Syy) implied); eps_pl the accumulated
    effective plastic strain with epsdot_pl its lagged rate; e_el/e_cpl
    the elastic and plastic cold-energy accumulators; mu the material
    volume fraction.  p/T/cs are derived caches owned by eos_sync.
    """

    nx: int
    ny: int
    dx: float
    rho: np.ndarray
    U: np.ndarray
    V: np.ndarray
    E: np.ndarray
    Sxx: np.ndarray
    Syy: np.ndarray
    Sxy: np.ndarray
    eps_pl: np.ndarray
    epsdot_pl: np.ndarray
    e_el: np.ndarray
    e_cpl: np.ndarray
    mu: np.ndarray
    t: float = 0.0
    # run-constant closure parameters (copied from RunConfig)
    mu_vacuum: float = 0.5
    mu_solid: float = 0.99
    p_floor: float = -0.5e9
    rho_floor: float = 1.8e-6
    strength: bool = True
    conduction: bool = True
    boundary: str = "reverse_ballistic"
    second_order: bool = False
    # derived caches (eos_sync)
    p: np.ndarray = None
    T: np.ndarray = None
    cs: np.ndarray = None
    # handoff from the stress predictor to the radial return (per-mass
    # deviatoric work increment of the current step)
    dev_work: np.ndarray = None
    step_info: StepInfo = field(default_factory=StepInfo)

    @classmethod
    def zeros(cls, nx, ny, dx, **kwargs) -> "SimState":
        z = lambda: np.zeros((ny, nx))
        return cls(nx=nx, ny=ny, dx=dx,
                   rho=z(), U=z(), V=z(), E=z(),
                   Sxx=z(), Syy=z(), Sxy=z(),
                   eps_pl=z(), epsdot_pl=z(), e_el=z(), e_cpl=z(), mu=z(),
                   p=z(), T=z(), cs=z(), **kwargs)

    @property
    def live(self) -> np.ndarray:
        """Cells carrying any material mass."""
        return self.rho > self.rho_floor

    @property
    def material(self) -> np.ndarray:
        """Cells above the vacuum volume-fraction threshold."""
        return (self.mu >= self.mu_vacuum) & self.live

    @property
    def e_internal(self) -> np.ndarray:
        return self.E - 0.5 * (self.U ** 2 + self.V ** 2)

    def solid(self, m: MaterialModel) -> np.ndarray:
        """Cells where the EOS and strength apply: bulk material, plus
        interface material recompacted to at least reference density.
        Interface cells below that are uncompacted fragments (p = S = 0).
        """
        return self.material & ((self.mu >= self.mu_solid)
                                | (self.rho >= m.rho0 * (1.0 - 1e-12)))

    def copy(self) -> "SimState":
        import copy as _copy
        dup = _copy.copy(self)
        for name in ("rho", "U", "V", "E", "Sxx", "Syy", "Sxy", "eps_pl",
                     "epsdot_pl", "e_el", "e_cpl", "mu", "p", "T", "cs"):
            setattr(dup, name, getattr(self, name).copy())
        dup.dev_work = None if self.dev_work is None else self.dev_work.copy()
        dup.step_info = StepInfo()
        return dup


def _ghost(a: np.ndarray, w: int, boundary: str, anti_wall: bool = False) -> np.ndarray:
    """Ghost-extend an array per the configured domain boundary.

    reverse_ballistic: mirror about the y=0 wall face (sign-flipped for
    wall-antisymmetric quantities: V, Sxy), zero-gradient elsewhere.
    """
    if boundary == "periodic":
        return np.pad(a, w, mode="wrap")
    if boundary == "open":
        return np.pad(a, w, mode="edge")
    b = np.pad(a, ((w, 0), (0, 0)), mode="symmetric")
    if anti_wall:
        b[:w, :] = -b[:w, :]
    b = np.pad(b, ((0, w), (0, 0)), mode="edge")
    return np.pad(b, ((0, 0), (w, w)), mode="edge")


def initialize_reverse_ballistic(cfg: RunConfig) -> SimState:
    """Initial state: block at rest compression moving down at -Up, pore cut out.

    Total energy is set so the calorific EOS returns ``t_init`` exactly;
    note the default reference temperature equals ``t_init`` so the block
    starts at zero pressure (a mechanical equilibrium when Up = 0).
    """
    cfg.validate()
    m = cfg.material
    s = SimState.zeros(cfg.nx, cfg.ny, cfg.dx,
                       mu_vacuum=cfg.mu_vacuum, mu_solid=cfg.mu_solid,
                       p_floor=cfg.p_floor, rho_floor=1e-9 * m.rho0,
                       strength=cfg.strength, conduction=cfg.conduction,
                       boundary=cfg.boundary, second_order=cfg.second_order)

    x = (np.arange(cfg.nx) + 0.5) * cfg.dx
    y = (np.arange(cfg.ny) + 0.5) * cfg.dx
    X, Y = np.meshgrid(x, y)

    block = Y < cfg.block_height_fraction * cfg.ny * cfg.dx
    solid = block.copy()
    if cfg.pore_diameter > 0.0:
        cx, cy = cfg.pore_center_or_default()
        r = 0.5 * cfg.pore_diameter
        solid &= (X - cx) ** 2 + (Y - cy) ** 2 >= r * r

    e_init = mat.cold_energy_hydro(m, m.rho0) + m.cv * (cfg.t_init - m.T0)
    s.mu[solid] = 1.0
    s.rho[solid] = m.rho0
    s.V[solid] = -cfg.up
    s.E[solid] = e_init + 0.5 * cfg.up ** 2
    eos_sync(s, m)
    return s


def compute_dt(s: SimState, m: MaterialModel, cfl: float,
               t_limit: float | None = None) -> float:
    """CFL-limited explicit time step.

    Advective bound over every mass-carrying cell (interface debris
    included, with zero sound speed), explicit-conduction bound over
    material cells, and an optional cap (time to the next snapshot).
    """
    live = s.live
    if not np.any(live):
        raise ValueError("no material in the domain")
    speed = np.abs(s.U[live]) + np.abs(s.V[live]) + s.cs[live]
    vmax = float(np.max(speed))
    if vmax <= 0.0:
        raise ValueError("no signal speed in the domain (empty material region)")
    dt = cfl * s.dx / vmax
    if s.conduction and m.chi > 0.0:
        mater = s.material
        if np.any(mater):
            rho_min = float(np.min(s.rho[mater]))
            dt = min(dt, 0.25 * s.dx ** 2 * rho_min * m.cv / m.chi)
    if t_limit is not None:
        dt = min(dt, t_limit)
    return dt


def _minmod(a, b):
    out = np.where(np.abs(a) < np.abs(b), a, b)
    return np.where(a * b > 0.0, out, 0.0)


def _face_states(ext, axis, second_order):
    """Left/right face states from a width-2 ghost-extended array."""
    if axis == 1:
        c = ext[2:-2, :]
        qm2, qm1, q0, qp1 = c[:, :-3], c[:, 1:-2], c[:, 2:-1], c[:, 3:]
    else:
        c = ext[:, 2:-2]
        qm2, qm1, q0, qp1 = c[:-3, :], c[1:-2, :], c[2:-1, :], c[3:, :]
    if not second_order:
        return qm1, q0
    slope_l = _minmod(qm1 - qm2, q0 - qm1)
    slope_r = _minmod(q0 - qm1, qp1 - q0)
    return qm1 + 0.5 * slope_l, q0 - 0.5 * slope_r


def hyperbolic_step(s: SimState, m: MaterialModel, dt: float) -> SimState:
    """Conservative update of (rho, rho u, rho v, rho E) plus passive transport.

    Material-material faces use the Rusanov flux with pressure and
    deviatoric stress; faces touching a vacuum-classified cell use the
    pressureless donor-cell flux (free surface).  mu, the stress
    components, and the plasticity/energy accumulators ride along with
    first-order upwind advection.
    """
    dx = s.dx
    bc = s.boundary
    vac = ~(s.mu >= s.mu_vacuum)

    # ghost-extended primitives (width 2 so the optional reconstruction
    # has a full stencil; first order just ignores the outer ring)
    g = lambda a, anti=False: _ghost(a, 2, bc, anti)
    ext = {
        "rho": g(s.rho), "U": g(s.U, anti=False), "V": g(s.V, anti=True),
        "E": g(s.E), "p": g(s.p), "cs": g(s.cs),
        "Sxx": g(s.Sxx), "Syy": g(s.Syy), "Sxy": g(s.Sxy, anti=True),
        "vac": g(vac.astype(float)),
    }

    fluxes = {}
    for axis, un_name, ut_name, snn_name in ((1, "U", "V", "Sxx"), (0, "V", "U", "Syy")):
        fs = lambda name, so=s.second_order: _face_states(ext[name], axis, so)
        rL, rR = fs("rho")
        unL, unR = fs(un_name)
        utL, utR = fs(ut_name)
        EL, ER = fs("E")
        pL, pR = fs("p")
        # stress, wave speed, vacuum flags stay first-order at faces
        snnL, snnR = fs(snn_name, False)
        sntL, sntR = fs("Sxy", False)
        cL, cR = fs("cs", False)
        vacL, vacR = fs("vac", False)

        smax = np.maximum(np.abs(unL) + cL, np.abs(unR) + cR)
        f_mass = 0.5 * (rL * unL + rR * unR) - 0.5 * smax * (rR - rL)
        f_momn = (0.5 * (rL * unL ** 2 + pL - snnL + rR * unR ** 2 + pR - snnR)
                  - 0.5 * smax * (rR * unR - rL * unL))
        f_momt = (0.5 * (rL * unL * utL - sntL + rR * unR * utR - sntR)
                  - 0.5 * smax * (rR * utR - rL * utL))
        f_en = (0.5 * ((rL * EL + pL) * unL - (snnL * unL + sntL * utL)
                       + (rR * ER + pR) * unR - (snnR * unR + sntR * utR))
                - 0.5 * smax * (rR * ER - rL * EL))

        # free-surface faces: pressureless one-sided donor transport
        donor_L = unL > 0.0
        donor_R = unR < 0.0
        d_mass = np.where(donor_L, rL * unL, 0.0) + np.where(donor_R, rR * unR, 0.0)
        d_momn = np.where(donor_L, rL * unL ** 2, 0.0) + np.where(donor_R, rR * unR ** 2, 0.0)
        d_momt = np.where(donor_L, rL * unL * utL, 0.0) + np.where(donor_R, rR * unR * utR, 0.0)
        d_en = np.where(donor_L, rL * EL * unL, 0.0) + np.where(donor_R, rR * ER * unR, 0.0)

        free = (vacL > 0.5) | (vacR > 0.5)
        fluxes[axis] = tuple(np.where(free, d, f) for d, f in
                             ((d_mass, f_mass), (d_momn, f_momn),
                              (d_momt, f_momt), (d_en, f_en)))

    fx_mass, fx_mx, fx_my, fx_en = fluxes[1]
    fy_mass, fy_my, fy_mx, fy_en = fluxes[0]

    # passive upwind transport before overwriting the carrying velocities
    for arr in (s.mu, s.Sxx, s.Syy, s.Sxy, s.eps_pl, s.epsdot_pl, s.e_el, s.e_cpl):
        arr += dt * upwind_tendency(arr, s.U, s.V, dx)
    np.clip(s.mu, 0.0, 1.0, out=s.mu)

    def div(fx, fy):
        return (fx[:, 1:] - fx[:, :-1] + fy[1:, :] - fy[:-1, :]) / dx

    rho_new = s.rho - dt * div(fx_mass, fy_mass)
    mx_new = s.rho * s.U - dt * div(fx_mx, fy_mx)
    my_new = s.rho * s.V - dt * div(fx_my, fy_my)
    en_new = s.rho * s.E - dt * div(fx_en, fy_en)

    if not np.all(np.isfinite(rho_new)):
        raise SolverAbort("non-finite density after hyperbolic update")
    if np.any(rho_new < -1e-12 * m.rho0):
        raise SolverAbort("negative density after hyperbolic update (CFL violation)")
    np.clip(rho_new, 0.0, None, out=rho_new)

    live = rho_new > s.rho_floor
    inv = np.where(live, 1.0 / np.where(live, rho_new, 1.0), 0.0)
    s.rho = rho_new
    s.U = mx_new * inv
    s.V = my_new * inv
    s.E = en_new * inv

    # keep the volume fraction consistent with the mass actually present:
    # a cell holding rho/rho0 of a cell's worth of reference-density
    # material is at least that full.  Without this, cells filling through
    # a collapsing free surface stay pressureless until far past full and
    # then flip with an unphysical pressure spike.
    np.maximum(s.mu, np.minimum(rho_new / m.rho0, 1.0), out=s.mu)

    # boundary accounting: net outflow through the domain edges
    area = dt * dx
    info = s.step_info
    info.mass_out += area * float(np.sum(fx_mass[:, -1]) - np.sum(fx_mass[:, 0])
                                  + np.sum(fy_mass[-1, :]) - np.sum(fy_mass[0, :]))
    info.energy_out += area * float(np.sum(fx_en[:, -1]) - np.sum(fx_en[:, 0])
                                    + np.sum(fy_en[-1, :]) - np.sum(fy_en[0, :]))
    info.xmom_out += area * float(np.sum(fx_mx[:, -1]) - np.sum(fx_mx[:, 0])
                                  + np.sum(fy_mx[-1, :]) - np.sum(fy_mx[0, :]))
    info.ymom_out += area * float(np.sum(fx_my[:, -1]) - np.sum(fx_my[:, 0])
                                  + np.sum(fy_my[-1, :]) - np.sum(fy_my[0, :]))
    return s


def _velocity_gradients(s: SimState):
    """Centered velocity gradients with boundary-consistent ghosts."""
    Ue = _ghost(s.U, 1, s.boundary, anti_wall=False)
    Ve = _ghost(s.V, 1, s.boundary, anti_wall=True)
    inv2 = 1.0 / (2.0 * s.dx)
    dudx = (Ue[1:-1, 2:] - Ue[1:-1, :-2]) * inv2
    dudy = (Ue[2:, 1:-1] - Ue[:-2, 1:-1]) * inv2
    dvdx = (Ve[1:-1, 2:] - Ve[1:-1, :-2]) * inv2
    dvdy = (Ve[2:, 1:-1] - Ve[:-2, 1:-1]) * inv2
    return dudx, dudy, dvdx, dvdy


def stress_predictor(s: SimState, m: MaterialModel, dt: float) -> SimState:
    """Elastic trial update of S: Jaumann spin terms plus 2 G D' sources.

    The advective part of the stress evolution was handled upwind in the
    hyperbolic step; this adds the local source terms on material cells
    and stashes the deviatoric work increment for the radial return's
    energy bookkeeping.
    """
    dudx, dudy, dvdx, dvdy = _velocity_gradients(s)
    divu = dudx + dvdy
    dxx = dudx - divu / 3.0
    dyy = dvdy - divu / 3.0
    dzz = -divu / 3.0
    dxy = 0.5 * (dudy + dvdx)
    w = 0.5 * (dudy - dvdx)  # spin W_xy

    mater = s.solid(m)
    G = (mat.shear_modulus(m, s.p, s.T) if s.strength else np.zeros_like(s.p))

    s0xx, s0yy, s0xy = s.Sxx.copy(), s.Syy.copy(), s.Sxy.copy()
    dSxx = dt * (2.0 * w * s0xy + 2.0 * G * dxx)
    dSyy = dt * (-2.0 * w * s0xy + 2.0 * G * dyy)
    dSxy = dt * (-w * (s0xx - s0yy) + 2.0 * G * dxy)
    s.Sxx += np.where(mater, dSxx, 0.0)
    s.Syy += np.where(mater, dSyy, 0.0)
    s.Sxy += np.where(mater, dSxy, 0.0)

    # per-mass deviatoric stress work over the step, midpoint stress
    # (spin terms are workless); consumed by radial_return
    mxx = 0.5 * (s0xx + s.Sxx)
    myy = 0.5 * (s0yy + s.Syy)
    mxy = 0.5 * (s0xy + s.Sxy)
    mzz = -(mxx + myy)
    work = (mxx * dxx + myy * dyy + mzz * dzz + 2.0 * mxy * dxy) * dt
    rho_safe = np.maximum(s.rho, s.rho_floor)
    s.dev_work = np.where(mater, work / rho_safe, 0.0)
    return s


def radial_return(s: SimState, m: MaterialModel, dt: float) -> SimState:
    """Remap trial stresses exceeding the yield surface radially back onto it.

    Uses the lagged plastic strain rate for the rate term of the yield
    stress.  The plastic work splits per the Taylor-Quinney fraction: the
    (1 - beta) share accumulates as cold plastic energy, the elastic
    accumulator receives total deviatoric work minus plastic work, and the
    beta share is left in the thermal part of e (raising T).
    """
    mater = s.solid(m)
    szz = -(s.Sxx + s.Syy)
    svm = np.sqrt(1.5 * (s.Sxx ** 2 + s.Syy ** 2 + szz ** 2 + 2.0 * s.Sxy ** 2))

    sy = yield_stress_field(s, m)
    G = mat.shear_modulus(m, s.p, s.T)

    yielding = mater & (svm > sy)
    scale = np.where(yielding, np.where(svm > 0.0, sy / np.where(svm > 0.0, svm, 1.0), 1.0), 1.0)
    s.Sxx *= scale
    s.Syy *= scale
    s.Sxy *= scale

    d_eps = np.where(yielding, (svm - sy) / (3.0 * G), 0.0)
    rho_safe = np.maximum(s.rho, s.rho_floor)
    plastic_work = sy * d_eps / rho_safe

    s.eps_pl += d_eps
    s.epsdot_pl = np.where(mater, d_eps / dt, 0.0)
    s.e_cpl += (1.0 - m.beta) * plastic_work
    dev_work = s.dev_work if s.dev_work is not None else 0.0
    s.e_el += np.where(mater, dev_work - plastic_work, 0.0)
    s.dev_work = None
    return s


def yield_stress_field(s: SimState, m: MaterialModel) -> np.ndarray:
    """Johnson-Cook yield stress per cell from the current state caches."""
    return np.asarray(mat.yield_stress_jc(m, s.eps_pl, np.maximum(s.epsdot_pl, 0.0),
                                          s.T, s.p))


def _conduction_divergence(s: SimState, m: MaterialModel, T: np.ndarray) -> np.ndarray:
    """div(chi grad T) in flux form, zero-flux at vacuum and domain faces."""
    mater = s.material.astype(float)
    dx = s.dx
    qx = np.zeros((s.ny, s.nx + 1))
    qy = np.zeros((s.ny + 1, s.nx))
    both_x = mater[:, 1:] * mater[:, :-1]
    both_y = mater[1:, :] * mater[:-1, :]
    qx[:, 1:-1] = m.chi * both_x * (T[:, 1:] - T[:, :-1]) / dx
    qy[1:-1, :] = m.chi * both_y * (T[1:, :] - T[:-1, :]) / dx
    return (qx[:, 1:] - qx[:, :-1] + qy[1:, :] - qy[:-1, :]) / dx


def conduction_step(s: SimState, m: MaterialModel, dt: float) -> SimState:
    """Explicit Fourier heat conduction on material cells (vacuum adiabatic).

    Updates internal energy through the total-energy carrier in strict
    flux form, so the domain total is unchanged to round-off.
    """
    if not s.conduction or m.chi == 0.0:
        return s
    mater = s.material
    rho_safe = np.maximum(s.rho, s.rho_floor)
    div = _conduction_divergence(s, m, s.T)
    s.E += np.where(mater, dt * div / rho_safe, 0.0)
    return s


def _conduction_step_rk4(s: SimState, m: MaterialModel, dt: float) -> SimState:
    """RK4 variant of the conduction substep (temperature re-derived per stage)."""
    from .fields import rk4_integrate

    mater = s.material
    rho_safe = np.maximum(s.rho, s.rho_floor)
    e_cold = _cold_energy_for_state(s, m) + s.e_el + s.e_cpl
    ke = 0.5 * (s.U ** 2 + s.V ** 2)

    def rhs(E):
        T = np.where(mater, m.T0 + (E - ke - e_cold) / m.cv, 0.0)
        return np.where(mater, _conduction_divergence(s, m, T) / rho_safe, 0.0)

    s.E = rk4_integrate(s.E, rhs, dt)
    return s


def _cold_energy_for_state(s: SimState, m: MaterialModel) -> np.ndarray:
    """Tabulated hydrodynamic cold energy, clamped to the table range.

    Free-surface debris can rarefy below the tabulated density span; its
    pressure is clamped anyway, so clamping the lookup is harmless and
    keeps the per-step cost O(1) per cell.
    """
    interp, lo, hi = mat._cold_energy_interpolator(m)
    rho_eval = np.clip(s.rho, lo, hi)
    out = np.zeros_like(s.rho)
    live = s.live
    out[live] = interp(rho_eval[live])
    return out


def eos_sync(s: SimState, m: MaterialModel) -> SimState:
    """Refresh the derived caches p, T, cs from the evolved state.

    Three closure classes:
      vacuum    (mu < mu_vacuum or no mass): p = S = 0, T = 0;
      fragments (interface material below reference density): uncompacted
                debris carries temperature but no pressure and no
                deviatoric stress;
      solid     (bulk, or interface recompacted to >= rho0): full
                Mie-Grüneisen pressure with the complete cold energy
                (hydrodynamic + elastic + plastic) and calorific
                temperature.  Interface solid cannot support tension;
                bulk is cut off at the configured tension floor.
    """
    mater = s.material
    solid = s.solid(m)

    e_cold = _cold_energy_for_state(s, m) + s.e_el + s.e_cpl
    de = s.e_internal - e_cold

    p = np.zeros_like(s.rho)
    T = np.zeros_like(s.rho)
    cs = np.zeros_like(s.rho)
    T[mater] = m.T0 + de[mater] / m.cv
    if np.any(solid):
        rho_s = s.rho[solid]
        p_s = mat.cold_pressure(m, rho_s) + mat.gruneisen(m, rho_s) * rho_s * de[solid]
        bulk = s.mu[solid] >= s.mu_solid
        p_s = np.where(bulk, np.maximum(p_s, s.p_floor), np.maximum(p_s, 0.0))
        p[solid] = p_s
        G = mat.shear_modulus(m, p_s, T[solid]) if s.strength else 0.0
        cs[solid] = mat.bulk_sound_speed(m, rho_s, G)

    loose = ~solid
    s.Sxx[loose] = 0.0
    s.Syy[loose] = 0.0
    s.Sxy[loose] = 0.0
    s.p, s.T, s.cs = p, T, cs
    return s


def advance(s: SimState, m: MaterialModel, cfg: RunConfig) -> SimState:
    """One full operator-split step; lands exactly on snapshot times."""
    k_next = int(np.floor(s.t / cfg.snapshot_dt + 1e-9)) + 1
    t_next = k_next * cfg.snapshot_dt
    remaining = t_next - s.t
    dt = compute_dt(s, m, cfg.cfl, t_limit=remaining)
    lands = dt >= remaining * (1.0 - 1e-12)

    info = s.step_info
    info.step += 1
    info.dt = dt
    try:
        hyperbolic_step(s, m, dt)
        if s.strength:
            stress_predictor(s, m, dt)
            radial_return(s, m, dt)
        if cfg.conduction_rk4:
            _conduction_step_rk4(s, m, dt)
        else:
            conduction_step(s, m, dt)
        eos_sync(s, m)
    except SolverAbort as err:
        raise SolverAbort(str(err), step=info.step, t=s.t) from None

    s.t = t_next if lands else s.t + dt
    return s


@dataclass
class AuditReport:
    """Conservation/symmetry bookkeeping accumulated over a run."""

    steps: int = 0
    mass0: float = 0.0
    energy0: float = 0.0
    max_mass_residual: float = 0.0
    max_energy_step_residual: float = 0.0
    max_mirror_asymmetry: float = 0.0
    max_momx_imbalance: float = 0.0

    def rows(self):
        return [
            ("steps", self.steps),
            ("max_mass_residual", self.max_mass_residual),
            ("max_energy_step_residual", self.max_energy_step_residual),
            ("max_mirror_asymmetry", self.max_mirror_asymmetry),
            ("max_momx_imbalance", self.max_momx_imbalance),
        ]


def _mirror_asymmetry(s: SimState) -> float:
    worst = 0.0
    for arr, odd in ((s.rho, False), (s.E, False), (s.V, False), (s.mu, False),
                     (s.T, False), (s.p, False), (s.U, True)):
        flipped = arr[:, ::-1]
        diff = np.max(np.abs(arr + flipped)) if odd else np.max(np.abs(arr - flipped))
        scale = np.max(np.abs(arr))
        if scale > 0.0:
            worst = max(worst, diff / scale)
    return worst


def run_simulation(cfg: RunConfig, *, audit: bool = False,
                   progress: Optional[Callable] = None):
    """Run one configuration to its snapshot count.

    Returns ``(series, report)`` where ``series`` is the recorded
    SnapshotSeries and ``report`` is an AuditReport when ``audit`` is on
    (else None).  ``progress(state)`` is called after every step.
    """
    from . import dataset

    m = cfg.material
    s = initialize_reverse_ballistic(cfg)
    frames = [dataset.record(s)]

    report = AuditReport() if audit else None
    if audit:
        cell = cfg.dx ** 2
        report.mass0 = float(np.sum(s.rho)) * cell
        report.energy0 = float(np.sum(s.rho * s.E)) * cell
        prev_energy = report.energy0
        prev_energy_out = 0.0

    snap_eps = 1e-9 * cfg.snapshot_dt
    while len(frames) < cfg.n_snapshots:
        t_target = len(frames) * cfg.snapshot_dt
        while s.t < t_target - snap_eps:
            advance(s, m, cfg)
            if audit:
                cell = cfg.dx ** 2
                mass = float(np.sum(s.rho)) * cell
                energy = float(np.sum(s.rho * s.E)) * cell
                mass_res = abs(mass - report.mass0 + s.step_info.mass_out) / report.mass0
                step_out = s.step_info.energy_out - prev_energy_out
                scale = max(abs(energy), abs(prev_energy), 1e-300)
                en_res = abs(energy - prev_energy + step_out) / scale
                report.max_mass_residual = max(report.max_mass_residual, mass_res)
                report.max_energy_step_residual = max(report.max_energy_step_residual, en_res)
                prev_energy = energy
                prev_energy_out = s.step_info.energy_out
                mom_x = abs(float(np.sum(s.rho * s.U)))
                mom_ref = float(np.sum(s.rho * np.abs(s.V))) + 1e-300
                report.max_momx_imbalance = max(report.max_momx_imbalance, mom_x / mom_ref)
                report.steps = s.step_info.step
            if progress is not None:
                progress(s)
        frames.append(dataset.record(s))
        if audit:
            report.max_mirror_asymmetry = max(report.max_mirror_asymmetry,
                                              _mirror_asymmetry(s))

    series = dataset.SnapshotSeries(
        nx=cfg.nx, ny=cfg.ny, dx=cfg.dx, dt_snap=cfg.snapshot_dt,
        v0=cfg.up, frames=frames)
    return series, report
