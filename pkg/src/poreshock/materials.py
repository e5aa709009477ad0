"""Constitutive models for shocked RDX.

All functions are pure evaluations on an immutable :class:`MaterialModel`:
a third-order Birch-Murnaghan cold curve, a density-dependent Grüneisen
coefficient, a pressure/temperature dependent shear modulus, a Simon-type
melt curve, Johnson-Cook yield strength, and the Mie-Grüneisen /
calorific closures that tie them together.  Inputs may be scalars or
numpy arrays; outputs follow numpy broadcasting.

The bundled :func:`rdx` model carries the full RDX parameter set
(MD/crystal-plasticity calibrated constants consumed here as plain
numbers).  Two reference-state values are *not* pinned down by that
parameter set and default to standard literature choices: the ambient
density ``rho0 = 1800 kg/m^3`` and the Taylor-Quinney fraction
``beta = 0.9``.  Both are configurable and flagged again in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "MaterialModel",
    "rdx",
    "cold_pressure",
    "cold_pressure_derivative",
    "cold_energy_hydro",
    "gruneisen",
    "shear_modulus",
    "melt_temperature",
    "yield_stress_jc",
    "pressure_mie_gruneisen",
    "temperature_from_state",
    "bulk_sound_speed",
]


@dataclass(frozen=True)
class MaterialModel:
    """Complete parameter set for one material.

    Units: rho0 kg/m^3; K0, G0, A, B, a_melt, pref Pa; a2 Pa/K;
    epsdot0 1/s; Tref, Tmelt_ref, T0 K; cv J/(kg K); chi W/(m K);
    e0 J/kg; K0p, a1, Gamma0, gamma1, gamma2, n, m, C, c_melt, beta
    dimensionless.
    """

    rho0: float          # reference density
    K0: float            # bulk modulus
    K0p: float           # dK/dp at reference
    G0: float            # reference shear modulus
    a1: float            # dG/dp
    a2: float            # dG/dT
    Gamma0: float        # Grüneisen polynomial coefficients
    gamma1: float
    gamma2: float
    A: float             # Johnson-Cook strength
    B: float
    n: float
    m: float
    C: float
    epsdot0: float
    Tref: float
    Tmelt_ref: float     # melt curve
    pref: float
    a_melt: float
    c_melt: float
    cv: float            # isochoric specific heat
    chi: float           # thermal conductivity
    T0: float            # reference temperature of the calorific EOS
    e0: float = 0.0      # reference internal energy
    beta: float = 0.9    # Taylor-Quinney fraction of plastic work to heat

    def __post_init__(self):
        if not (self.rho0 > 0 and self.K0 > 0 and self.G0 > 0 and self.cv > 0):
            raise ValueError("rho0, K0, G0, cv must be positive")
        if self.chi < 0:
            raise ValueError("thermal conductivity must be non-negative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not self.epsdot0 > 0:
            raise ValueError("reference strain rate must be positive")

    def with_overrides(self, **kwargs) -> "MaterialModel":
        return replace(self, **kwargs)


def rdx(rho0: float = 1800.0, beta: float = 0.9,
        T0: float = 298.0, e0: float = 0.0) -> MaterialModel:
    """RDX parameter set (MD / crystal-plasticity calibrated constants).

    ``rho0`` and ``beta`` have no calibrated value in that set and default
    to 1800 kg/m^3 and 0.9; override per run if needed.
    """
    return MaterialModel(
        rho0=rho0,
        K0=13e9,
        K0p=9.2,
        G0=5.314e9,
        a1=3.3774,
        a2=-10.356e6,
        Gamma0=0.667,
        gamma1=2.00878,
        gamma2=-0.805669,
        A=0.3e9,
        B=0.1e9,
        n=0.1,
        m=3.0,
        C=1.8,
        epsdot0=4.36e4,
        Tref=298.0,
        Tmelt_ref=478.0,
        pref=0.0001e9,
        a_melt=0.9631e9,
        c_melt=2.8855,
        cv=1980.0,
        chi=0.178,
        T0=T0,
        e0=e0,
        beta=beta,
    )


# Bracket floor for the melt curve in deep tension (avoids complex powers).
_MELT_BRACKET_FLOOR = 1e-6
# Shear modulus floor as a fraction of G0 (keeps wave speeds real near melt).
G_MIN_FRACTION = 0.01


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0.0):
        raise ValueError("density must be finite and positive")
    return rho


def cold_pressure(m: MaterialModel, rho):
    """Cold (0 K) pressure from the third-order Birch-Murnaghan curve.

    p_c = (3/2) K0 (x^(7/3) - x^(5/3)) [1 + (3/4)(K0' - 4)(x^(2/3) - 1)],
    x = rho/rho0.  Zero at rho0, negative (tension) below it.
    """
    rho = _check_density(rho)
    x = rho / m.rho0
    x23 = np.cbrt(x) ** 2
    term = x23 ** 3.5 - x23 ** 2.5          # x^(7/3) - x^(5/3)
    correction = 1.0 + 0.75 * (m.K0p - 4.0) * (x23 - 1.0)
    return 1.5 * m.K0 * term * correction


def cold_pressure_derivative(m: MaterialModel, rho):
    """Analytic dp_c/drho of the cold curve (used for sound speeds)."""
    rho = _check_density(rho)
    x = rho / m.rho0
    x13 = np.cbrt(x)
    xi = 0.75 * (m.K0p - 4.0)
    # d/dx of the two factors
    d_term = (7.0 / 3.0) * x13 ** 4 - (5.0 / 3.0) * x13 ** 2
    term = x13 ** 7 - x13 ** 5
    d_corr = xi * (2.0 / 3.0) / x13
    corr = 1.0 + xi * (x13 ** 2 - 1.0)
    return 1.5 * m.K0 * (d_term * corr + term * d_corr) / m.rho0


def gruneisen(m: MaterialModel, rho):
    """Grüneisen coefficient Gamma(rho) = Gamma0 + g1 (rho0/rho) + g2 (rho0/rho)^2."""
    rho = _check_density(rho)
    r = m.rho0 / rho
    return m.Gamma0 + m.gamma1 * r + m.gamma2 * r * r


def shear_modulus(m: MaterialModel, p, T, floor: float | None = None):
    """Pressure/temperature dependent shear modulus, clamped below at a floor.

    G = G0 + a1 p + a2 (T - T0); the clamp (default 0.01 G0) absorbs the
    unphysical regime near and beyond melt.
    """
    if floor is None:
        floor = G_MIN_FRACTION * m.G0
    g = m.G0 + m.a1 * np.asarray(p, dtype=float) + m.a2 * (np.asarray(T, dtype=float) - m.T0)
    return np.maximum(g, floor)


def melt_temperature(m: MaterialModel, p):
    """Pressure-dependent melt temperature T_m = T_m,ref [1 + (p - pref)/a]^(1/c).

    The bracket is clamped at a small positive floor so deep tension does
    not produce complex powers.
    """
    bracket = 1.0 + (np.asarray(p, dtype=float) - m.pref) / m.a_melt
    bracket = np.maximum(bracket, _MELT_BRACKET_FLOOR)
    return m.Tmelt_ref * bracket ** (1.0 / m.c_melt)


def yield_stress_jc(m: MaterialModel, eps_pl, epsdot, T, p):
    """Johnson-Cook yield stress with pressure-dependent melt temperature.

    S_y = (A + B eps^n) [1 + C ln(epsdot/epsdot0)] [1 - theta^m] with
    theta = (T - Tref)/(T_m(p) - Tref) clamped to [0, 1].  The rate bracket
    is clamped at 1 below the reference rate (no quasi-static softening),
    and the result is 0 at or above melt.
    """
    eps_pl = np.asarray(eps_pl, dtype=float)
    epsdot = np.asarray(epsdot, dtype=float)
    if np.any(eps_pl < 0.0) or np.any(epsdot < 0.0):
        raise ValueError("plastic strain and strain rate must be non-negative")
    T = np.asarray(T, dtype=float)
    p = np.asarray(p, dtype=float)

    hardening = m.A + m.B * eps_pl ** m.n
    rate = 1.0 + m.C * np.log(np.maximum(epsdot / m.epsdot0, 1.0))

    tmelt = melt_temperature(m, p)
    span = tmelt - m.Tref
    # theta in [0,1]; if the melt curve dips to or below Tref (deep tension)
    # the homologous scale degenerates and only the T >= T_m test applies
    theta = np.clip((T - m.Tref) / np.where(span > 0.0, span, 1.0), 0.0, 1.0)
    theta = np.where(span > 0.0, theta, 0.0)
    theta = np.where(T >= tmelt, 1.0, theta)
    thermal = 1.0 - theta ** m.m
    return hardening * rate * thermal


def pressure_mie_gruneisen(m: MaterialModel, rho, e, e_c):
    """Mie-Grüneisen pressure p = p_c(rho) + Gamma(rho) rho (e - e_c)."""
    e = np.asarray(e, dtype=float)
    e_c = np.asarray(e_c, dtype=float)
    if not (np.all(np.isfinite(e)) and np.all(np.isfinite(e_c))):
        raise ValueError("energies must be finite")
    rho = _check_density(rho)
    return cold_pressure(m, rho) + gruneisen(m, rho) * rho * (e - e_c)


def temperature_from_state(m: MaterialModel, e, e_c):
    """Calorific temperature T = T0 + (e - e_c)/cv."""
    return m.T0 + (np.asarray(e, dtype=float) - np.asarray(e_c, dtype=float)) / m.cv


# --- hydrodynamic cold energy -------------------------------------------
#
# e_c,hydro(rho) = e0 + integral_{rho0}^{rho} p_c(r)/r^2 dr.  The
# Birch-Murnaghan integrand is a sum of powers of rho/rho0, so the
# integral has a closed-form antiderivative; the solver evaluates it
# exactly at O(1) per cell (no tabulation needed).


def _cold_energy_antiderivative(m: MaterialModel, x):
    """F(x) with e_c,hydro = e0 + (3 K0 / 2 rho0) (F(x) - F(1)), x = rho/rho0."""
    xi = 0.75 * (m.K0p - 4.0)
    x23 = np.cbrt(x) ** 2
    x43 = x23 * x23
    return (0.75 * x43 - 1.5 * x23
            + xi * (0.5 * x * x - 1.5 * x43 + 1.5 * x23))


def cold_energy_hydro(m: MaterialModel, rho):
    """Hydrodynamic cold compression energy e0 + int p_c/rho^2 drho.

    Evaluated from the closed-form antiderivative of the cold curve
    (exact; equals adaptive quadrature to round-off).
    """
    rho = _check_density(rho)
    x = rho / m.rho0
    f1 = _cold_energy_antiderivative(m, 1.0)
    return m.e0 + 1.5 * m.K0 / m.rho0 * (_cold_energy_antiderivative(m, x) - f1)


def bulk_sound_speed(m: MaterialModel, rho, G):
    """Longitudinal wave speed sqrt(max(0, dp_c/drho) + (4/3) G / rho)."""
    rho = _check_density(rho)
    dpdrho = np.maximum(cold_pressure_derivative(m, rho), 0.0)
    return np.sqrt(dpdrho + (4.0 / 3.0) * np.asarray(G, dtype=float) / rho)
