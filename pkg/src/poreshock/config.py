"""Plain-text run configuration: flat key = value in four sections.

Material constants are given in SI (they are table literals); geometry and
cadence keys speak the paper units (nm, ps, GPa) with unit-suffixed names.
Unknown keys are rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import os

from . import materials as mat
from .solver import ConfigError, RunConfig
from .units import gpa_to_pa, nm_to_m, ps_to_s

__all__ = ["load_config", "default_config_text", "ConfigError"]

_MATERIAL_KEYS = {
    "rho0": "rho0", "k0": "K0", "k0p": "K0p", "g0": "G0", "a1": "a1", "a2": "a2",
    "gamma0": "Gamma0", "gamma1": "gamma1", "gamma2": "gamma2",
    "jc_a": "A", "jc_b": "B", "jc_n": "n", "jc_m": "m", "jc_c": "C",
    "epsdot0": "epsdot0", "tref": "Tref", "tmelt_ref": "Tmelt_ref",
    "pref": "pref", "a_melt": "a_melt", "c_melt": "c_melt",
    "cv": "cv", "chi": "chi", "t0": "T0", "e0": "e0", "beta": "beta",
}

_BOOL = {"on": True, "off": False, "true": True, "false": False,
         "yes": True, "no": False, "1": True, "0": False}


def _get_bool(value: str, key: str) -> bool:
    try:
        return _BOOL[value.strip().lower()]
    except KeyError:
        raise ConfigError(f"{key} must be on/off, got {value!r}") from None


def _get_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}") from None


def _get_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None


def load_config(path) -> RunConfig:
    """Parse a config file into a RunConfig (impact velocity comes later)."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse {path}: {err}") from None

    known_sections = {"material", "geometry", "solver", "output"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    material_overrides = {}
    if parser.has_section("material"):
        for key, value in parser.items("material"):
            if key not in _MATERIAL_KEYS:
                raise ConfigError(f"unknown material key {key!r}")
            material_overrides[_MATERIAL_KEYS[key]] = _get_float(value, key)
    try:
        material = mat.rdx().with_overrides(**material_overrides)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    cfg = RunConfig(material=material)

    geo = dict(parser.items("geometry")) if parser.has_section("geometry") else {}
    sol = dict(parser.items("solver")) if parser.has_section("solver") else {}
    out = dict(parser.items("output")) if parser.has_section("output") else {}

    def take(section, key):
        return section.pop(key, None)

    v = take(geo, "nx")
    if v is not None:
        cfg.nx = _get_int(v, "nx")
    v = take(geo, "ny")
    if v is not None:
        cfg.ny = _get_int(v, "ny")
    v = take(geo, "dx_nm")
    if v is not None:
        cfg.dx = nm_to_m(_get_float(v, "dx_nm"))
    v = take(geo, "pore_diameter_nm")
    if v is not None:
        cfg.pore_diameter = nm_to_m(_get_float(v, "pore_diameter_nm"))
    cx = take(geo, "pore_center_x_nm")
    cy = take(geo, "pore_center_y_nm")
    if (cx is None) != (cy is None):
        raise ConfigError("pore_center_x_nm and pore_center_y_nm must be given together")
    if cx is not None:
        cfg.pore_center = (nm_to_m(_get_float(cx, "pore_center_x_nm")),
                           nm_to_m(_get_float(cy, "pore_center_y_nm")))
    v = take(geo, "block_height_fraction")
    if v is not None:
        cfg.block_height_fraction = _get_float(v, "block_height_fraction")
    if geo:
        raise ConfigError(f"unknown geometry keys: {sorted(geo)}")

    v = take(sol, "cfl")
    if v is not None:
        cfg.cfl = _get_float(v, "cfl")
    v = take(sol, "t_init_k")
    if v is not None:
        cfg.t_init = _get_float(v, "t_init_k")
    v = take(sol, "strength")
    if v is not None:
        cfg.strength = _get_bool(v, "strength")
    v = take(sol, "conduction")
    if v is not None:
        cfg.conduction = _get_bool(v, "conduction")
    v = take(sol, "conduction_rk4")
    if v is not None:
        cfg.conduction_rk4 = _get_bool(v, "conduction_rk4")
    v = take(sol, "second_order")
    if v is not None:
        cfg.second_order = _get_bool(v, "second_order")
    v = take(sol, "boundary")
    if v is not None:
        cfg.boundary = v.strip()
    v = take(sol, "mu_vacuum")
    if v is not None:
        cfg.mu_vacuum = _get_float(v, "mu_vacuum")
    v = take(sol, "mu_solid")
    if v is not None:
        cfg.mu_solid = _get_float(v, "mu_solid")
    v = take(sol, "p_floor_gpa")
    if v is not None:
        cfg.p_floor = gpa_to_pa(_get_float(v, "p_floor_gpa"))
    if sol:
        raise ConfigError(f"unknown solver keys: {sorted(sol)}")

    v = take(out, "snapshot_dt_ps")
    if v is not None:
        cfg.snapshot_dt = ps_to_s(_get_float(v, "snapshot_dt_ps"))
    n_snap = take(out, "n_snapshots")
    t_end = take(out, "t_end_ps")
    if n_snap is not None and t_end is not None:
        raise ConfigError("give n_snapshots or t_end_ps, not both")
    if n_snap is not None:
        cfg.n_snapshots = _get_int(n_snap, "n_snapshots")
    elif t_end is not None:
        cfg.n_snapshots = int(round(ps_to_s(_get_float(t_end, "t_end_ps"))
                                    / cfg.snapshot_dt)) + 1
    if out:
        raise ConfigError(f"unknown output keys: {sorted(out)}")

    cfg.validate()
    return cfg


def default_config_text() -> str:
    """A commented config matching the built-in defaults."""
    return """\
# poreshock run configuration (defaults shown)

[material]
# RDX constants; all overridable.  rho0 and beta are literature defaults,
# not calibrated values - adjust here if needed.
rho0 = 1800.0
beta = 0.9

[geometry]
nx = 128
ny = 256
dx_nm = 1.1719
pore_diameter_nm = 50.0
# pore_center_x_nm / pore_center_y_nm default to centered-in-x,
# mid-height of the block
block_height_fraction = 0.85

[solver]
cfl = 0.4
# initial block temperature; defaults to the 298 K EOS reference so the
# quiescent block starts in mechanical equilibrium
t_init_k = 298.0
strength = on
conduction = on
second_order = off
boundary = reverse_ballistic
p_floor_gpa = -0.5

[output]
snapshot_dt_ps = 2.5
n_snapshots = 40
"""
