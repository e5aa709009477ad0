"""Uniform-grid 2D fields, boundary padding, and shared stencil operators.

Arrays are row-major with shape ``(ny, nx)``: axis 0 is y, axis 1 is x.
Cell centers sit at physical coordinates ``origin + index * dx`` (the same
pixel convention the rasterized datasets use).  All stencil functions
operate on plain ndarrays with an explicit ``dx``; :class:`Field2D` is the
metadata-carrying container used where grid geometry travels with the data.

Padding supports a distinct mode per side - most array frameworks only pad
uniformly, and several boundary treatments here need mixed modes - so ghost
regions are assembled explicitly rather than delegated to ``np.pad``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Field2D",
    "Edge",
    "Constant",
    "REPLICATE",
    "REFLECT",
    "CIRCULAR",
    "pad",
    "crop",
    "upwind_advect",
    "gradient",
    "divergence",
    "laplacian",
    "rk4_integrate",
    "IntegrationError",
]


class Edge(Enum):
    """Value-free padding modes; Constant carries its fill value separately."""

    REPLICATE = "replicate"   # copy edge cell (zero one-sided gradient)
    REFLECT = "reflect"       # mirror excluding the edge cell (zero centered gradient)
    CIRCULAR = "circular"     # periodic wrap


REPLICATE = Edge.REPLICATE
REFLECT = Edge.REFLECT
CIRCULAR = Edge.CIRCULAR


@dataclass(frozen=True)
class Constant:
    value: float


PadMode = Edge | Constant


@dataclass
class Field2D:
    """Scalar field on a uniform grid with cell size dx (meters)."""

    nx: int
    ny: int
    dx: float
    data: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must have at least one cell per direction")
        if self.dx <= 0.0:
            raise ValueError("cell size must be positive")
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (self.ny, self.nx):
            raise ValueError(f"data shape {self.data.shape} != (ny={self.ny}, nx={self.nx})")

    @classmethod
    def from_array(cls, data, dx, origin=(0.0, 0.0)) -> "Field2D":
        data = np.asarray(data, dtype=float)
        ny, nx = data.shape
        return cls(nx=nx, ny=ny, dx=dx, data=data, origin=origin)

    @classmethod
    def full(cls, nx, ny, dx, value=0.0, origin=(0.0, 0.0)) -> "Field2D":
        return cls(nx=nx, ny=ny, dx=dx, data=np.full((ny, nx), float(value)), origin=origin)

    def validate(self):
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite values")

    def copy(self) -> "Field2D":
        return Field2D(self.nx, self.ny, self.dx, self.data.copy(), self.origin)


def _normalize_modes(modes) -> tuple:
    """Accept a single mode or a (x_lo, x_hi, y_lo, y_hi) tuple."""
    if isinstance(modes, (Edge, Constant)):
        return (modes,) * 4
    modes = tuple(modes)
    if len(modes) != 4:
        raise ValueError("modes must be one PadMode or a 4-tuple (x_lo, x_hi, y_lo, y_hi)")
    return modes


def _fill_side(ext, w, n, mode, axis, low):
    """Fill one ghost band of the already-allocated extended array in place."""
    def sl(index):
        return (index, slice(None)) if axis == 0 else (slice(None), index)

    for k in range(1, w + 1):
        dst = w - k if low else w + n - 1 + k
        if isinstance(mode, Constant):
            ext[sl(dst)] = mode.value
            continue
        if mode is Edge.REPLICATE:
            src = w if low else w + n - 1
        elif mode is Edge.REFLECT:
            if w > n - 1:
                raise ValueError(f"reflect padding width {w} exceeds grid extent {n - 1}")
            src = w + k if low else w + n - 1 - k
        elif mode is Edge.CIRCULAR:
            if w > n:
                raise ValueError(f"circular padding width {w} exceeds grid extent {n}")
            src = w + n - k if low else w + k - 1
        else:
            raise TypeError(f"unknown padding mode {mode!r}")
        ext[sl(dst)] = ext[sl(src)]


def pad_array(a: np.ndarray, width: int, modes) -> np.ndarray:
    """Pad a (ny, nx) array by ``width`` ghost cells with per-side modes.

    Sides are filled y first then x, so corner ghosts are the composition
    of the two side modes (same convention as sequential axis padding).
    """
    if width < 1:
        raise ValueError("padding width must be >= 1")
    x_lo, x_hi, y_lo, y_hi = _normalize_modes(modes)
    ny, nx = a.shape
    ext = np.empty((ny + 2 * width, nx + 2 * width), dtype=float)
    ext[width:width + ny, width:width + nx] = a
    # y sides first (operating on the interior columns), then x including corners
    inner_cols = ext[:, width:width + nx]
    _fill_side(inner_cols, width, ny, y_lo, axis=0, low=True)
    _fill_side(inner_cols, width, ny, y_hi, axis=0, low=False)
    _fill_side(ext, width, nx, x_lo, axis=1, low=True)
    _fill_side(ext, width, nx, x_hi, axis=1, low=False)
    return ext


def pad(f: Field2D, width: int, modes) -> Field2D:
    """Ghost-padded copy of a field; see :func:`pad_array` for semantics."""
    ext = pad_array(f.data, width, modes)
    ox, oy = f.origin
    return Field2D(
        nx=f.nx + 2 * width,
        ny=f.ny + 2 * width,
        dx=f.dx,
        data=ext,
        origin=(ox - width * f.dx, oy - width * f.dx),
    )


def crop(f: Field2D, width: int) -> Field2D:
    """Strip ``width`` ghost cells from every side (inverse of pad)."""
    if width < 1:
        raise ValueError("crop width must be >= 1")
    if f.nx <= 2 * width or f.ny <= 2 * width:
        raise ValueError("crop width exceeds field extent")
    ox, oy = f.origin
    return Field2D(
        nx=f.nx - 2 * width,
        ny=f.ny - 2 * width,
        dx=f.dx,
        data=f.data[width:-width, width:-width].copy(),
        origin=(ox + width * f.dx, oy + width * f.dx),
    )


def upwind_tendency(q, u, v, dx, modes=REPLICATE):
    """First-order upwind advection tendency -(u dq/dx + v dq/dy) on arrays.

    Backward difference where the carrying velocity is positive, forward
    where negative, and the centered average at exactly zero (preserves
    mirror symmetry).
    """
    qp = pad_array(q, 1, modes)
    inner = qp[1:-1, 1:-1]
    bwd_x = (inner - qp[1:-1, :-2]) / dx
    fwd_x = (qp[1:-1, 2:] - inner) / dx
    bwd_y = (inner - qp[:-2, 1:-1]) / dx
    fwd_y = (qp[2:, 1:-1] - inner) / dx
    dqdx = np.where(u > 0.0, bwd_x, np.where(u < 0.0, fwd_x, 0.5 * (bwd_x + fwd_x)))
    dqdy = np.where(v > 0.0, bwd_y, np.where(v < 0.0, fwd_y, 0.5 * (bwd_y + fwd_y)))
    return -(u * dqdx + v * dqdy)


def upwind_advect(q: Field2D, u: Field2D, v: Field2D, dx: float | None = None,
                  modes=REPLICATE) -> Field2D:
    """Field wrapper around :func:`upwind_tendency`; shapes must match."""
    if q.data.shape != u.data.shape or q.data.shape != v.data.shape:
        raise ValueError("advected field and velocity components must share one shape")
    if dx is None:
        dx = q.dx
    out = upwind_tendency(q.data, u.data, v.data, dx, modes)
    return Field2D(q.nx, q.ny, dx, out, q.origin)


def _deriv(a, dx, axis):
    """Second-order first derivative: centered interior, one-sided edges."""
    n = a.shape[axis]
    if n == 1:
        return np.zeros_like(a)
    return np.gradient(a, dx, axis=axis, edge_order=2 if n >= 3 else 1)


def gradient(f, dx=None):
    """(df/dx, df/dy) with second-order stencils; accepts Field2D or array."""
    if isinstance(f, Field2D):
        arr, dx = f.data, f.dx if dx is None else dx
        gx = _deriv(arr, dx, axis=1)
        gy = _deriv(arr, dx, axis=0)
        return (Field2D(f.nx, f.ny, dx, gx, f.origin),
                Field2D(f.nx, f.ny, dx, gy, f.origin))
    if dx is None:
        raise ValueError("dx required for array input")
    return _deriv(f, dx, axis=1), _deriv(f, dx, axis=0)


def divergence(fx, fy, dx=None):
    """d(fx)/dx + d(fy)/dy; shapes must match."""
    ax = fx.data if isinstance(fx, Field2D) else fx
    ay = fy.data if isinstance(fy, Field2D) else fy
    if ax.shape != ay.shape:
        raise ValueError("divergence components must share one shape")
    if isinstance(fx, Field2D):
        dx = fx.dx if dx is None else dx
        out = _deriv(ax, dx, axis=1) + _deriv(ay, dx, axis=0)
        return Field2D(fx.nx, fx.ny, dx, out, fx.origin)
    if dx is None:
        raise ValueError("dx required for array input")
    return _deriv(ax, dx, axis=1) + _deriv(ay, dx, axis=0)


def laplacian(f, dx=None):
    """Laplacian as the composition divergence(gradient(f))."""
    gx, gy = gradient(f, dx)
    return divergence(gx, gy, dx)


class IntegrationError(RuntimeError):
    """Non-finite intermediate during time integration; carries the stage."""

    def __init__(self, stage: int):
        super().__init__(f"non-finite values in RK4 stage {stage}")
        self.stage = stage


def _all_finite(state) -> bool:
    try:
        return bool(np.all(np.isfinite(np.asarray(state, dtype=float))))
    except (TypeError, ValueError):
        return True  # exotic state types opt out of the check


def rk4_integrate(state, rhs, dt: float):
    """One classical RK4 step of d(state)/dt = rhs(state).

    Generic over any state supporting addition and scalar multiplication
    (ndarrays, scalars, or user types with those operators).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    k1 = rhs(state)
    if not _all_finite(k1):
        raise IntegrationError(1)
    k2 = rhs(state + k1 * (0.5 * dt))
    if not _all_finite(k2):
        raise IntegrationError(2)
    k3 = rhs(state + k2 * (0.5 * dt))
    if not _all_finite(k3):
        raise IntegrationError(3)
    k4 = rhs(state + k3 * dt)
    if not _all_finite(k4):
        raise IntegrationError(4)
    return state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
