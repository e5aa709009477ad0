"""Pore-collapse shock simulator and analysis toolkit for energetic materials.

The package couples a small 2D Eulerian hydrocode (Mie-Grüneisen EOS,
Johnson-Cook strength, radial-return plasticity, Fourier conduction) with the
dataset plumbing and physics-driven metrics used to evaluate surrogate models
of shear-band formation around collapsing pores.
"""

__version__ = "0.1.0"

from .materials import MaterialModel, rdx
from .solver import RunConfig, SimState
from .dataset import SnapshotSeries, NormStats

__all__ = [
    "MaterialModel",
    "rdx",
    "RunConfig",
    "SimState",
    "SnapshotSeries",
    "NormStats",
]
