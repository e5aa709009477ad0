import numpy as np
import pytest

from poreshock import dataset
from poreshock.materials import rdx
from poreshock.solver import RunConfig


@pytest.fixture(scope="session")
def m():
    """The bundled RDX material."""
    return rdx()


@pytest.fixture
def tiny_cfg():
    """A small, fast pore-collapse configuration for solver tests."""
    return RunConfig(up=1800.0, nx=24, ny=48, dx=1.1719e-9,
                     pore_diameter=8e-9, block_height_fraction=0.8,
                     snapshot_dt=0.5e-12, n_snapshots=8)


def make_series(frames, dx=1.1719e-9, dt_snap=2.5e-12, v0=0.0):
    """Series from a list of (5, ny, nx) arrays, f32-quantized like record()."""
    frames = [np.asarray(f, dtype=np.float32).astype(np.float64) for f in frames]
    ny, nx = frames[0].shape[1:]
    return dataset.SnapshotSeries(nx=nx, ny=ny, dx=dx, dt_snap=dt_snap, v0=v0,
                                  frames=frames)


@pytest.fixture
def series_factory():
    return make_series
