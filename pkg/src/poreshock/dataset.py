"""Snapshot series, normalization, velocity splits, and the SHRB container.

A series is the unit of exchange between the simulator and external
models: frames of the five channels [T, p, mu, U, V] on the output grid,
2.5 ps apart by default.  Pixel (j, i) of a frame sits at physical
coordinates (x, y) = (i dx, j dx) - the same convention the analysis
metrics use.

Frames are held in float64 in memory but quantized to float32 on record
(the container stores f32), so record -> write -> read round trips are
bitwise.  Vacuum cells carry T = 0 and p = 0 by convention.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CHANNELS",
    "SnapshotSeries",
    "NormStats",
    "VelocitySplit",
    "FormatError",
    "record",
    "fit_norm",
    "normalize",
    "denormalize",
    "split_velocities",
    "write_series",
    "read_series",
    "write_manifest",
    "read_manifest",
]

CHANNELS = ("T", "p", "mu", "U", "V")

MAGIC = b"SHRB"
VERSION = 1
_HEADER = struct.Struct("<4sIIIII")  # magic, version, nx, ny, n_channels, n_frames
_HEADER_FLOATS = struct.Struct("<ddd")  # dx_m, dt_snap_s, v0_ms
HEADER_SIZE = _HEADER.size + _HEADER_FLOATS.size + 5 * 16  # = 128
_MAX_CELLS = 1 << 28  # sanity cap against corrupt headers


class FormatError(ValueError):
    """Malformed SHRB container; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class SnapshotSeries:
    """Time-ordered 5-channel frames with grid metadata."""

    nx: int
    ny: int
    dx: float            # m
    dt_snap: float       # s
    v0: float            # impact velocity tag, m/s
    frames: list = field(default_factory=list)  # each (5, ny, nx) float64
    channels: tuple = CHANNELS

    def __post_init__(self):
        if tuple(self.channels) != CHANNELS:
            raise ValueError(f"channel order must be {CHANNELS}")
        for k, f in enumerate(self.frames):
            if f.shape != (5, self.ny, self.nx):
                raise ValueError(f"frame {k} has shape {f.shape}, "
                                 f"expected (5, {self.ny}, {self.nx})")

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    def times(self) -> np.ndarray:
        return np.arange(self.n_frames) * self.dt_snap

    def channel_index(self, name: str) -> int:
        return CHANNELS.index(name)

    def channel(self, name: str, frame: int) -> np.ndarray:
        return self.frames[frame][self.channel_index(name)]

    def stacked(self) -> np.ndarray:
        return np.stack(self.frames, axis=0)


def record(state) -> np.ndarray:
    """Copy (T, p, mu, U, V) off a solver state into one frame.

    Values are snapped to float32 precision (the dataset product is f32),
    then kept as float64 so later arithmetic stays exact.
    """
    frame = np.stack([state.T, state.p, state.mu, state.U, state.V], axis=0)
    return frame.astype(np.float32).astype(np.float64)


@dataclass(frozen=True)
class NormStats:
    """Normalization constants; computed from the training split only."""

    t_min: float
    t_max: float
    p_min: float
    p_max: float
    vel_scale: float

    def __post_init__(self):
        if not self.t_max > self.t_min:
            raise ValueError("t_max must exceed t_min")
        if not self.p_max > self.p_min:
            raise ValueError("p_max must exceed p_min")
        if not self.vel_scale > 0.0:
            raise ValueError("vel_scale must be positive")


def fit_norm(training) -> NormStats:
    """Min-max stats for T and p plus one shared velocity scale.

    The velocity scale is a single scalar (the largest |U| or |V| seen) so
    both components map into [-1, 1] with the vector direction preserved.
    """
    t_min = p_min = np.inf
    t_max = p_max = -np.inf
    vel = 0.0
    n = 0
    for series in training:
        for f in series.frames:
            t_min = min(t_min, float(f[0].min()))
            t_max = max(t_max, float(f[0].max()))
            p_min = min(p_min, float(f[1].min()))
            p_max = max(p_max, float(f[1].max()))
            vel = max(vel, float(np.abs(f[3]).max()), float(np.abs(f[4]).max()))
        n += 1
    if n == 0:
        raise ValueError("training set is empty")
    return NormStats(t_min, t_max, p_min, p_max, vel)


def _transform(series: SnapshotSeries, stats: NormStats, forward: bool) -> SnapshotSeries:
    t_span = stats.t_max - stats.t_min
    p_span = stats.p_max - stats.p_min
    out = []
    for f in series.frames:
        g = f.copy()
        if forward:
            g[0] = (f[0] - stats.t_min) / t_span
            g[1] = (f[1] - stats.p_min) / p_span
            g[3] = f[3] / stats.vel_scale
            g[4] = f[4] / stats.vel_scale
        else:
            g[0] = f[0] * t_span + stats.t_min
            g[1] = f[1] * p_span + stats.p_min
            g[3] = f[3] * stats.vel_scale
            g[4] = f[4] * stats.vel_scale
        out.append(g)
    return SnapshotSeries(series.nx, series.ny, series.dx, series.dt_snap,
                          series.v0, out)


def normalize(series: SnapshotSeries, stats: NormStats) -> SnapshotSeries:
    """T, p min-max to [0,1]; U, V scaled to [-1,1]; mu untouched."""
    return _transform(series, stats, forward=True)


def denormalize(series: SnapshotSeries, stats: NormStats) -> SnapshotSeries:
    """Exact inverse of :func:`normalize`."""
    return _transform(series, stats, forward=False)


# --- velocity split -------------------------------------------------------

DEFAULT_SPLIT_SEED = 29177

V_LO, V_HI, V_STEP = 720, 2880, 20
N_TRAIN, N_VAL = 70, 18


@dataclass(frozen=True)
class VelocitySplit:
    train: tuple
    val: tuple
    test: tuple

    @property
    def pool(self) -> tuple:
        return tuple(sorted(self.train + self.val))

    def label(self, v0: float) -> str:
        v = int(round(v0))
        if v in self.test:
            return "test"
        if v in self.train:
            return "train"
        if v in self.val:
            return "val"
        return "extra"


def split_velocities(seed: int = DEFAULT_SPLIT_SEED) -> VelocitySplit:
    """The 70/18/26 train/validation/test impact-velocity partition.

    Training-validation pool: 720..2880 m/s in 20 m/s steps with the
    multiples of 100 removed (88 velocities), shuffled by ``seed`` into 70
    train + 18 validation.  Hold-out test: the in-range multiples of 100
    plus 500-700 and 2900-3080 m/s extrapolation cases (26 velocities).
    """
    everything = list(range(V_LO, V_HI + 1, V_STEP))
    pool = [v for v in everything if v % 100 != 0]
    test = sorted([v for v in everything if v % 100 == 0]
                  + [500, 600, 700]
                  + [v for v in range(2900, 3081) if v % 100 == 0])
    rng = random.Random(seed)
    shuffled = pool[:]
    rng.shuffle(shuffled)
    train = tuple(sorted(shuffled[:N_TRAIN]))
    val = tuple(sorted(shuffled[N_TRAIN:N_TRAIN + N_VAL]))
    return VelocitySplit(train=train, val=val, test=tuple(test))


# --- SHRB container -------------------------------------------------------
#
# Layout (little-endian):
#   offset   0: magic "SHRB"
#   offset   4: u32 version (= 1)
#   offset   8: u32 nx, ny, n_channels (= 5), n_frames
#   offset  24: f64 dx_m, dt_snap_s, v0_ms
#   offset  48: 5 x 16-byte space-padded ASCII channel names
#   offset 128: n_frames blocks, each channel-major row-major float32
#               (5 * ny * nx * 4 bytes per block)


def write_series(series: SnapshotSeries, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, series.nx, series.ny,
                              len(CHANNELS), series.n_frames))
        fh.write(_HEADER_FLOATS.pack(series.dx, series.dt_snap, series.v0))
        for name in CHANNELS:
            fh.write(name.encode("ascii").ljust(16))
        for f in series.frames:
            fh.write(np.ascontiguousarray(f, dtype="<f4").tobytes())


def read_series(path) -> SnapshotSeries:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError("truncated header", len(head))
        magic, version, nx, ny, n_ch, n_frames = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}", 0)
        if version != VERSION:
            raise FormatError(f"unsupported version {version}", 4)
        if n_ch != len(CHANNELS):
            raise FormatError(f"expected {len(CHANNELS)} channels, got {n_ch}", 16)
        if nx < 1 or ny < 1 or nx * ny > _MAX_CELLS:
            raise FormatError(f"implausible grid {nx} x {ny}", 8)

        floats = fh.read(_HEADER_FLOATS.size)
        if len(floats) < _HEADER_FLOATS.size:
            raise FormatError("truncated header", _HEADER.size + len(floats))
        dx, dt_snap, v0 = _HEADER_FLOATS.unpack(floats)

        names_raw = fh.read(5 * 16)
        if len(names_raw) < 5 * 16:
            raise FormatError("truncated channel names", 48 + len(names_raw))
        names = tuple(names_raw[i * 16:(i + 1) * 16].decode("ascii").strip()
                      for i in range(5))
        if names != CHANNELS:
            raise FormatError(f"unexpected channel names {names}", 48)

        frame_bytes = n_ch * ny * nx * 4
        frames = []
        for k in range(n_frames):
            blob = fh.read(frame_bytes)
            if len(blob) < frame_bytes:
                raise FormatError(f"truncated frame {k}",
                                  HEADER_SIZE + k * frame_bytes + len(blob))
            arr = np.frombuffer(blob, dtype="<f4").reshape(n_ch, ny, nx)
            frames.append(arr.astype(np.float64))
        if fh.read(1):
            raise FormatError("trailing bytes after last frame",
                              HEADER_SIZE + n_frames * frame_bytes)
    return SnapshotSeries(nx=nx, ny=ny, dx=dx, dt_snap=dt_snap, v0=v0, frames=frames)


def expected_file_size(nx: int, ny: int, n_frames: int) -> int:
    return HEADER_SIZE + n_frames * 5 * ny * nx * 4


def read_header(path) -> dict:
    """Header fields exactly as stored, without loading frames."""
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
    if len(head) < HEADER_SIZE:
        raise FormatError("truncated header", len(head))
    magic, version, nx, ny, n_ch, n_frames = _HEADER.unpack(head[:_HEADER.size])
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    dx, dt_snap, v0 = _HEADER_FLOATS.unpack(head[_HEADER.size:_HEADER.size + 24])
    names = tuple(head[48 + i * 16:48 + (i + 1) * 16].decode("ascii").strip()
                  for i in range(5))
    return {"magic": magic.decode("ascii"), "version": version, "nx": nx,
            "ny": ny, "n_channels": n_ch, "n_frames": n_frames, "dx_m": dx,
            "dt_snap_s": dt_snap, "v0_ms": v0, "channels": names}


# --- manifest -------------------------------------------------------------


def write_manifest(path, entries, stats: NormStats | None = None,
                   seed: int | None = None) -> None:
    """Plain-text key=value manifest for a set of series files.

    Each entry is a dict with keys path, v0, split, and optionally status.
    """
    lines = []
    if seed is not None:
        lines.append(f"seed = {seed}")
    if stats is not None:
        lines.append(f"norm.t_min = {stats.t_min!r}")
        lines.append(f"norm.t_max = {stats.t_max!r}")
        lines.append(f"norm.p_min = {stats.p_min!r}")
        lines.append(f"norm.p_max = {stats.p_max!r}")
        lines.append(f"norm.vel_scale = {stats.vel_scale!r}")
    for i, e in enumerate(entries):
        lines.append(f"series.{i}.path = {e['path']}")
        lines.append(f"series.{i}.v0 = {e['v0']}")
        lines.append(f"series.{i}.split = {e['split']}")
        lines.append(f"series.{i}.status = {e.get('status', 'ok')}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    """Parse a manifest back into {seed, stats, entries}."""
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()

    seed = int(raw["seed"]) if "seed" in raw else None
    stats = None
    if "norm.t_min" in raw:
        stats = NormStats(
            t_min=float(raw["norm.t_min"]), t_max=float(raw["norm.t_max"]),
            p_min=float(raw["norm.p_min"]), p_max=float(raw["norm.p_max"]),
            vel_scale=float(raw["norm.vel_scale"]))
    entries = []
    i = 0
    while f"series.{i}.path" in raw:
        entries.append({
            "path": raw[f"series.{i}.path"],
            "v0": float(raw[f"series.{i}.v0"]),
            "split": raw[f"series.{i}.split"],
            "status": raw.get(f"series.{i}.status", "ok"),
        })
        i += 1
    return {"seed": seed, "stats": stats, "entries": entries}
