"""Physics-driven metrics for comparing snapshot series.

All operations are pure and work on :class:`~poreshock.dataset.SnapshotSeries`
pairs (prediction vs. ground truth) or singletons, in physical units.
Coordinates follow the pixel convention: cell (j, i) sits at
(x, y) = (i dx, j dx).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .dataset import CHANNELS, SnapshotSeries

__all__ = [
    "BandMetrics",
    "SpectrumError",
    "rollout_rmse",
    "field_pdf",
    "pore_collapse_time",
    "pore_area_history",
    "vertical_cut",
    "dominant_band",
    "most_prominent_band_frame",
    "radial_power_spectrum",
    "spectrum_relative_error",
    "haar_detail_subbands",
    "haar_highfreq_energy",
    "haar_loss",
    "lp_error",
    "measure_shock_speed",
]


def _check_pair(pred: SnapshotSeries, truth: SnapshotSeries):
    if (pred.nx, pred.ny, pred.n_frames) != (truth.nx, truth.ny, truth.n_frames):
        raise ValueError("series shapes/frame counts do not match")


def rollout_rmse(pred: SnapshotSeries, truth: SnapshotSeries) -> dict:
    """Per-channel RMSE over every frame and cell, in physical units."""
    _check_pair(pred, truth)
    if pred.n_frames == 0:
        raise ValueError("empty series")
    sq = np.zeros(len(CHANNELS))
    count = 0
    for fp, ft in zip(pred.frames, truth.frames):
        d = fp - ft
        sq += np.sum(d * d, axis=(1, 2))
        count += fp.shape[1] * fp.shape[2]
    return {name: float(np.sqrt(sq[k] / count)) for k, name in enumerate(CHANNELS)}


def field_pdf(series: SnapshotSeries, channel: str, frame_index: int,
              n_bins: int = 100, lo: float | None = None,
              hi: float | None = None):
    """Normalized histogram density of one channel at one frame.

    Pass explicit (lo, hi) so two compared series share bin edges.
    Returns (edges, density) with sum(density * diff(edges)) == 1.
    """
    values = series.channel(channel, frame_index).ravel()
    if values.size == 0:
        raise ValueError("empty frame")
    if lo is None:
        lo = float(values.min())
    if hi is None:
        hi = float(values.max())
    if hi <= lo:
        hi = lo + 1.0
    density, edges = np.histogram(values, bins=n_bins, range=(lo, hi), density=True)
    return edges, density


def pore_area_history(series: SnapshotSeries, threshold: float = 0.5) -> np.ndarray:
    """Pore area (m^2) per frame: connected mu-below-threshold regions that
    do not touch the domain boundary (excludes the open vacuum band).
    """
    areas = np.empty(series.n_frames)
    cell = series.dx ** 2
    for k in range(series.n_frames):
        hole = series.channel("mu", k) < threshold
        labels, n = ndimage.label(hole)
        if n == 0:
            areas[k] = 0.0
            continue
        edge_labels = np.unique(np.concatenate([
            labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]))
        keep = np.setdiff1d(np.arange(1, n + 1), edge_labels)
        areas[k] = cell * sum(int(np.sum(labels == lab)) for lab in keep)
    return areas


def pore_collapse_time(series: SnapshotSeries,
                       collapse_fraction: float = 0.01) -> Optional[int]:
    """First frame where the (bounded) pore area falls to the given
    fraction of its initial value; None if it never does.
    """
    areas = pore_area_history(series)
    if areas[0] <= 0.0:
        return None
    below = np.nonzero(areas <= collapse_fraction * areas[0])[0]
    return int(below[0]) if below.size else None


def vertical_cut(series: SnapshotSeries, frame: int, x: float,
                 y_range: tuple, channel: str = "T"):
    """Sample one channel down the nearest cell column.

    ``x`` picks column round(x/dx); the samples are the cell centers
    strictly inside the open interval ``y_range`` (meters).  Returns
    (y, values).
    """
    dx = series.dx
    col = int(round(x / dx))
    if not 0 <= col < series.nx:
        raise ValueError(f"x = {x} is outside the domain")
    y_lo, y_hi = y_range
    eps = 1e-9
    j_lo = int(np.floor(y_lo / dx + eps)) + 1
    j_hi = int(np.floor(y_hi / dx - eps))
    if j_lo < 0 or j_hi >= series.ny or j_hi < j_lo:
        raise ValueError(f"y range {y_range} is outside the domain")
    js = np.arange(j_lo, j_hi + 1)
    values = series.channel(channel, frame)[js, col]
    return js * dx, values.copy()


@dataclass(frozen=True)
class BandMetrics:
    """Dominant band descriptors extracted from a 1D temperature profile."""

    y_peak: float        # m
    width: float         # m, full width at half the above-background excess
    delta_t: float       # K, peak minus background
    background: float    # K, median of the profile

    def __post_init__(self):
        if self.width <= 0.0 or self.delta_t < 0.0:
            raise ValueError("band metrics out of range")


def dominant_band(y: np.ndarray, values: np.ndarray,
                  min_contrast: float = 20.0) -> Optional[BandMetrics]:
    """Locate the dominant peak of a profile against its median background.

    Width is the FWHM of the above-background excess with linear
    interpolation between samples.  Profiles whose contrast falls below
    ``min_contrast`` return None (the "Fail" label).
    """
    y = np.asarray(y, dtype=float)
    values = np.asarray(values, dtype=float)
    if y.size < 8:
        raise ValueError("profile too short")
    background = float(np.median(values))
    k_peak = int(np.argmax(values))
    delta_t = float(values[k_peak] - background)
    if delta_t < min_contrast:
        return None

    half = background + 0.5 * delta_t

    def cross(direction):
        k = k_peak
        while 0 <= k + direction < values.size and values[k + direction] >= half:
            k += direction
        if not 0 <= k + direction < values.size:
            return y[k]  # ran off the profile; use its end
        y0, y1 = y[k], y[k + direction]
        v0, v1 = values[k], values[k + direction]
        return y0 + (half - v0) / (v1 - v0) * (y1 - y0)

    left = cross(-1)
    right = cross(+1)
    return BandMetrics(y_peak=float(y[k_peak]), width=float(right - left),
                       delta_t=delta_t, background=background)


def most_prominent_band_frame(series: SnapshotSeries, x: float, y_range: tuple,
                              min_contrast: float = 20.0) -> Optional[int]:
    """Frame maximizing the dominant-band contrast along the cut; None if
    no frame shows a band."""
    best, best_dt = None, 0.0
    for k in range(series.n_frames):
        yy, tt = vertical_cut(series, k, x, y_range)
        bm = dominant_band(yy, tt, min_contrast)
        if bm is not None and bm.delta_t > best_dt:
            best, best_dt = k, bm.delta_t
    return best


# --- spectra ---------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumError:
    """Per-bin relative error of an isotropically binned power spectrum."""

    wavenumber: np.ndarray   # bin centers, rad/m, strictly increasing
    rel_error: np.ndarray    # dimensionless, >= 0

    def scales(self) -> np.ndarray:
        """Spatial scale 2 pi / k for each bin (m)."""
        return 2.0 * np.pi / self.wavenumber


def _radial_bins(shape, dx):
    ny, nx = shape
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=dx)
    ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=dx)
    kmag = np.sqrt(kx[None, :] ** 2 + ky[:, None] ** 2)
    dk = 2.0 * np.pi / (max(nx, ny) * dx)
    index = np.floor(kmag / dk).astype(int)
    return index, dk


def radial_power_spectrum(frame: np.ndarray, dx: float):
    """Isotropically binned power of the 2D DFT.

    Power is |F|^2 / N with N the cell count, so the binned total equals
    N times the mean squared field value (Parseval).  Returns
    (bin centers, binned power).
    """
    frame = np.asarray(frame, dtype=float)
    power = np.abs(np.fft.fft2(frame)) ** 2 / frame.size
    index, dk = _radial_bins(frame.shape, dx)
    n_bins = int(index.max()) + 1
    binned = np.bincount(index.ravel(), weights=power.ravel(), minlength=n_bins)
    centers = (np.arange(n_bins) + 0.5) * dk
    return centers, binned


def spectrum_relative_error(pred_frame: np.ndarray, truth_frame: np.ndarray,
                            dx: float, floor: float = 1e-12) -> SpectrumError:
    """Relative error |E_pred - E_truth| / E_truth per wavenumber bin.

    Bins holding less than ``floor`` of the truth's total power are
    omitted.
    """
    pred_frame = np.asarray(pred_frame, dtype=float)
    truth_frame = np.asarray(truth_frame, dtype=float)
    if pred_frame.shape != truth_frame.shape:
        raise ValueError("frames must share one shape")
    k, e_pred = radial_power_spectrum(pred_frame, dx)
    _, e_truth = radial_power_spectrum(truth_frame, dx)
    total = float(np.sum(e_truth))
    keep = e_truth > floor * total
    rel = np.abs(e_pred[keep] - e_truth[keep]) / e_truth[keep]
    return SpectrumError(wavenumber=k[keep], rel_error=rel)


# --- Haar detail metrics ---------------------------------------------------


def haar_detail_subbands(frame: np.ndarray):
    """One-level orthonormal 2D Haar transform; returns (LH, HL, HH)."""
    frame = np.asarray(frame, dtype=float)
    ny, nx = frame.shape
    if ny % 2 or nx % 2:
        raise ValueError("frame dimensions must be even for the Haar transform")
    a = frame[0::2, 0::2]
    b = frame[0::2, 1::2]
    c = frame[1::2, 0::2]
    d = frame[1::2, 1::2]
    lh = 0.5 * (a - b + c - d)
    hl = 0.5 * (a + b - c - d)
    hh = 0.5 * (a - b - c + d)
    return lh, hl, hh


def haar_highfreq_energy(frame: np.ndarray) -> float:
    """Sum over the three detail subbands of their mean absolute value."""
    return float(sum(np.mean(np.abs(sub)) for sub in haar_detail_subbands(frame)))


def haar_loss(pred_frame: np.ndarray, truth_frame: np.ndarray) -> float:
    """Mean absolute detail-coefficient difference, summed over subbands."""
    subs_p = haar_detail_subbands(pred_frame)
    subs_t = haar_detail_subbands(truth_frame)
    return float(sum(np.mean(np.abs(sp - st)) for sp, st in zip(subs_p, subs_t)))


def lp_error(pred, truth, p: float) -> float:
    """Generalized Lp error (mean |pred - truth|^p)^(1/p); p >= 1."""
    if p < 1.0:
        raise ValueError("p must be at least 1")
    diff = np.abs(np.asarray(pred, dtype=float) - np.asarray(truth, dtype=float))
    peak = float(diff.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    # factor out the peak so large p does not overflow
    return peak * float(np.mean((diff / peak) ** p)) ** (1.0 / p)


# --- shock speed -----------------------------------------------------------


def measure_shock_speed(series: SnapshotSeries, y_max: float | None = None,
                        frames: slice | None = None):
    """Wall-frame and material-frame shock speed from the pressure front.

    Tracks the y-position of the steepest |dp/dy| along the vertical
    centerline over the requested frames (those with a detectable,
    in-window front), then least-squares fits the slope.  Returns
    (u_wall, u_shock) with u_shock = u_wall + |v0|.
    """
    col = series.nx // 2
    sel = range(series.n_frames)[frames if frames is not None else slice(None)]
    times, fronts, grads = [], [], []
    for k in sel:
        prof = series.channel("p", k)[:, col]
        if prof.size < 3:
            raise ValueError("column too short to locate a front")
        dpdy = np.abs(np.gradient(prof, series.dx))
        j = int(np.argmax(dpdy))
        times.append(k * series.dt_snap)
        fronts.append(j * series.dx)
        grads.append(dpdy[j])
    times = np.array(times)
    fronts = np.array(fronts)
    grads = np.array(grads)

    usable = grads > 1e-6 * (grads.max() if grads.max() > 0 else 1.0)
    if y_max is not None:
        usable &= fronts <= y_max
    if int(np.sum(usable)) < 3:
        raise ValueError("fewer than 3 usable frames to fit a front trajectory")
    slope = np.polyfit(times[usable], fronts[usable], 1)[0]
    u_wall = float(slope)
    return u_wall, u_wall + abs(series.v0)
