"""Analysis reports: delimited text plus a rendered figure per metric.

Every metric writes a UTF-8 tab-separated table (one header line, then
rows) that any external plotting tool can consume, and—unless figures are
disabled—a PNG rendered from the same data next to it.  File stems encode
the metric, impact velocity, and frame.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .units import m_to_nm, pa_to_gpa, s_to_ps

__all__ = [
    "write_table",
    "report_rmse",
    "report_pdf",
    "report_profile",
    "report_band",
    "report_spectrum",
    "report_collapse",
    "report_shock_speed",
    "report_scalars",
]

FIG_DPI = 130


def write_table(path, header, rows) -> str:
    """Write one delimited report: a header line then tab-separated rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(str(h) for h in header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")
    return str(path)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _paths(out_dir, stem):
    os.makedirs(out_dir, exist_ok=True)
    return (os.path.join(out_dir, stem + ".tsv"),
            os.path.join(out_dir, stem + ".png"))


def _save(fig, png_path):
    fig.tight_layout()
    fig.savefig(png_path, dpi=FIG_DPI)
    plt.close(fig)


def report_rmse(rmse: dict, out_dir, stem, figures=True):
    """Per-channel RMSE table (units: K, Pa, -, m/s, m/s) and bar chart."""
    tsv, png = _paths(out_dir, stem)
    units = {"T": "K", "p": "Pa", "mu": "-", "U": "m/s", "V": "m/s"}
    write_table(tsv, ["channel", "rmse", "unit"],
                [(k, v, units.get(k, "")) for k, v in rmse.items()])
    paths = [tsv]
    if figures:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        names = list(rmse)
        ax.bar(range(len(names)), [rmse[k] for k in names], color="steelblue")
        ax.set_xticks(range(len(names)), names)
        if any(v > 0.0 for v in rmse.values()):
            ax.set_yscale("log")
        ax.set_ylabel("rollout RMSE (channel units)")
        _save(fig, png)
        paths.append(png)
    return paths


def report_pdf(edges, densities: dict, channel, out_dir, stem, figures=True):
    """Histogram densities over shared bins; one column per labeled series."""
    tsv, png = _paths(out_dir, stem)
    labels = list(densities)
    header = ["bin_lo", "bin_hi"] + [f"density_{lab}" for lab in labels]
    rows = [(edges[i], edges[i + 1], *(densities[lab][i] for lab in labels))
            for i in range(len(edges) - 1)]
    write_table(tsv, header, rows)
    paths = [tsv]
    if figures:
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        centers = 0.5 * (edges[:-1] + edges[1:])
        for lab in labels:
            ax.step(centers, densities[lab], where="mid", label=lab)
        ax.set_yscale("log")
        ax.set_xlabel(_channel_label(channel))
        ax.set_ylabel("probability density")
        ax.legend()
        _save(fig, png)
        paths.append(png)
    return paths


def _channel_label(channel):
    return {"T": "temperature (K)", "p": "pressure (Pa)", "mu": "volume fraction",
            "U": "x velocity (m/s)", "V": "y velocity (m/s)"}.get(channel, channel)


def report_profile(y, profiles: dict, channel, out_dir, stem, figures=True,
                   bands: dict | None = None):
    """Vertical-cut profiles (y in nm); optionally annotate band metrics."""
    tsv, png = _paths(out_dir, stem)
    labels = list(profiles)
    header = ["y_nm"] + [f"{channel}_{lab}" for lab in labels]
    rows = [(m_to_nm(y[i]), *(profiles[lab][i] for lab in labels))
            for i in range(len(y))]
    write_table(tsv, header, rows)
    paths = [tsv]
    if figures:
        fig, ax = plt.subplots(figsize=(6, 3.4))
        for lab in labels:
            ax.plot(m_to_nm(y), profiles[lab], label=lab)
        if bands:
            for lab, bm in bands.items():
                if bm is not None:
                    ax.axvline(m_to_nm(bm.y_peak), ls="--", lw=0.8, color="gray")
        ax.set_xlabel("y (nm)")
        ax.set_ylabel(_channel_label(channel))
        ax.legend()
        _save(fig, png)
        paths.append(png)
    return paths


def report_band(bands: dict, out_dir, stem, profile=None, figures=True):
    """Dominant-band metrics per labeled series; None renders as Fail."""
    tsv, png = _paths(out_dir, stem)
    rows = []
    for lab, bm in bands.items():
        if bm is None:
            rows.append((lab, "Fail", "Fail", "Fail", "Fail"))
        else:
            rows.append((lab, m_to_nm(bm.y_peak), m_to_nm(bm.width),
                         bm.delta_t, bm.background))
    write_table(tsv, ["series", "y_peak_nm", "width_nm", "delta_T_K",
                      "background_K"], rows)
    paths = [tsv]
    if figures and profile is not None:
        y, values_by_label = profile
        paths += report_profile(y, values_by_label, "T", out_dir, stem + "_profile",
                                figures=True, bands=bands)[1:]
    return paths


def report_spectrum(spec, out_dir, stem, figures=True):
    """Per-bin relative spectral error vs wavenumber and spatial scale."""
    tsv, png = _paths(out_dir, stem)
    rows = [(spec.wavenumber[i], m_to_nm(spec.scales()[i]), spec.rel_error[i])
            for i in range(len(spec.wavenumber))]
    write_table(tsv, ["k_rad_per_m", "scale_nm", "rel_error"], rows)
    paths = [tsv]
    if figures:
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        ax.loglog(m_to_nm(spec.scales()), np.maximum(spec.rel_error, 1e-18))
        ax.invert_xaxis()
        ax.set_xlabel("spatial scale (nm)")
        ax.set_ylabel("relative spectral error")
        _save(fig, png)
        paths.append(png)
    return paths


def report_collapse(times, areas, collapse_index, out_dir, stem, figures=True):
    """Pore area history with the detected collapse frame."""
    tsv, png = _paths(out_dir, stem)
    rows = [(k, s_to_ps(times[k]), areas[k],
             "collapse" if collapse_index is not None and k == collapse_index else "")
            for k in range(len(areas))]
    write_table(tsv, ["frame", "t_ps", "pore_area_m2", "event"], rows)
    paths = [tsv]
    if figures:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(s_to_ps(np.asarray(times)), areas, marker="o", ms=3)
        if collapse_index is not None:
            ax.axvline(s_to_ps(times[collapse_index]), color="crimson", ls="--",
                       label=f"collapse (frame {collapse_index})")
            ax.legend()
        ax.set_xlabel("t (ps)")
        ax.set_ylabel("pore area (m$^2$)")
        _save(fig, png)
        paths.append(png)
    return paths


def report_shock_speed(u_wall, u_shock, v0, out_dir, stem, figures=False):
    tsv, _ = _paths(out_dir, stem)
    write_table(tsv, ["quantity", "value_m_per_s"],
                [("u_wall_frame", u_wall), ("u_shock_material_frame", u_shock),
                 ("impact_velocity", abs(v0))])
    return [tsv]


def report_scalars(values: dict, out_dir, stem):
    """Generic scalar metric table (haar loss, Lp error, ...)."""
    tsv, _ = _paths(out_dir, stem)
    write_table(tsv, ["metric", "value"], list(values.items()))
    return [tsv]
