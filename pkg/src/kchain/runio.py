"""Run-directory output: CSV files, manifest, and self-contained SVG heatmaps.

Layout written per run:

    manifest.json      config echo, seed, tool version, convention notes
    trajectory.csv     t,theta_1..theta_n[,r_1..r_n]  (snapshot-grid rows)
    spectra.csv        t,e_1..e_m (sorted ascending per row)
    observables.csv    t,site,value (long format)
    diagnostics.csv    t,r,defect,ipr,com,variance
    metrics.csv        metric,value

Floats are written with 17 significant digits so they round-trip losslessly;
files follow RFC 4180 (CRLF, comma-separated).  Nothing time- or host-
dependent is ever written, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from .cosim import RunResult
from .experiments import MetricReport


def fmt(x) -> str:
    """17-significant-digit decimal rendering (lossless for binary64)."""
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def write_trajectory_csv(path, grid, phases, amplitudes=None) -> None:
    n = phases.shape[1]
    header = ["t"] + [f"theta_{i}" for i in range(1, n + 1)]
    if amplitudes is not None:
        header += [f"r_{i}" for i in range(1, n + 1)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, t in enumerate(grid):
            row = [fmt(t)] + [fmt(v) for v in phases[k]]
            if amplitudes is not None:
                row += [fmt(v) for v in amplitudes[k]]
            writer.writerow(row)


def write_spectra_csv(path, times, spectra) -> None:
    m = spectra.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"e_{i}" for i in range(1, m + 1)])
        for k, t in enumerate(times):
            writer.writerow([fmt(t)] + [fmt(v) for v in spectra[k]])


def write_observables_csv(path, times, observables) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "site", "value"])
        for k, t in enumerate(times):
            for site in range(observables.shape[1]):
                writer.writerow([fmt(t), str(site + 1),
                                 fmt(observables[k, site])])


def write_diagnostics_csv(path, result: RunResult) -> None:
    diag = result.diagnostics
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "r", "defect", "ipr", "com", "variance"])
        for k, t in enumerate(result.times):
            writer.writerow([
                fmt(t), fmt(diag.r[k]), fmt(diag.defect[k]),
                fmt(result.metrics_series[k, 0]),
                fmt(result.metrics_series[k, 1]),
                fmt(result.metrics_series[k, 2]),
            ])


def write_metrics_csv(path, report: MetricReport) -> None:
    rows = [
        ("sync_onset", report.sync_onset),
        ("band_count", report.band_count),
        ("band_count_fraction", report.band_count_fraction),
        ("band_gaps", report.band_gaps),
        ("spreading_exponent", report.spreading_exponent),
        ("spreading_r2", report.spreading_r2),
        ("pump_rate", report.pump_rate),
        ("wave_delta", report.wave_delta),
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for name, value in rows:
            writer.writerow([name, fmt(value) if value is not None else "nan"])


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_run_directory(outdir, result: RunResult, report: MetricReport) -> None:
    """Write the full run layout; the trajectory is stored on the snapshot grid."""
    os.makedirs(outdir, exist_ok=True)
    s = result.scenario
    stride = int(round(s.snapshot_every / s.classical_dt))
    grid = result.trajectory.grid[::stride]
    phases = result.trajectory.phases[::stride]
    amps = (result.trajectory.amplitudes[::stride]
            if result.trajectory.amplitudes is not None else None)
    manifest = dict(result.manifest)
    manifest["trajectory_grid"] = "snapshot"
    manifest["metrics"] = {
        "sync_onset": report.sync_onset,
        "band_count": report.band_count,
        "pump_rate": None if math.isnan(report.pump_rate) else report.pump_rate,
    }
    write_manifest(os.path.join(outdir, "manifest.json"), manifest)
    write_trajectory_csv(os.path.join(outdir, "trajectory.csv"),
                         grid, phases, amps)
    write_spectra_csv(os.path.join(outdir, "spectra.csv"),
                      result.times, result.spectra)
    write_observables_csv(os.path.join(outdir, "observables.csv"),
                          result.times, result.observables)
    write_diagnostics_csv(os.path.join(outdir, "diagnostics.csv"), result)
    write_metrics_csv(os.path.join(outdir, "metrics.csv"), report)


def write_matrix_snapshot(path, kind: str, t: float, matrix: np.ndarray) -> None:
    """Plain-text matrix dump: header lines (kind, n, t), then row-major entries."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    with open(path, "w") as fh:
        fh.write(f"kind {kind}\n")
        fh.write(f"n {n}\n")
        fh.write(f"t {fmt(t)}\n")
        for row in matrix:
            fh.write(" ".join(
                fmt(v) if not np.iscomplexobj(matrix)
                else f"{fmt(v.real)}{'+' if v.imag >= 0 else '-'}"
                     f"{fmt(abs(v.imag))}j"
                for v in row) + "\n")


def read_matrix_snapshot(path) -> tuple[str, float, np.ndarray]:
    """Inverse of write_matrix_snapshot."""
    with open(path) as fh:
        kind = fh.readline().split()[1]
        n = int(fh.readline().split()[1])
        t = float(fh.readline().split()[1])
        rows = [[complex(v) for v in fh.readline().split()]
                for _ in range(n)]
    matrix = np.asarray(rows)
    if np.all(matrix.imag == 0.0):
        matrix = matrix.real
    return kind, t, matrix


def write_eigenstate_snapshots(path, snapshots) -> None:
    """Long-format table of instantaneous eigensystems.

    Columns: t, level (ascending by energy), energy, site, weight = |v_i|^2.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "level", "energy", "site", "weight"])
        for snap in snapshots:
            for level, energy in enumerate(snap.energies):
                for site in range(snap.site_weights.shape[1]):
                    writer.writerow([
                        fmt(snap.t), str(level + 1), fmt(energy),
                        str(site + 1), fmt(snap.site_weights[level, site])])


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by this module; returns (header, data)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.asarray(data, dtype=float)


# ---------------------------------------------------------------------------
# SVG heatmaps

# compact perceptual colormap (dark blue -> teal -> green -> yellow)
_CMAP_ANCHORS = [
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
]
_NAN_COLOR = "#dddddd"


def _color(v: float) -> str:
    if not np.isfinite(v):
        return _NAN_COLOR
    v = min(max(v, 0.0), 1.0)
    for (x0, c0), (x1, c1) in zip(_CMAP_ANCHORS, _CMAP_ANCHORS[1:]):
        if v <= x1:
            f = 0.0 if x1 == x0 else (v - x0) / (x1 - x0)
            rgb = tuple(round(a + f * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#fde725"


def svg_heatmap(path, matrix, times, title, y_label, max_cols=400) -> None:
    """Self-contained SVG heatmap: x = time, y = row index of `matrix.T`.

    `matrix` has one row per time sample; the time axis is decimated to at
    most `max_cols` columns.  The color scale bounds are embedded as a
    comment so the figure contract is testable without rendering.
    """
    matrix = np.asarray(matrix, dtype=float)
    times = np.asarray(times, dtype=float)
    stride = max(1, int(np.ceil(matrix.shape[0] / max_cols)))
    sub = matrix[::stride]
    tsub = times[::stride]
    finite = sub[np.isfinite(sub)]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    span = vmax - vmin if vmax > vmin else 1.0
    n_cols, n_rows = sub.shape[0], sub.shape[1]
    cell_w, cell_h = 4, 8
    margin_l, margin_b, margin_t = 50, 30, 24
    width = margin_l + n_cols * cell_w + 10
    height = margin_t + n_rows * cell_h + margin_b
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f"<!-- vmin={fmt(vmin)} vmax={fmt(vmax)} stride={stride} -->",
        f'<text x="{margin_l}" y="16" font-size="12" '
        f'font-family="sans-serif">{title}</text>',
    ]
    for c in range(n_cols):
        x = margin_l + c * cell_w
        for rrow in range(n_rows):
            # row 1 at the bottom
            y = margin_t + (n_rows - 1 - rrow) * cell_h
            color = _color((sub[c, rrow] - vmin) / span)
            parts.append(f'<rect x="{x}" y="{y}" width="{cell_w}" '
                         f'height="{cell_h}" fill="{color}"/>')
    parts.append(
        f'<text x="{margin_l}" y="{height - 8}" font-size="10" '
        f'font-family="sans-serif">t = {fmt(tsub[0])} .. {fmt(tsub[-1])}'
        f'</text>')
    parts.append(
        f'<text x="6" y="{margin_t + n_rows * cell_h // 2}" font-size="10" '
        f'font-family="sans-serif">{y_label}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def write_plots(run_dir) -> None:
    """Emit plots/fields.svg, plots/spectrum.svg, plots/observable.svg.

    The underlying numeric tables (fields.csv plus the run's own CSV files)
    accompany the figures; rendering is pure text generation.
    """
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    g_amp = float(manifest["config"]["chain"]["g_amp"])

    header, traj = read_table(os.path.join(run_dir, "trajectory.csv"))
    n = sum(1 for h in header if h.startswith("theta_"))
    t_traj = traj[:, 0]
    fields = g_amp * np.cos(traj[:, 1:n + 1])

    plots_dir = os.path.join(run_dir, "plots")
    os.makedirs(plots_dir, exist_ok=True)
    with open(os.path.join(plots_dir, "fields.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "site", "value"])
        for k, t in enumerate(t_traj):
            for site in range(n):
                writer.writerow([fmt(t), str(site + 1), fmt(fields[k, site])])
    svg_heatmap(os.path.join(plots_dir, "fields.svg"), fields, t_traj,
                "transverse field g_i(t)", "site")

    _, spectra = read_table(os.path.join(run_dir, "spectra.csv"))
    svg_heatmap(os.path.join(plots_dir, "spectrum.svg"),
                spectra[:, 1:], spectra[:, 0],
                "instantaneous spectrum", "level")

    _, obs_long = read_table(os.path.join(run_dir, "observables.csv"))
    times = np.unique(obs_long[:, 0])
    n_sites = int(obs_long[:, 1].max())
    obs = np.full((len(times), n_sites), np.nan)
    t_index = {t: k for k, t in enumerate(times)}
    for row in obs_long:
        obs[t_index[row[0]], int(row[1]) - 1] = row[2]
    svg_heatmap(os.path.join(plots_dir, "observable.svg"), obs, times,
                "site-resolved observable", "site")
