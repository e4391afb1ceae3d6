"""Traveling wave imprinted on an XX chain: three bands and a sliding lattice.

A zig-zag network locks into the +2pi/3 wave, so the XX chain sees the field
G cos(omega t + 2 pi i/3 + phi0): a three-site superlattice whose potential
slides by one cell per drive period.  The instantaneous spectrum splits into
three bands; gap-crossing edge levels appear periodically, the fingerprint
of the topological (Thouless-style) character of the sliding potential.

This demo uses the bare caption couplings (no 1/N scaling) so the wave locks
within a short desk-scale run; the flagship preset scales them by 1/N to
reproduce the slow transient of the source experiment.
"""

import os

import numpy as np

from kchain import run_scenario
from kchain.config import scenario_from_config
from kchain.experiments import BAND_GAP_THRESHOLD, band_count, min_band_gap
from kchain.runio import svg_heatmap, write_run_directory
from kchain.experiments import compute_metrics

OUT = os.path.join(os.path.dirname(__file__), "output", "fig3-demo")
os.makedirs(OUT, exist_ok=True)

cfg = {
    "name": "fig3-demo",
    "network": {"kind": "zigzag", "n": 30, "k1": 0.2, "k2": 0.1,
                "omega": 0.04, "normalize_by_n": False, "delay_sign": -1.0},
    "chain": {"n": 30, "jx": 1.0, "jy": 1.0, "g_amp": 3.0,
              "boundary": "open"},
    "run": {"model": "xx", "classical_dt": 0.01, "quantum_dt": 0.005,
            "t_end": 600.0, "snapshot_every": 2.5, "seed": 7,
            "initial_state": {"kind": "eigenstate",
                              "select": ["max_ipr_window", 1, 10, 0.5],
                              "prepare_at": "start"}},
}
result = run_scenario(scenario_from_config(cfg))
diag = result.diagnostics

print(f"wave onset: t = {diag.wave_onset:.0f} "
      f"(omega t = {0.04 * diag.wave_onset:.1f})")
print(f"locked delta = {diag.wave_delta:+.4f} rad, "
      f"omega_eff = {diag.wave_omega_eff:.5f}")

post = result.times >= diag.wave_onset
counts = np.array([band_count(row, BAND_GAP_THRESHOLD)
                   for row in result.spectra[post]])
gaps = np.array([min_band_gap(row, BAND_GAP_THRESHOLD)
                 for row in result.spectra[post]])
print(f"post-onset band_count == 3 in {np.mean(counts == 3):.0%} of "
      f"snapshots; median inter-band gap {np.nanmedian(gaps):.2f} J")
print("(the != 3 snapshots carry an edge level crossing a gap: the pump's "
      "spectral flow)")

write_run_directory(OUT, result, compute_metrics(result))
svg_heatmap(os.path.join(OUT, "spectrum_demo.svg"), result.spectra,
            result.times, "trimerized three-band spectrum", "level")
svg_heatmap(os.path.join(OUT, "density_demo.svg"), result.observables,
            result.times, "|psi_i(t)|^2", "site")
print(f"outputs written to {OUT}")
