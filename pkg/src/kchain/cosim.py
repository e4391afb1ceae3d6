"""Couples the classical oscillator trajectory to the quantum chain.

The coupling is strictly one-way, so co-integration runs in two exact stages:
the network is integrated first on its own grid, then the quantum propagator
is advanced over the interpolated drive g_i(t) = G cos(theta_i(t)).  Snapshot
times sit on both grids (snapshot_every is a common multiple of both steps),
so snapshot-time drive values reproduce the stored trajectory rows bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .chain import (ChainParams, DriveField,
                    build_majorana_generator, build_xx_generator,
                    eigenmode_decomposition, covariance_from_occupations,
                    localized_eigenstate, mode_site_weights, profile_metrics,
                    sigma_z_profile)
from .errors import (IntegrationDiverged, IntegrationUnstable,
                     InvalidArgument, OutOfRange)
from .oscillators import (NetworkSpec, PhaseTrajectory, detect_sync_onset,
                          integrate, order_parameter_series,
                          random_initial_phases, sample_phases, wave_onset,
                          wave_profile)


def _is_multiple(big: float, small: float) -> bool:
    ratio = big / small
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio))


@dataclass
class Scenario:
    """Everything needed for one deterministic co-simulation run."""

    name: str
    network: NetworkSpec
    chain: ChainParams
    model: str                  # "ising" | "xx"
    classical_dt: float
    quantum_dt: float
    t_end: float
    snapshot_every: float
    seed: int
    initial_state: dict
    classical_model: str = "kuramoto"
    kappa1: float | None = None
    kappa2: float | None = None
    source_config: dict | None = None

    def __post_init__(self):
        if self.model not in ("ising", "xx"):
            raise InvalidArgument(f"unknown quantum model {self.model!r}")
        if self.classical_model not in ("kuramoto", "stuart_landau"):
            raise InvalidArgument(
                f"unknown classical model {self.classical_model!r}")
        if self.quantum_dt > self.classical_dt + 1e-15:
            raise InvalidArgument("quantum_dt must not exceed classical_dt")
        if not _is_multiple(self.classical_dt, self.quantum_dt):
            raise InvalidArgument(
                "classical_dt must be an integer multiple of quantum_dt")
        if not _is_multiple(self.snapshot_every, self.quantum_dt):
            raise InvalidArgument(
                "snapshot_every must be an integer multiple of quantum_dt")
        if not _is_multiple(self.snapshot_every, self.classical_dt):
            raise InvalidArgument(
                "snapshot_every must be an integer multiple of classical_dt")
        if self.network.n != self.chain.n:
            raise InvalidArgument(
                f"network has {self.network.n} oscillators, chain has "
                f"{self.chain.n} sites")


class Diagnostics(NamedTuple):
    r: np.ndarray                 # order parameter on the snapshot grid
    sync_onset: float | None
    wave_onset: float | None
    wave_delta: float | None
    wave_omega_eff: float | None
    wave_circ_std: float | None
    defect: np.ndarray            # max pre-projection defect per interval
    prep_time: float


@dataclass
class RunResult:
    """Snapshot series and diagnostics of one scenario run.

    For Ising runs `observables` holds the raw <sigma^z_j(t)> profile and
    `deviation` its difference from a ground-state reference evolved by the
    same propagator (the quasiparticle footprint); `metrics_series` tracks
    ipr / center of mass / variance of that footprint.  For XX runs the
    observable is |psi_i(t)|^2 and the metrics apply to it directly.
    """

    scenario: Scenario
    trajectory: PhaseTrajectory
    times: np.ndarray             # snapshot grid
    spectra: np.ndarray           # (snapshots, levels)
    observables: np.ndarray       # (snapshots, sites): <sigma^z> or |psi|^2
    metrics_series: np.ndarray    # (snapshots, 3): ipr, com, variance
    diagnostics: Diagnostics
    manifest: dict
    deviation: np.ndarray | None = None


def make_drive(traj: PhaseTrajectory, g_amp: float
               ) -> Callable[[float], DriveField]:
    """Drive sampler g_i(t) = g_amp * cos(theta_i(t)) on the trajectory span."""
    if not np.isfinite(g_amp):
        raise InvalidArgument("drive amplitude must be finite")

    def drive(t: float) -> DriveField:
        return DriveField(t=t, g=g_amp * np.cos(sample_phases(traj, t)))

    return drive


def _integrate_classical(s: Scenario) -> PhaseTrajectory:
    initial = random_initial_phases(s.network.n, s.seed)
    if s.classical_model == "kuramoto":
        traj = integrate(s.network, initial, s.classical_dt, s.t_end)
    else:
        from .oscillators import SLState
        sl0 = SLState(t=0.0, r=np.ones(s.network.n), theta=initial.theta)
        traj = integrate(s.network, sl0, s.classical_dt, s.t_end,
                         model="stuart_landau", kappa1=s.kappa1,
                         kappa2=s.kappa2)
    traj.meta["seed"] = s.seed
    return traj


def _prepare_ising(s: Scenario, drive: DriveField):
    spec = s.initial_state
    gen0 = build_majorana_generator(s.chain, drive)
    modes = eigenmode_decomposition(gen0)
    n = s.chain.n
    occ = np.zeros(n, dtype=int)
    kind = spec.get("kind", "ground_plus_mode")
    if kind == "ground":
        pass
    elif kind == "ground_plus_mode":
        mode = spec.get("mode", "max_ipr")
        if mode == "max_ipr":
            weights = mode_site_weights(modes)
            ipr = (weights ** 2).sum(axis=1)
            occ[int(np.argmax(ipr))] = 1
        elif mode == "index":
            occ[int(spec["index"])] = 1
        else:
            raise InvalidArgument(f"unknown mode selector {mode!r}")
    elif kind == "product":
        from .chain import product_state_covariance
        return product_state_covariance(np.asarray(spec["pattern"], dtype=float))
    else:
        raise InvalidArgument(f"unknown ising initial state {kind!r}")
    return covariance_from_occupations(modes, occ)


def _prepare_xx(s: Scenario, drive: DriveField) -> np.ndarray:
    spec = s.initial_state
    kind = spec.get("kind", "eigenstate")
    n = s.chain.n
    if kind == "eigenstate":
        select = spec.get("select", "max_ipr")
        if isinstance(select, list):
            select = tuple(select)
        gen0 = build_xx_generator(s.chain, drive)
        return localized_eigenstate(gen0, select).psi
    if kind == "site":
        psi = np.zeros(n, dtype=complex)
        psi[int(spec["site"]) - 1] = 1.0
        return psi
    if kind == "site_at_field_max":
        # one-hot on the site with the largest field (lowest on-site energy
        # -2 g) inside a window; band-polarized in the locked-wave regime
        lo, hi = spec.get("window", [max(1, 2 * n // 3), n - 3])
        cand = np.arange(int(lo) - 1, int(hi))
        j_star = int(cand[np.argmax(drive.g[cand])])
        psi = np.zeros(n, dtype=complex)
        psi[j_star] = 1.0
        return psi
    raise InvalidArgument(f"unknown xx initial state {kind!r}")


def run_scenario(s: Scenario) -> RunResult:
    """Integrate the network, build the drive, evolve the chain, snapshot.

    Deterministic for a fixed scenario (seed included).  Raises
    IntegrationDiverged / IntegrationUnstable naming the failing stage.
    """
    try:
        traj = _integrate_classical(s)
    except IntegrationDiverged as exc:
        raise IntegrationDiverged(
            exc.t, f"classical stage: {exc}") from exc

    n_snap = int(round(s.t_end / s.snapshot_every))
    sub = int(round(s.snapshot_every / s.quantum_dt))
    ratio = int(round(s.classical_dt / s.quantum_dt))
    stride = int(round(s.snapshot_every / s.classical_dt))
    # canonical snapshot labels: the classical grid rows they sit on
    times = traj.grid[::stride][: n_snap + 1].copy()
    n = s.chain.n

    r_full = order_parameter_series(traj)
    r_series = r_full[::stride][: n_snap + 1]
    sync_t = detect_sync_onset(traj, 0.99)
    wave_t = wave_onset(traj, tol=1e-3)

    # preparation time: "start" (default) or first snapshot past the wave lock
    prep_policy = s.initial_state.get("prepare_at", "start")
    if prep_policy == "start" or wave_t is None:
        prep_idx = 0
    elif prep_policy == "wave_onset":
        prep_idx = min(int(np.ceil(wave_t / s.snapshot_every - 1e-9)), n_snap)
    else:
        raise InvalidArgument(f"unknown prepare_at policy {prep_policy!r}")
    t_prep = float(times[prep_idx])

    drive_prep = DriveField(
        t=t_prep, g=s.chain.g_amp * np.cos(traj.phases[prep_idx * stride]))

    levels = 2 * n if s.model == "ising" else n
    spectra = np.empty((n_snap + 1, levels))
    observables = np.full((n_snap + 1, n), np.nan)
    metrics = np.full((n_snap + 1, 3), np.nan)
    defects = np.zeros(n_snap + 1)

    deviation = None
    if s.model == "ising":
        if s.chain.jy != 0.0:
            raise InvalidArgument("ising model requires jy = 0")
        gamma0 = _prepare_ising(s, drive_prep)
        gen_prep = build_majorana_generator(s.chain, drive_prep)
        modes_prep = eigenmode_decomposition(gen_prep)
        gamma_ref = covariance_from_occupations(modes_prep,
                                                np.zeros(n, dtype=int))
        deviation = np.full((n_snap + 1, n), np.nan)
        carrier = np.eye(2 * n)
    else:
        if s.chain.jx != s.chain.jy:
            raise InvalidArgument("xx model requires jx = jy")
        psi0 = _prepare_xx(s, drive_prep)
        carrier = np.eye(n, dtype=complex)

    periodic = s.chain.boundary == "periodic"
    phases = np.ascontiguousarray(traj.phases)

    def record(idx: int):
        g_now = s.chain.g_amp * np.cos(traj.phases[idx * stride])
        drive_now = DriveField(t=times[idx], g=g_now)
        if s.model == "ising":
            gen = build_majorana_generator(s.chain, drive_now)
            spectra[idx] = np.sort(np.linalg.eigvalsh(1j * gen.matrix).real)
            if idx >= prep_idx:
                prof = sigma_z_profile(carrier @ gamma0 @ carrier.T)
                prof_ref = sigma_z_profile(carrier @ gamma_ref @ carrier.T)
                observables[idx] = prof
                deviation[idx] = prof - prof_ref
                metrics[idx] = profile_metrics(np.abs(deviation[idx]))
        else:
            gen = build_xx_generator(s.chain, drive_now)
            spectra[idx] = np.sort(np.linalg.eigvalsh(gen.matrix))
            if idx >= prep_idx:
                dens = np.abs(carrier @ psi0) ** 2
                observables[idx] = dens
                metrics[idx] = profile_metrics(dens)

    for idx in range(n_snap + 1):
        if idx > prep_idx:
            j0 = (idx - 1) * sub
            if s.model == "ising":
                defect, fail = _kernels.evolve_majorana(
                    phases, ratio, j0, sub, s.quantum_dt, s.chain.g_amp,
                    s.chain.jx, periodic, carrier, 1e-6)
            else:
                defect, fail = _kernels.evolve_xx(
                    phases, ratio, j0, sub, s.quantum_dt, s.chain.g_amp,
                    s.chain.jx, periodic, carrier, 1e-6)
            defects[idx] = defect
            if fail:
                t_fail = times[idx - 1] + fail * s.quantum_dt
                err = IntegrationUnstable(t_fail, defect)
                err.args = (f"quantum stage: {err}",)
                raise err
        record(idx)

    wave_stats = (None, None, None)
    if wave_t is not None and s.t_end - wave_t >= 10 * s.classical_dt:
        # steady-state window: the trailing stretch after the lock
        start = max(wave_t, s.t_end - max(0.1 * s.t_end,
                                          10 * s.classical_dt))
        prof = wave_profile(traj, (start, s.t_end))
        wave_stats = (prof.delta, prof.omega_eff, prof.circ_std)

    diag = Diagnostics(
        r=r_series, sync_onset=sync_t, wave_onset=wave_t,
        wave_delta=wave_stats[0], wave_omega_eff=wave_stats[1],
        wave_circ_std=wave_stats[2], defect=defects, prep_time=t_prep)

    manifest = build_manifest(s, diag)
    return RunResult(scenario=s, trajectory=traj, times=times,
                     spectra=spectra, observables=observables,
                     metrics_series=metrics, diagnostics=diag,
                     manifest=manifest, deviation=deviation)


def build_manifest(s: Scenario, diag: Diagnostics | None = None) -> dict:
    from . import __version__

    manifest = {
        "tool": {"name": "kchain", "version": __version__},
        "config": s.source_config,
        "seed": s.seed,
        "conventions": {
            "units": "couplings and energies in units of J; hbar = 1; "
                     "times in 1/J",
            "majorana": "a_{2j-1} = f^+_j + f_j, a_{2j} = i(f^+_j - f_j) with "
                        "{a_p, a_q} = 2 delta_pq; covariance "
                        "Gamma_pq = (i/2) <[a_p, a_q]>",
            "spectra": "eigenvalues of i*M (ising flow matrix) or of the "
                       "single-particle matrix h (xx), as built",
            "sigma_z": "<sigma^z_j> = -Gamma[2j, 2j+1], calibrated in the "
                       "decoupled J_x = 0 limit",
        },
        "integrators": {"classical": "rk4", "quantum": "rk4+polar-projection"},
    }
    if diag is not None:
        manifest["prep_time"] = diag.prep_time
    return manifest


class EigenSnapshot(NamedTuple):
    t: float
    energies: np.ndarray       # ascending
    site_weights: np.ndarray   # (levels, sites), rows sum to 1


def eigenstate_snapshots(s: Scenario, sample_times) -> list[EigenSnapshot]:
    """Full instantaneous eigensystems at the requested times.

    Columns are ordered by ascending eigenvalue; the site-resolved amplitudes
    |v_i|^2 are returned (Majorana components of one site are combined).
    """
    sample_times = np.asarray(sample_times, dtype=float)
    if np.any(sample_times < 0) or np.any(sample_times > s.t_end + 1e-12):
        raise OutOfRange("requested times fall outside [0, t_end]")
    traj = _integrate_classical(s)
    out = []
    for t in sample_times:
        g = s.chain.g_amp * np.cos(sample_phases(traj, t))
        if s.model == "ising":
            gen = build_majorana_generator(s.chain, DriveField(t=t, g=g))
            evals, evecs = np.linalg.eigh(1j * gen.matrix)
            w = np.abs(evecs) ** 2
            site_w = (w[0::2, :] + w[1::2, :]).T
        else:
            gen = build_xx_generator(s.chain, DriveField(t=t, g=g))
            evals, evecs = np.linalg.eigh(gen.matrix)
            site_w = (np.abs(evecs) ** 2).T
        out.append(EigenSnapshot(t=float(t), energies=evals.real,
                                 site_weights=site_w))
    return out
