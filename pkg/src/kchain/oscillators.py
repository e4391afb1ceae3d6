"""Phase-oscillator networks and the classical drive dynamics.

The core model is a network of coupled phase oscillators

    dtheta_i/dt = omega_i + sum_j K[i,j] sin(theta_j - theta_i + B[i,j])

with a per-edge coupling matrix K and per-edge phase-delay matrix B.  An
amplitude-plus-phase (Stuart-Landau) variant couples a limit-cycle radius to
the same network.  Trajectories are integrated with fixed-step RK4 and stored
densely; phases are kept unwrapped so frequencies can be read off by linear
fits, and wrapping happens only inside circular statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import IntegrationDiverged, InvalidArgument, OutOfRange

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# network specification


@dataclass(frozen=True)
class NetworkSpec:
    """Oscillator network: coupling matrix K, delay matrix B, frequencies.

    An absent edge is a coupling entry of exactly 0.  Self-coupling entries
    are allowed; with zero delay they contribute sin(0) = 0.
    """

    n: int
    coupling: np.ndarray
    delay: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument(f"need at least one oscillator, got n={self.n}")
        for name, arr, shape in (
            ("coupling", self.coupling, (self.n, self.n)),
            ("delay", self.delay, (self.n, self.n)),
            ("freqs", self.freqs, (self.n,)),
        ):
            if arr.shape != shape:
                raise InvalidArgument(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidArgument(f"{name} contains non-finite entries")

    def coupling_phasor(self) -> np.ndarray:
        """C = K * exp(i B); the coupling sum is Im[conj(z_i) (C z)_i]."""
        return self.coupling * np.exp(1j * self.delay)


@dataclass
class PhaseState:
    """Unwrapped oscillator phases at one instant."""

    t: float
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if not np.all(np.isfinite(self.theta)):
            raise InvalidArgument("phases must be finite")


@dataclass
class SLState:
    """Stuart-Landau amplitudes and phases at one instant."""

    t: float
    r: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if np.any(self.r < 0):
            raise InvalidArgument("amplitudes must be nonnegative")


def _resolve_freqs(n: int, omega) -> np.ndarray:
    """Frequencies from a uniform value or a normal-distribution spec.

    `omega` may be a scalar (uniform frequencies) or a mapping
    {"kind": "normal", "mean": mu, "std": sigma, "seed": s}.
    """
    if isinstance(omega, dict):
        if omega.get("kind") != "normal":
            raise InvalidArgument(f"unknown frequency spec {omega!r}")
        rng = np.random.default_rng(int(omega["seed"]))
        return rng.normal(float(omega["mean"]), float(omega["std"]), n)
    return np.full(n, float(omega))


def build_all_to_all(n: int, k_tilde: float, omega) -> NetworkSpec:
    """Network with every coupling entry equal to k_tilde and zero delay.

    The diagonal is included; its sin(0) term contributes nothing.
    """
    if n < 1:
        raise InvalidArgument(f"need at least one oscillator, got n={n}")
    if not np.isfinite(k_tilde):
        raise InvalidArgument("coupling must be finite")
    return NetworkSpec(
        n=n,
        coupling=np.full((n, n), float(k_tilde)),
        delay=np.zeros((n, n)),
        freqs=_resolve_freqs(n, omega),
    )


def build_zigzag(n: int, k1: float, k2: float, omega, delay_sign: float = -1.0
                 ) -> NetworkSpec:
    """Unidirectional zig-zag network: oscillator i is driven by i+1 and i+2.

    Coupling K[i, i+r] = k_r with phase delay delay_sign * 2*r*pi/3 for
    r = 1, 2 (default sign -1).  Out-of-range targets near the open end are
    skipped, so the last oscillator has no incoming drive terms.
    """
    if n < 3:
        raise InvalidArgument(
            f"zig-zag needs n >= 3 for the second-neighbor structure, got n={n}")
    K = np.zeros((n, n))
    B = np.zeros((n, n))
    for r, k in ((1, k1), (2, k2)):
        for i in range(n - r):
            K[i, i + r] = k
            B[i, i + r] = delay_sign * TWO_PI * r / 3.0
    return NetworkSpec(n=n, coupling=K, delay=B, freqs=_resolve_freqs(n, omega))


# ---------------------------------------------------------------------------
# right-hand sides


def kuramoto_rhs(state: PhaseState, net: NetworkSpec) -> np.ndarray:
    """dtheta_i/dt = omega_i + sum_j K[i,j] sin(theta_j - theta_i + B[i,j])."""
    theta = state.theta
    if theta.shape != (net.n,):
        raise InvalidArgument(
            f"state has {theta.shape[0]} phases, network has n={net.n}")
    diff = theta[None, :] - theta[:, None]
    return net.freqs + np.sum(net.coupling * np.sin(diff + net.delay), axis=1)


def stuart_landau_rhs(state: SLState, net: NetworkSpec, kappa1: float,
                      kappa2: float) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude-phase dynamics of network-coupled limit-cycle oscillators.

    dr_i/dt     = r_i (kappa1 - 2 kappa2 r_i^2) - r_i sum_j K_ij sin(th_j - th_i + B_ij)
    dtheta_i/dt = -omega_i - sum_j K_ij cos(th_j - th_i + B_ij)

    The uncoupled limit cycle sits at r* = sqrt(kappa1 / (2 kappa2)), which
    requires kappa2 > 0.
    """
    if not (np.isfinite(kappa1) and np.isfinite(kappa2)):
        raise InvalidArgument("kappa parameters must be finite")
    if kappa2 <= 0:
        raise InvalidArgument("kappa2 must be positive (no stable limit cycle)")
    r, theta = state.r, state.theta
    if theta.shape != (net.n,):
        raise InvalidArgument(
            f"state has {theta.shape[0]} phases, network has n={net.n}")
    diff = theta[None, :] - theta[:, None] + net.delay
    sin_sum = np.sum(net.coupling * np.sin(diff), axis=1)
    cos_sum = np.sum(net.coupling * np.cos(diff), axis=1)
    dr = r * (kappa1 - 2.0 * kappa2 * r * r) - r * sin_sum
    dtheta = -net.freqs - cos_sum
    return dr, dtheta


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class PhaseTrajectory:
    """Dense fixed-step record of an integration.

    `grid` holds t_0 ... t_M with uniform spacing dt; `phases` has one row per
    grid point (unwrapped).  Stuart-Landau runs also carry `amplitudes`.
    """

    grid: np.ndarray
    phases: np.ndarray
    amplitudes: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.phases.shape[0] != self.grid.shape[0]:
            raise InvalidArgument("row count must equal grid length")
        if self.grid.shape[0] >= 2:
            steps = np.diff(self.grid)
            dt = steps[0]
            if dt <= 0 or np.any(np.abs(steps - dt) > 1e-12 * max(abs(dt), 1.0)):
                raise InvalidArgument("grid must be strictly increasing and uniform")
        if self.amplitudes is not None and self.amplitudes.shape != self.phases.shape:
            raise InvalidArgument("amplitude rows must match phase rows")

    @property
    def n(self) -> int:
        return self.phases.shape[1]

    @property
    def dt(self) -> float:
        return float(self.grid[1] - self.grid[0]) if len(self.grid) > 1 else 0.0

    @property
    def t0(self) -> float:
        return float(self.grid[0])

    @property
    def t_end(self) -> float:
        return float(self.grid[-1])


def integrate(net: NetworkSpec, initial, dt: float, t_end: float,
              model: str = "kuramoto", kappa1: float | None = None,
              kappa2: float | None = None) -> PhaseTrajectory:
    """Fixed-step RK4 integration of the network dynamics from initial.t to t_end.

    The trajectory is sampled at every step.  Deterministic for identical
    inputs.  Raises IntegrationDiverged if the state goes non-finite.
    """
    if dt <= 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    if t_end <= initial.t:
        raise InvalidArgument(f"t_end={t_end} must exceed initial time {initial.t}")
    steps = int(round((t_end - initial.t) / dt))
    if abs(initial.t + steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        # Honour t_end even when it is not an exact multiple of dt.
        steps = int(np.ceil((t_end - initial.t) / dt - 1e-12))
    grid = initial.t + dt * np.arange(steps + 1)
    cmat = np.ascontiguousarray(net.coupling_phasor())
    freqs = np.ascontiguousarray(net.freqs)

    if model == "kuramoto":
        if not isinstance(initial, PhaseState):
            raise InvalidArgument("kuramoto model expects a PhaseState")
        out = np.empty((steps + 1, net.n))
        fail = _kernels.integrate_kuramoto(
            np.ascontiguousarray(initial.theta), cmat, freqs, dt, steps, out)
        if fail:
            raise IntegrationDiverged(float(grid[fail]))
        return PhaseTrajectory(
            grid=grid, phases=out,
            meta={"integrator": "rk4", "dt": dt, "model": "kuramoto"})

    if model == "stuart_landau":
        if kappa1 is None or kappa2 is None:
            raise InvalidArgument("stuart_landau model needs kappa1 and kappa2")
        if kappa2 <= 0:
            raise InvalidArgument("kappa2 must be positive (no stable limit cycle)")
        if not isinstance(initial, SLState):
            raise InvalidArgument("stuart_landau model expects an SLState")
        out_r = np.empty((steps + 1, net.n))
        out_th = np.empty((steps + 1, net.n))
        fail = _kernels.integrate_stuart_landau(
            np.ascontiguousarray(initial.r), np.ascontiguousarray(initial.theta),
            cmat, freqs, float(kappa1), float(kappa2), dt, steps, out_r, out_th)
        if fail:
            raise IntegrationDiverged(float(grid[fail]))
        return PhaseTrajectory(
            grid=grid, phases=out_th, amplitudes=out_r,
            meta={"integrator": "rk4", "dt": dt, "model": "stuart_landau",
                  "kappa1": kappa1, "kappa2": kappa2})

    raise InvalidArgument(f"unknown model {model!r}")


def random_initial_phases(n: int, seed: int) -> PhaseState:
    """Uniform random phases on [-pi, pi], reproducible for a fixed seed."""
    rng = np.random.default_rng(seed)
    return PhaseState(t=0.0, theta=rng.uniform(-np.pi, np.pi, n))


# ---------------------------------------------------------------------------
# diagnostics


def order_parameter(theta: np.ndarray) -> tuple[float, float]:
    """(r, psi) with r e^{i psi} = mean_j e^{i theta_j}; r=1 is full synchrony."""
    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        raise InvalidArgument("order parameter of an empty phase vector")
    z = np.exp(1j * theta).mean()
    return float(np.abs(z)), float(np.angle(z))


def order_parameter_series(traj: PhaseTrajectory) -> np.ndarray:
    """r(t) evaluated at every grid point of the trajectory."""
    return np.abs(np.exp(1j * traj.phases).mean(axis=1))


def detect_sync_onset(traj: PhaseTrajectory, threshold: float) -> float | None:
    """Earliest grid time from which r(t) >= threshold holds to the end.

    Returns None if the condition is never sustained.
    """
    if not (0.0 < threshold <= 1.0):
        raise InvalidArgument(f"threshold must be in (0, 1], got {threshold}")
    r = order_parameter_series(traj)
    ok = r >= threshold
    sustained = np.flip(np.logical_and.accumulate(np.flip(ok)))
    if not sustained.any():
        return None
    return float(traj.grid[int(np.argmax(sustained))])


class WaveProfile(NamedTuple):
    delta: float       # circular mean of theta_{i+1} - theta_i (radians)
    omega_eff: float   # least-squares slope of the mean unwrapped phase
    circ_std: float    # circular standard deviation of the differences


def wave_profile(traj: PhaseTrajectory, window: tuple[float, float]) -> WaveProfile:
    """Steady traveling-wave profile over a time window.

    delta is the circular mean of all nearest-neighbor phase differences over
    sites and window samples; omega_eff is the fitted drift rate of the mean
    (unwrapped) phase; circ_std = sqrt(-2 ln R) of the differences measures
    profile flatness.
    """
    t_lo, t_hi = window
    if t_lo < traj.t0 - 1e-12 or t_hi > traj.t_end + 1e-12 or t_hi <= t_lo:
        raise InvalidArgument(f"window {window} outside grid "
                              f"[{traj.t0}, {traj.t_end}]")
    mask = (traj.grid >= t_lo - 1e-12) & (traj.grid <= t_hi + 1e-12)
    if int(mask.sum()) < 10:
        raise InvalidArgument("window must cover at least 10 samples")
    rows = traj.phases[mask]
    diffs = np.diff(rows, axis=1)
    z = np.exp(1j * diffs).mean()
    delta = float(np.angle(z))
    resultant = min(float(np.abs(z)), 1.0)
    circ_std = float(np.sqrt(abs(min(np.log(max(resultant, 1e-300)), 0.0)) * 2.0))
    tsel = traj.grid[mask]
    mean_phase = rows.mean(axis=1)
    omega_eff = float(np.polyfit(tsel, mean_phase, 1)[0])
    return WaveProfile(delta=delta, omega_eff=omega_eff, circ_std=circ_std)


def wave_onset(traj: PhaseTrajectory, tol: float = 1e-3) -> float | None:
    """Earliest grid time from which the neighbor-difference circular std
    stays <= tol to the end of the grid (traveling-wave analog of sync onset).
    """
    diffs = np.diff(traj.phases, axis=1)
    z = np.exp(1j * diffs).mean(axis=1)
    resultant = np.clip(np.abs(z), 1e-300, 1.0)
    cs = np.sqrt(np.maximum(-2.0 * np.log(resultant), 0.0))
    ok = cs <= tol
    sustained = np.flip(np.logical_and.accumulate(np.flip(ok)))
    if not sustained.any():
        return None
    return float(traj.grid[int(np.argmax(sustained))])


# ---------------------------------------------------------------------------
# off-grid sampling


def _hermite_rows(traj: PhaseTrajectory, values: np.ndarray, t: float) -> np.ndarray:
    grid = traj.grid
    m = len(grid) - 1
    dt = traj.dt
    x = (t - grid[0]) / dt
    k = int(np.floor(x))
    k = min(max(k, 0), m - 1)
    u = x - k
    # Snap to grid rows so stored samples are returned bitwise.
    if abs(t - grid[k]) <= 1e-9 * dt:
        return values[k].copy()
    if abs(t - grid[k + 1]) <= 1e-9 * dt:
        return values[k + 1].copy()
    p0, p1 = values[k], values[k + 1]
    if m == 1:
        m0 = p1 - p0
        m1 = p1 - p0
    else:
        m0 = (0.5 * (-3.0 * p0 + 4.0 * p1 - values[2]) if k == 0
              else 0.5 * (p1 - values[k - 1]))
        m1 = (0.5 * (3.0 * p1 - 4.0 * p0 + values[k - 1]) if k == m - 1
              else 0.5 * (values[k + 2] - p0))
    c2 = 3.0 * (p1 - p0) - 2.0 * m0 - m1
    c3 = 2.0 * (p0 - p1) + m0 + m1
    return p0 + u * (m0 + u * (c2 + u * c3))


def sample_phases(traj: PhaseTrajectory, t: float) -> np.ndarray:
    """Phases at time t by cubic Hermite interpolation; exact at grid points."""
    if len(traj.grid) < 2:
        raise InvalidArgument("trajectory needs at least two samples")
    if t < traj.t0 - 1e-9 * traj.dt or t > traj.t_end + 1e-9 * traj.dt:
        raise OutOfRange(f"t={t} outside trajectory span "
                         f"[{traj.t0}, {traj.t_end}]")
    return _hermite_rows(traj, traj.phases, t)


def sample_amplitudes(traj: PhaseTrajectory, t: float) -> np.ndarray:
    """Stuart-Landau amplitudes at time t (same interpolation as phases)."""
    if traj.amplitudes is None:
        raise InvalidArgument("trajectory has no amplitude rows")
    if t < traj.t0 - 1e-9 * traj.dt or t > traj.t_end + 1e-9 * traj.dt:
        raise OutOfRange(f"t={t} outside trajectory span")
    return _hermite_rows(traj, traj.amplitudes, t)
