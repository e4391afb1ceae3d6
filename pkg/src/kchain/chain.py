"""Free-fermion representation of the driven XY chain.

Two exactly solvable regimes are supported:

* Ising (jy = 0): the chain maps to Majorana operators a_0..a_{2n-1} with
  {a_p, a_q} = 2 delta_pq.  The quadratic Hamiltonian is
  H = (i/4) sum_pq M_pq a_p a_q and the Heisenberg flow is da/dt = M a with
  the real antisymmetric generator

      M[2i, 2i+1] = 2 g_i,   M[2i+1, 2i+2] = 2 J_x   (antisymmetric partners
      implied; 0-indexed, bandwidth <= 3).

  Gaussian states are tracked by the covariance matrix
  Gamma_pq = (i/2) <[a_p, a_q]>, which evolves by orthogonal conjugation
  Gamma(t) = O Gamma O^T.  In this convention <sigma^z_j> = -Gamma[2j, 2j+1]
  (the sign is pinned by the decoupled J_x = 0 limit, where the ground state
  of H = -sum g sigma^z at g > 0 has every sigma^z = +1).

* XX (jx = jy = J): particle number is conserved and a single fermion is a
  wavefunction psi evolving under i dpsi/dt = h psi with the real symmetric
  single-particle matrix h_ii = -2 g_i, h_{i,i+-1} = -2 J.

Spectra are reported exactly as the eigenvalues of i*M (Ising) or h (XX);
energies are in units of J with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (IntegrationUnstable, InvalidArgument, NumericalFailure,
                     UnsupportedModel)


# ---------------------------------------------------------------------------
# parameters and generators


@dataclass(frozen=True)
class ChainParams:
    """Chain geometry and couplings (units of J; periodic is validation-only)."""

    n: int
    jx: float
    jy: float
    g_amp: float
    boundary: str = "open"

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgument(f"chain needs n >= 2 sites, got {self.n}")
        if self.boundary not in ("open", "periodic"):
            raise InvalidArgument(f"unknown boundary {self.boundary!r}")


@dataclass
class DriveField:
    """Site-local transverse field values g_i at one instant."""

    t: float
    g: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)


@dataclass
class MajoranaGenerator:
    """Real antisymmetric flow matrix for the Ising chain (da/dt = M a)."""

    matrix: np.ndarray
    t: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2


@dataclass
class XXGenerator:
    """Real symmetric single-particle matrix for the XX chain (i dpsi/dt = h psi)."""

    matrix: np.ndarray
    t: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_majorana_generator(params: ChainParams, drive: DriveField
                             ) -> MajoranaGenerator:
    """Assemble M(t) for the Ising chain (requires jy = 0).

    Nonzero pattern (0-indexed): M[2i, 2i+1] = 2 g_i, M[2i+1, 2i+2] = 2 J_x,
    antisymmetric partners implied; periodic boundary adds the wrap bond
    M[2n-1, 0] = 2 J_x.
    """
    if params.jy != 0.0:
        raise UnsupportedModel(
            "Majorana flow covers the Ising case only (jy = 0); "
            "the general XY pairing flow is out of scope")
    g = np.asarray(drive.g, dtype=float)
    if g.shape != (params.n,):
        raise InvalidArgument(f"drive has {g.shape[0]} sites, chain has {params.n}")
    n = params.n
    m = np.zeros((2 * n, 2 * n))
    for i in range(n):
        m[2 * i, 2 * i + 1] = 2.0 * g[i]
        m[2 * i + 1, 2 * i] = -2.0 * g[i]
    for i in range(n - 1):
        m[2 * i + 1, 2 * i + 2] = 2.0 * params.jx
        m[2 * i + 2, 2 * i + 1] = -2.0 * params.jx
    if params.boundary == "periodic":
        m[2 * n - 1, 0] = 2.0 * params.jx
        m[0, 2 * n - 1] = -2.0 * params.jx
    return MajoranaGenerator(matrix=m, t=drive.t)


def build_xx_generator(params: ChainParams, drive: DriveField) -> XXGenerator:
    """Assemble h(t) for the XX chain (requires jx = jy)."""
    if params.jx != params.jy:
        raise UnsupportedModel("XX generator requires jx = jy")
    g = np.asarray(drive.g, dtype=float)
    if g.shape != (params.n,):
        raise InvalidArgument(f"drive has {g.shape[0]} sites, chain has {params.n}")
    n = params.n
    j = params.jx
    h = np.diag(-2.0 * g)
    off = np.full(n - 1, -2.0 * j)
    h += np.diag(off, 1) + np.diag(off, -1)
    if params.boundary == "periodic":
        h[0, n - 1] = -2.0 * j
        h[n - 1, 0] = -2.0 * j
    return XXGenerator(matrix=h, t=drive.t)


# ---------------------------------------------------------------------------
# spectra


@dataclass
class SpectrumSnapshot:
    """Sorted instantaneous single-particle energies at time t."""

    t: float
    energies: np.ndarray


def instantaneous_spectrum(gen: MajoranaGenerator | XXGenerator) -> SpectrumSnapshot:
    """Eigenvalues of h (XX) or of the Hermitian matrix i*M (Ising), ascending.

    Majorana spectra come in +-epsilon pairs.
    """
    if not np.all(np.isfinite(gen.matrix)):
        raise InvalidArgument("generator contains non-finite entries")
    try:
        if isinstance(gen, MajoranaGenerator):
            ev = np.linalg.eigvalsh(1j * gen.matrix).real
        else:
            ev = np.linalg.eigvalsh(gen.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"eigensolver failed at t={gen.t:g}; matrix:\n{gen.matrix!r}") from exc
    return SpectrumSnapshot(t=gen.t, energies=np.sort(ev))


def analytic_dispersion(g: float, jx: float, k: float) -> float:
    """Quasiparticle energy 2 sqrt((g + jx cos k)^2 + (jx sin k)^2).

    Validation oracle for the synchronized, translation-invariant chain with
    periodic boundary; on an even quasimomentum grid the eigenvalue set of
    i*M coincides with {+-eps_k} under the relabeling k -> pi - k.
    """
    return 2.0 * np.sqrt((g + jx * np.cos(k)) ** 2 + (jx * np.sin(k)) ** 2)


# ---------------------------------------------------------------------------
# propagators


@dataclass
class Propagator:
    """Time-evolution matrix over [t0, t1] with its worst pre-projection defect."""

    kind: str  # "majorana-orthogonal" | "xx-unitary"
    matrix: np.ndarray
    t0: float
    t1: float
    defect_max: float = 0.0


def _polar_project(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Newton-Schulz projection onto the nearest orthogonal/unitary matrix.

    Returns (projected matrix, pre-projection defect max|X^+ X - I|).
    """
    eye = np.eye(x.shape[0], dtype=x.dtype)
    gram = x.conj().T @ x
    defect = float(np.abs(gram - eye).max())
    cur = defect
    it = 0
    while cur > 1e-13 and it < 4:
        x = 1.5 * x - 0.5 * (x @ gram)
        gram = x.conj().T @ x
        cur = float(np.abs(gram - eye).max())
        it += 1
    return x, defect


def evolve_propagator(gen_at: Callable[[float], MajoranaGenerator | XXGenerator],
                      t0: float, t1: float, dt: float,
                      abort_defect: float = 1e-6) -> Propagator:
    """RK4 time-ordered integration of the propagator from the identity.

    dO/dt = M(t) O for the Majorana flow, dU/dt = -i h(t) U for XX.  After
    every step the orthogonality/unitarity defect is measured; the run aborts
    (IntegrationUnstable) above `abort_defect` and otherwise the matrix is
    re-projected onto the nearest orthogonal/unitary matrix.
    """
    if dt <= 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    first = gen_at(t0)
    majorana = isinstance(first, MajoranaGenerator)
    kind = "majorana-orthogonal" if majorana else "xx-unitary"
    dim = first.matrix.shape[0]
    if majorana:
        x = np.eye(dim)
        def flow(t):
            return gen_at(t).matrix
    else:
        x = np.eye(dim, dtype=complex)
        def flow(t):
            return -1j * gen_at(t).matrix
    if t1 == t0:
        return Propagator(kind=kind, matrix=x, t0=t0, t1=t1, defect_max=0.0)
    if t1 < t0:
        raise InvalidArgument("t1 must not precede t0")
    steps = int(round((t1 - t0) / dt))
    if steps == 0 or abs(t0 + steps * dt - t1) > 1e-9 * max(1.0, abs(t1)):
        steps = max(1, int(np.ceil((t1 - t0) / dt - 1e-12)))
    h = (t1 - t0) / steps
    defect_max = 0.0
    for s in range(steps):
        t = t0 + s * h
        a1 = flow(t)
        k1 = a1 @ x
        a2 = flow(t + 0.5 * h)
        k2 = a2 @ (x + 0.5 * h * k1)
        k3 = a2 @ (x + 0.5 * h * k2)
        a4 = flow(t + h)
        k4 = a4 @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x, defect = _polar_project(x)
        defect_max = max(defect_max, defect)
        if defect > abort_defect:
            raise IntegrationUnstable(t + h, defect)
    return Propagator(kind=kind, matrix=x, t0=t0, t1=t1, defect_max=defect_max)


# ---------------------------------------------------------------------------
# Gaussian states (Ising / Majorana sector)


class EigenModes(NamedTuple):
    """Canonical form of an antisymmetric generator.

    W is real orthogonal with W^T M W block-diagonal; block m is
    [[0, eps_m], [-eps_m, 0]] with eps_m >= 0 sorted ascending.  Columns
    (2m, 2m+1) of W are the mode vectors.
    """

    energies: np.ndarray   # (n,)
    modes: np.ndarray      # (2n, 2n)


def eigenmode_decomposition(gen: MajoranaGenerator) -> EigenModes:
    """Real Schur-like canonical form of the antisymmetric flow matrix."""
    m = gen.matrix
    if np.abs(m + m.T).max() > 1e-12 * max(1.0, np.abs(m).max()):
        raise InvalidArgument("generator must be antisymmetric")
    dim = m.shape[0]
    n = dim // 2
    try:
        evals, evecs = np.linalg.eigh(1j * m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("eigensolver failed on i*M") from exc
    scale = max(1.0, float(np.abs(evals).max()))
    tol = 1e-11 * scale
    pos = np.where(evals > tol)[0]
    near0 = np.where(np.abs(evals) <= tol)[0]

    blocks: list[tuple[float, np.ndarray, np.ndarray]] = []
    for idx in pos:
        v = evecs[:, idx]
        # i M v = eps v  =>  M x = eps y, M y = -eps x for v = x + i y;
        # columns (y, x) give the canonical 2x2 block.
        x = np.sqrt(2.0) * v.real
        y = np.sqrt(2.0) * v.imag
        blocks.append((float(evals[idx]), y, x))

    if len(near0):
        span = np.concatenate(
            [evecs[:, near0].real, evecs[:, near0].imag], axis=1)
        u, s, _ = np.linalg.svd(span, full_matrices=False)
        basis = u[:, : len(near0)]
        for b in range(len(near0) // 2):
            u1 = basis[:, 2 * b]
            u2 = basis[:, 2 * b + 1]
            val = float(u1 @ (m @ u2))
            if val < 0:
                u1, u2 = u2, u1
                val = -val
            blocks.append((val, u1, u2))

    blocks.sort(key=lambda item: item[0])
    energies = np.array([b[0] for b in blocks])
    w = np.empty((dim, dim))
    for mm, (_, c1, c2) in enumerate(blocks):
        w[:, 2 * mm] = c1
        w[:, 2 * mm + 1] = c2
    return EigenModes(energies=energies, modes=w)


def mode_site_weights(modes: EigenModes) -> np.ndarray:
    """Per-mode site weight profiles, shape (n_modes, n_sites), rows sum to 1.

    Mode m occupies Majorana components (2m, 2m+1); the weight on site i is
    half the squared norm of the four entries touching that site.
    """
    w = modes.modes
    dim = w.shape[0]
    n = dim // 2
    pair = w[:, 0::2] ** 2 + w[:, 1::2] ** 2          # (2n, n_modes)
    site = pair[0::2, :] + pair[1::2, :]              # (n, n_modes)
    return (site / 2.0).T


def covariance_from_occupations(modes: EigenModes,
                                occupations: np.ndarray) -> np.ndarray:
    """Pure Gaussian state with the given quasiparticle content.

    Occupation 0 leaves mode m in its vacuum (energy -eps_m/2), occupation 1
    excites it (+eps_m/2); all-zero occupations give the ground state of the
    generator's Hamiltonian.  Returns the antisymmetric covariance matrix.
    """
    occupations = np.asarray(occupations, dtype=int)
    n = len(modes.energies)
    if occupations.shape != (n,):
        raise InvalidArgument(f"need {n} occupation bits, got {occupations.shape}")
    dim = 2 * n
    core = np.zeros((dim, dim))
    for mm, occ in enumerate(occupations):
        sign = 1.0 if occ else -1.0
        core[2 * mm, 2 * mm + 1] = sign
        core[2 * mm + 1, 2 * mm] = -sign
    w = modes.modes
    return w @ core @ w.T


def ground_state_covariance(gen: MajoranaGenerator) -> np.ndarray:
    """Covariance matrix of the instantaneous ground state."""
    modes = eigenmode_decomposition(gen)
    return covariance_from_occupations(modes, np.zeros(gen.n, dtype=int))


def product_state_covariance(sigma_z: np.ndarray) -> np.ndarray:
    """Covariance of a product state with the given <sigma^z_j> = +-1 pattern."""
    z = np.asarray(sigma_z, dtype=float)
    n = z.shape[0]
    gamma = np.zeros((2 * n, 2 * n))
    for j in range(n):
        gamma[2 * j, 2 * j + 1] = -z[j]
        gamma[2 * j + 1, 2 * j] = z[j]
    return gamma


def evolve_covariance(gamma: np.ndarray, prop: Propagator) -> np.ndarray:
    """Heisenberg flow of second moments: Gamma(t) = O Gamma O^T."""
    if prop.kind != "majorana-orthogonal":
        raise InvalidArgument(f"covariance needs a majorana propagator, "
                              f"got {prop.kind}")
    if gamma.shape != prop.matrix.shape:
        raise InvalidArgument(
            f"covariance {gamma.shape} does not match propagator "
            f"{prop.matrix.shape}")
    o = prop.matrix
    return o @ gamma @ o.T


def sigma_z_profile(gamma: np.ndarray) -> np.ndarray:
    """<sigma^z_j> = -Gamma[2j, 2j+1]; sign pinned by the J_x = 0 limit."""
    return -gamma[0::2, 1::2].diagonal().copy()


def covariance_energy(gamma: np.ndarray, gen: MajoranaGenerator) -> float:
    """<H> for H = (i/4) sum M_pq a_p a_q, i.e. (1/4) sum_pq M_pq Gamma_pq."""
    return float(np.sum(gen.matrix * gamma) / 4.0)


# ---------------------------------------------------------------------------
# single-particle states (XX sector)


@dataclass
class WavefunctionState:
    """Normalized single-particle amplitude vector."""

    psi: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2)))


def localized_eigenstate(gen: XXGenerator, selector="max_ipr") -> WavefunctionState:
    """Pick a localized eigenvector of h.

    Selectors:
      "max_ipr"                      -- maximize sum |v_i|^4;
      ("site", j)                    -- largest weight on 1-indexed site j;
      ("max_ipr_window", lo, hi, w)  -- max IPR among eigenvectors carrying at
                                        least weight w on sites lo..hi
                                        (1-indexed, inclusive); falls back to
                                        the global max-IPR state if none
                                        qualify.

    States with IPR below 3/n (the uniform-chain scale) are flagged
    weakly_localized in the metadata.
    """
    try:
        evals, evecs = np.linalg.eigh(gen.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("eigensolver failed on h") from exc
    n = gen.n
    weights = np.abs(evecs) ** 2
    ipr = (weights ** 2).sum(axis=0)
    if selector == "max_ipr":
        idx = int(np.argmax(ipr))
    elif isinstance(selector, (tuple, list)) and selector[0] == "site":
        site = int(selector[1])
        if not (1 <= site <= n):
            raise InvalidArgument(f"site {site} outside 1..{n}")
        idx = int(np.argmax(weights[site - 1]))
    elif isinstance(selector, (tuple, list)) and selector[0] == "max_ipr_window":
        lo, hi = int(selector[1]), int(selector[2])
        min_w = float(selector[3]) if len(selector) > 3 else 0.5
        in_window = weights[lo - 1:hi].sum(axis=0)
        ok = np.where(in_window >= min_w)[0]
        idx = int(ok[np.argmax(ipr[ok])]) if len(ok) else int(np.argmax(ipr))
    else:
        raise InvalidArgument(f"unknown selector {selector!r}")
    psi = evecs[:, idx].astype(complex)
    return WavefunctionState(
        psi=psi,
        meta={"index": idx, "energy": float(evals[idx]), "ipr": float(ipr[idx]),
              "weakly_localized": bool(ipr[idx] < 3.0 / n)})


def evolve_wavefunction(state: WavefunctionState, prop: Propagator
                        ) -> WavefunctionState:
    """psi(t) = U psi(0); norm must stay within 1e-9 of unity."""
    if prop.kind != "xx-unitary":
        raise InvalidArgument(f"wavefunction needs an xx propagator, got {prop.kind}")
    if state.psi.shape[0] != prop.matrix.shape[0]:
        raise InvalidArgument("state and propagator dimensions differ")
    new = WavefunctionState(psi=prop.matrix @ state.psi, meta=dict(state.meta))
    if abs(new.norm - state.norm) > 1e-9:
        raise NumericalFailure(
            f"norm drifted by {abs(new.norm - state.norm):.2e} during evolution")
    return new


class DensityMetrics(NamedTuple):
    ipr: float
    center_of_mass: float
    variance: float


def profile_metrics(weights: np.ndarray) -> DensityMetrics:
    """IPR, center of mass and spatial variance of a nonnegative site profile.

    The profile is normalized to unit sum; sites are 1-indexed.  A profile
    with (near-)zero total weight yields NaNs.
    """
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if not np.isfinite(total) or total <= 1e-300:
        return DensityMetrics(np.nan, np.nan, np.nan)
    p = w / total
    sites = np.arange(1, len(p) + 1, dtype=float)
    com = float(np.sum(sites * p))
    var = float(np.sum((sites - com) ** 2 * p))
    return DensityMetrics(float(np.sum(p ** 2)), com, var)


def density_metrics(state: WavefunctionState) -> DensityMetrics:
    """Metrics of |psi_i|^2: ipr = sum |psi|^4, X = sum i |psi|^2, variance."""
    return profile_metrics(np.abs(state.psi) ** 2)
