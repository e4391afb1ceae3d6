"""Cross-checks of the Gaussian-state machinery against dense 2^N dynamics.

The reference integrator lives in oracles.py: it builds the spin Hamiltonian
H = -sum_j g_j sigma^z_j - Jx sum_j sigma^x_j sigma^x_{j+1} from dense Pauli
matrices and integrates the full Schroedinger equation with an adaptive
high-order method.  Nothing is shared with the Majorana covariance route, so
agreement validates the generator convention, the covariance evolution and
the sigma^z sign in one shot.
"""

import numpy as np
import pytest

from kchain.chain import (ChainParams, DriveField, build_majorana_generator,
                          build_xx_generator, covariance_energy,
                          covariance_from_occupations,
                          eigenmode_decomposition, evolve_propagator,
                          ground_state_covariance, evolve_covariance,
                          product_state_covariance, sigma_z_profile)
from kchain.oscillators import (build_all_to_all, integrate,
                                random_initial_phases, sample_phases)

from oracles import (evolve_dense, fermion_ops, ising_hamiltonian, pauli_ops,
                     product_state, xx_hamiltonian)


def _kuramoto_drive(n, seed, t_end):
    """A real classical trajectory to modulate the fields in the oracle runs."""
    net = build_all_to_all(n, 0.5 / n, 0.5)
    return integrate(net, random_initial_phases(n, seed), 0.01, t_end)


def _dense_sz_series(n, jx, g_of_t, psi0, times):
    sx, _, sz = pauli_ops(n)

    def h_of(t):
        return ising_hamiltonian(g_of_t(t), jx, sx, sz)

    psis = evolve_dense(h_of, psi0, times)
    out = np.empty((len(times), n))
    for k, psi in enumerate(psis):
        for j in range(n):
            out[k, j] = np.real(np.vdot(psi, sz[j] @ psi))
    return out


def _covariance_sz_series(params, g_of_t, gamma0, times, dt):
    def gen_at(t):
        return build_majorana_generator(params, DriveField(t=t, g=g_of_t(t)))

    out = np.empty((len(times), params.n))
    out[0] = sigma_z_profile(gamma0)
    for k in range(1, len(times)):
        prop = evolve_propagator(gen_at, times[0], times[k], dt)
        out[k] = sigma_z_profile(evolve_covariance(gamma0, prop))
    return out


@pytest.mark.parametrize("n,seed", [(3, 1), (4, 2)])
def test_driven_ising_sigma_z_matches_dense_manybody(n, seed):
    """Covariance dynamics equals brute force within 1e-6 over Jt = 10."""
    t_end = 10.0
    traj = _kuramoto_drive(n, seed, t_end)
    g_amp = 3.0

    def g_of_t(t):
        return g_amp * np.cos(sample_phases(traj, t))

    params = ChainParams(n=n, jx=1.0, jy=0.0, g_amp=g_amp)
    times = np.linspace(0.0, t_end, 11)

    # product state with one flipped spin
    z_pattern = np.ones(n)
    z_pattern[n // 2] = -1.0
    gamma0 = product_state_covariance(z_pattern)
    psi0 = product_state(z_pattern)

    dense = _dense_sz_series(n, params.jx, g_of_t, psi0, times)
    cov = _covariance_sz_series(params, g_of_t, gamma0, times, dt=0.002)
    assert np.abs(dense - cov).max() <= 1e-6


def test_ground_state_preparation_matches_dense_manybody():
    n = 4
    rng = np.random.default_rng(5)
    g = rng.uniform(-2.5, 2.5, n)
    params = ChainParams(n=n, jx=1.0, jy=0.0, g_amp=3.0)
    gen = build_majorana_generator(params, DriveField(t=0.0, g=g))
    gamma = ground_state_covariance(gen)

    sx, _, sz = pauli_ops(n)
    h_dense = ising_hamiltonian(g, params.jx, sx, sz)
    evals, evecs = np.linalg.eigh(h_dense)
    psi_gs = evecs[:, 0]

    # energies agree
    assert covariance_energy(gamma, gen) == pytest.approx(evals[0], abs=1e-9)
    # sigma^z profiles agree
    dense_prof = np.array([np.real(np.vdot(psi_gs, sz[j] @ psi_gs))
                           for j in range(n)])
    np.testing.assert_allclose(sigma_z_profile(gamma), dense_prof, atol=1e-8)


def test_excitation_energies_match_dense_spectrum():
    """Flipping mode m must cost exactly the m-th quasiparticle energy."""
    n = 3
    rng = np.random.default_rng(9)
    g = rng.uniform(-2, 2, n)
    params = ChainParams(n=n, jx=0.8, jy=0.0, g_amp=3.0)
    gen = build_majorana_generator(params, DriveField(t=0.0, g=g))
    modes = eigenmode_decomposition(gen)

    sx, _, sz = pauli_ops(n)
    dense = np.sort(np.linalg.eigvalsh(ising_hamiltonian(g, params.jx, sx, sz)))

    e0 = covariance_energy(
        covariance_from_occupations(modes, np.zeros(n, dtype=int)), gen)
    assert e0 == pytest.approx(dense[0], abs=1e-9)
    # the full many-body spectrum is { e0 + sum over excited modes }
    energies = []
    for bits in range(2 ** n):
        occ = np.array([(bits >> m) & 1 for m in range(n)])
        energies.append(e0 + occ @ modes.energies)
    np.testing.assert_allclose(np.sort(energies), dense, atol=1e-8)


def test_xx_single_particle_matches_dense_number_sector():
    """One-fermion densities from psi(t) = U psi(0) equal the dense evolution."""
    n = 4
    t_end = 8.0
    traj = _kuramoto_drive(n, 7, t_end)
    g_amp = 3.0

    def g_of_t(t):
        return g_amp * np.cos(sample_phases(traj, t))

    params = ChainParams(n=n, jx=1.0, jy=1.0, g_amp=g_amp)

    def gen_at(t):
        return build_xx_generator(params, DriveField(t=t, g=g_of_t(t)))

    fops = fermion_ops(n)

    def h_dense_of(t):
        return xx_hamiltonian(gen_at(t).matrix, fops)

    # initial single-particle state localized on site 2 (fermion on site idx 1)
    psi_sp0 = np.zeros(n, dtype=complex)
    psi_sp0[1] = 1.0
    psi_mb0 = fops[1].conj().T @ product_state(np.ones(n))

    times = np.linspace(0.0, t_end, 9)
    dense = evolve_dense(h_dense_of, psi_mb0, times)
    number_ops = [fops[i].conj().T @ fops[i] for i in range(n)]
    for k, t in enumerate(times):
        if t == 0.0:
            continue
        prop = evolve_propagator(gen_at, 0.0, t, 0.002)
        dens_sp = np.abs(prop.matrix @ psi_sp0) ** 2
        dens_mb = np.array([np.real(np.vdot(dense[k], nop @ dense[k]))
                            for nop in number_ops])
        np.testing.assert_allclose(dens_sp, dens_mb, atol=1e-6)
        assert dens_sp.sum() == pytest.approx(1.0, abs=1e-9)
