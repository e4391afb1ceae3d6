import numpy as np
import pytest

from kchain.errors import IntegrationDiverged, InvalidArgument, OutOfRange
from kchain.oscillators import (NetworkSpec, PhaseState, PhaseTrajectory,
                                SLState, build_all_to_all, build_zigzag,
                                detect_sync_onset, integrate, kuramoto_rhs,
                                order_parameter, random_initial_phases,
                                sample_phases, stuart_landau_rhs, wave_profile)

SQ3_2 = np.sqrt(3.0) / 2.0


class TestBuilders:
    def test_all_to_all_fig2_parameters(self):
        net = build_all_to_all(3, 0.5, 0.5)
        assert np.all(net.coupling == 0.5)
        assert np.all(net.delay == 0.0)
        assert np.all(net.freqs == 0.5)

    def test_all_to_all_single_oscillator_free_rotation(self):
        net = build_all_to_all(1, 7.0, 1.0)
        d = kuramoto_rhs(PhaseState(0.0, np.array([0.3])), net)
        assert d == pytest.approx([1.0])

    def test_all_to_all_zero_coupling_decouples(self):
        net = build_all_to_all(2, 0.0, 2.0)
        d = kuramoto_rhs(PhaseState(0.0, np.array([0.1, 2.5])), net)
        np.testing.assert_allclose(d, [2.0, 2.0])

    def test_all_to_all_rejects_empty(self):
        with pytest.raises(InvalidArgument):
            build_all_to_all(0, 1.0, 1.0)

    def test_zigzag_structure(self):
        net = build_zigzag(30, 0.2, 0.1, 0.04)
        K, B = net.coupling, net.delay
        assert K[0, 1] == 0.2 and K[0, 2] == 0.1
        assert B[0, 1] == pytest.approx(-2 * np.pi / 3)
        assert B[0, 2] == pytest.approx(-4 * np.pi / 3)
        # unidirectional: no reverse entries
        assert K[1, 0] == 0.0 and K[2, 0] == 0.0
        assert np.all(net.freqs == 0.04)

    def test_zigzag_open_boundary_truncation(self):
        net = build_zigzag(3, 0.2, 0.1, 0.0)
        assert np.all(net.coupling[2] == 0.0)

    def test_zigzag_k2_zero_is_nearest_neighbor_chain(self):
        net = build_zigzag(4, 1.0, 0.0, 0.0)
        for i in range(3):
            assert net.coupling[i, i + 1] == 1.0
            assert net.delay[i, i + 1] == pytest.approx(-2 * np.pi / 3)
        assert np.all(net.coupling[:, 2:][np.triu_indices(2)] >= 0)
        assert np.count_nonzero(net.coupling) == 3

    def test_zigzag_rejects_small_networks(self):
        with pytest.raises(InvalidArgument):
            build_zigzag(2, 0.2, 0.1, 0.0)

    def test_normal_frequency_spec(self):
        net = build_all_to_all(2000, 0.1,
                               {"kind": "normal", "mean": 0.5, "std": 0.1,
                                "seed": 11})
        assert net.freqs.mean() == pytest.approx(0.5, abs=0.02)
        assert net.freqs.std() == pytest.approx(0.1, rel=0.2)


class TestKuramotoRhs:
    def test_two_oscillator_hand_evaluation(self):
        net = build_all_to_all(2, 0.5, 1.0)
        d = kuramoto_rhs(PhaseState(0.0, np.array([0.0, np.pi / 2])), net)
        np.testing.assert_allclose(d, [1.5, 0.5])

    def test_equal_phases_give_bare_frequencies(self):
        net = build_all_to_all(7, 1.3, 0.4)
        d = kuramoto_rhs(PhaseState(0.0, np.full(7, 2.2)), net)
        np.testing.assert_allclose(d, net.freqs, atol=1e-14)

    def test_zigzag_hand_evaluation_with_truncation(self):
        net = build_zigzag(3, 0.2, 0.1, 0.0)
        theta = np.array([0.0, -2 * np.pi / 3, -4 * np.pi / 3])
        d = kuramoto_rhs(PhaseState(0.0, theta), net)
        np.testing.assert_allclose(
            d, [(0.2 - 0.1) * SQ3_2, 0.2 * SQ3_2, 0.0], atol=1e-14)

    def test_dimension_mismatch(self):
        net = build_all_to_all(3, 1.0, 0.0)
        with pytest.raises(InvalidArgument):
            kuramoto_rhs(PhaseState(0.0, np.zeros(4)), net)

    def test_shift_equivariance(self):
        rng = np.random.default_rng(5)
        net = NetworkSpec(4, rng.normal(size=(4, 4)), rng.normal(size=(4, 4)),
                          rng.normal(size=4))
        theta = rng.uniform(-np.pi, np.pi, 4)
        for c in (0.1, -3.0, 17.0):
            d1 = kuramoto_rhs(PhaseState(0.0, theta), net)
            d2 = kuramoto_rhs(PhaseState(0.0, theta + c), net)
            np.testing.assert_allclose(d1, d2, atol=1e-12)


class TestStuartLandauRhs:
    def test_limit_cycle_radius_is_fixed_point(self):
        net = build_all_to_all(1, 0.0, 1.0)
        dr, dth = stuart_landau_rhs(
            SLState(0.0, np.array([1.0]), np.array([0.0])), net, 1.0, 0.5)
        assert dr[0] == pytest.approx(0.0, abs=1e-14)

    def test_origin_is_fixed_point(self):
        net = build_all_to_all(1, 0.0, 0.7)
        dr, dth = stuart_landau_rhs(
            SLState(0.0, np.array([0.0]), np.array([0.2])), net, 1.0, 0.5)
        assert dr[0] == 0.0
        assert dth[0] == pytest.approx(-0.7)

    def test_symmetric_pair_equal_phases(self):
        K = np.array([[0.0, 0.3], [0.3, 0.0]])
        net = NetworkSpec(2, K, np.zeros((2, 2)), np.array([0.5, 0.5]))
        dr, dth = stuart_landau_rhs(
            SLState(0.0, np.ones(2), np.full(2, 1.1)), net, 1.0, 0.5)
        np.testing.assert_allclose(dr, 0.0, atol=1e-14)
        np.testing.assert_allclose(dth, [-0.5 - 0.3, -0.5 - 0.3])

    def test_rejects_nonpositive_kappa2(self):
        net = build_all_to_all(1, 0.0, 1.0)
        with pytest.raises(InvalidArgument):
            stuart_landau_rhs(SLState(0.0, np.ones(1), np.zeros(1)), net,
                              1.0, 0.0)


class TestIntegrate:
    def test_linear_phase_growth(self):
        net = build_all_to_all(1, 0.0, 0.5)
        traj = integrate(net, PhaseState(0.0, np.zeros(1)), 0.01, 10.0)
        assert traj.phases[-1, 0] == pytest.approx(5.0, abs=1e-10)

    def test_pair_difference_decays_monotonically(self):
        net = build_all_to_all(2, 0.5, 1.0)
        traj = integrate(net, PhaseState(0.0, np.array([0.0, 0.1])), 0.01, 5.0)
        diff = traj.phases[:, 1] - traj.phases[:, 0]
        assert np.all(np.diff(diff) < 0)
        assert abs(diff[-1]) < 1e-3

    def test_rk4_fourth_order_against_fine_reference(self):
        net = build_all_to_all(3, 0.4, 0.9)
        th0 = PhaseState(0.0, np.array([0.0, 1.0, -2.0]))
        ref = integrate(net, th0, 0.02 / 16, 4.0).phases[-1]
        errs = {}
        for dt in (0.02, 0.01, 0.005):
            errs[dt] = np.abs(integrate(net, th0, dt, 4.0).phases[-1] - ref).max()
        # halving dt gains >= 12x; dt^4 scaling within a factor-of-2 band
        assert errs[0.02] / errs[0.01] >= 12.0
        assert 8.0 <= errs[0.01] / errs[0.005] <= 32.0

    def test_mean_phase_drift_is_exact_for_symmetric_coupling(self):
        rng = np.random.default_rng(8)
        K = rng.uniform(0, 0.4, (6, 6))
        K = K + K.T
        net = NetworkSpec(6, K, np.zeros((6, 6)), rng.uniform(0.2, 0.8, 6))
        th0 = rng.uniform(-np.pi, np.pi, 6)
        traj = integrate(net, PhaseState(0.0, th0), 0.01, 50.0)
        expected = th0.mean() + net.freqs.mean() * traj.grid
        np.testing.assert_allclose(traj.phases.mean(axis=1), expected, atol=1e-8)

    def test_stuart_landau_amplitude_converges_to_limit_cycle(self):
        net = build_all_to_all(1, 0.0, 1.0)
        for r0 in (0.05, 0.5, 2.0, 10.0):
            traj = integrate(net, SLState(0.0, np.array([r0]), np.zeros(1)),
                             0.005, 40.0, model="stuart_landau",
                             kappa1=1.0, kappa2=0.5)
            assert traj.amplitudes[-1, 0] == pytest.approx(1.0, abs=1e-6)

    def test_integration_divergence_reports_time(self):
        net = build_all_to_all(1, 0.0, 1.0)
        with pytest.raises(IntegrationDiverged) as err:
            integrate(net, SLState(0.0, np.array([1e3]), np.zeros(1)),
                      1.0, 50.0, model="stuart_landau", kappa1=1e3, kappa2=1e-3)
        assert err.value.t > 0

    def test_determinism(self):
        net = build_zigzag(10, 0.2, 0.1, 0.04)
        st = random_initial_phases(10, 3)
        a = integrate(net, st, 0.01, 5.0)
        b = integrate(net, st, 0.01, 5.0)
        assert np.array_equal(a.phases, b.phases)

    def test_rejects_bad_steps(self):
        net = build_all_to_all(1, 0.0, 1.0)
        with pytest.raises(InvalidArgument):
            integrate(net, PhaseState(0.0, np.zeros(1)), -0.1, 1.0)
        with pytest.raises(InvalidArgument):
            integrate(net, PhaseState(1.0, np.zeros(1)), 0.1, 0.5)


class TestRandomInitialPhases:
    def test_deterministic_for_fixed_seed(self):
        a = random_initial_phases(30, 42)
        b = random_initial_phases(30, 42)
        assert np.array_equal(a.theta, b.theta)

    def test_uniform_moments(self):
        st = random_initial_phases(10_000, 7)
        assert -0.1 < st.theta.mean() < 0.1
        assert st.theta.var() == pytest.approx(np.pi ** 2 / 3, rel=0.1)

    def test_range(self):
        for seed in range(5):
            st = random_initial_phases(1, seed)
            assert -np.pi <= st.theta[0] <= np.pi


class TestOrderParameter:
    def test_identical_phases(self):
        for a in (0.0, 1.3, -2.0):
            r, psi = order_parameter(np.full(3, a))
            assert r == pytest.approx(1.0)
            assert psi == pytest.approx(a)

    def test_balanced_splay_state(self):
        r, _ = order_parameter(np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3]))
        assert r == pytest.approx(0.0, abs=1e-15)

    def test_two_phase_hand_value(self):
        r, psi = order_parameter(np.array([0.0, np.pi / 2]))
        assert r == pytest.approx(np.sqrt(2) / 2)
        assert psi == pytest.approx(np.pi / 4)

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgument):
            order_parameter(np.array([]))

    def test_invariance_under_shift_and_permutation(self):
        rng = np.random.default_rng(0)
        theta = rng.uniform(-np.pi, np.pi, 20)
        r0, _ = order_parameter(theta)
        r1, _ = order_parameter(theta + 1.7)
        r2, _ = order_parameter(rng.permutation(theta))
        assert r1 == pytest.approx(r0, abs=1e-12)
        assert r2 == pytest.approx(r0, abs=1e-12)


def _const_traj(rows, dt=0.1):
    rows = np.asarray(rows, dtype=float)
    grid = dt * np.arange(rows.shape[0])
    return PhaseTrajectory(grid=grid, phases=rows)


class TestDetectSyncOnset:
    def test_constant_identical_phases_onset_at_start(self):
        traj = _const_traj(np.tile([0.4, 0.4, 0.4], (8, 1)))
        assert detect_sync_onset(traj, 0.99) == pytest.approx(0.0)

    def test_frozen_splay_never_syncs(self):
        splay = np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
        traj = _const_traj(np.tile(splay, (8, 1)))
        assert detect_sync_onset(traj, 0.99) is None

    def test_onset_after_transient(self):
        net = build_all_to_all(30, 0.5 / 30, 0.5)
        traj = integrate(net, random_initial_phases(30, 42), 0.01, 40.0)
        onset = detect_sync_onset(traj, 0.99)
        assert onset is not None and 0.0 < onset < 30.0
        rs = np.abs(np.exp(1j * traj.phases).mean(axis=1))
        assert np.all(rs[traj.grid >= onset] >= 0.99)

    def test_threshold_validation(self):
        traj = _const_traj(np.zeros((4, 2)))
        with pytest.raises(InvalidArgument):
            detect_sync_onset(traj, 0.0)


class TestWaveProfile:
    def test_constructed_wave_is_exact(self):
        omega, n = 0.3, 12
        grid = 0.05 * np.arange(400)
        phases = omega * grid[:, None] - 2 * np.pi / 3 * np.arange(n)[None, :]
        traj = PhaseTrajectory(grid=grid, phases=phases)
        prof = wave_profile(traj, (5.0, 15.0))
        assert prof.delta == pytest.approx(-2 * np.pi / 3, abs=1e-12)
        assert prof.omega_eff == pytest.approx(omega, abs=1e-12)
        assert prof.circ_std == pytest.approx(0.0, abs=1e-7)

    def test_synchronized_state_has_zero_delta(self):
        grid = 0.1 * np.arange(50)
        phases = np.tile(0.7 * grid[:, None], (1, 5))
        traj = PhaseTrajectory(grid=grid, phases=phases)
        prof = wave_profile(traj, (0.0, 4.9))
        assert prof.delta == pytest.approx(0.0, abs=1e-12)

    def test_zigzag_steady_state_locks_at_plus_two_pi_thirds(self):
        # The locked profile satisfies theta_{i+1} - theta_i = +2pi/3 and the
        # common frequency equals the bare omega: every delay term then
        # vanishes, which also refutes the omega + (sqrt(3)/2)(K1-K2)
        # candidate closed form (it would require a nonzero coupling torque).
        net = build_zigzag(12, 0.2, 0.1, 0.04)
        traj = integrate(net, random_initial_phases(12, 2), 0.02, 3000.0)
        prof = wave_profile(traj, (2500.0, 3000.0))
        assert prof.delta == pytest.approx(2 * np.pi / 3, abs=1e-3)
        assert prof.circ_std < 1e-3
        assert prof.omega_eff == pytest.approx(0.04, abs=1e-6)

    def test_window_validation(self):
        traj = _const_traj(np.zeros((20, 3)))
        with pytest.raises(InvalidArgument):
            wave_profile(traj, (0.0, 99.0))
        with pytest.raises(InvalidArgument):
            wave_profile(traj, (0.0, 0.3))  # fewer than 10 samples


class TestSamplePhases:
    def test_grid_points_are_bitwise_exact(self):
        net = build_all_to_all(4, 0.3, 0.8)
        traj = integrate(net, random_initial_phases(4, 1), 0.01, 2.0)
        for k in (0, 7, 200):
            assert np.array_equal(sample_phases(traj, traj.grid[k]),
                                  traj.phases[k])

    def test_linear_trajectory_reproduced_at_midpoints(self):
        grid = 0.1 * np.arange(30)
        phases = np.outer(grid, np.array([0.7, -0.2]))
        traj = PhaseTrajectory(grid=grid, phases=phases)
        for t in (0.05, 0.55, 2.84):
            np.testing.assert_allclose(
                sample_phases(traj, t), np.array([0.7, -0.2]) * t, atol=1e-10)

    def test_midpoint_error_scales_as_dt4(self):
        # single oscillator with a smooth sine-perturbed phase
        def make(dt):
            grid = dt * np.arange(int(4.0 / dt) + 1)
            phases = (0.5 * grid + 0.3 * np.sin(2.1 * grid))[:, None]
            return PhaseTrajectory(grid=grid, phases=phases)

        def midpoint_err(traj):
            dt = traj.dt
            ts = traj.grid[3:-3] + dt / 2
            exact = 0.5 * ts + 0.3 * np.sin(2.1 * ts)
            got = np.array([sample_phases(traj, t)[0] for t in ts])
            return np.abs(got - exact).max()

        e1 = midpoint_err(make(0.08))
        e2 = midpoint_err(make(0.04))
        assert e1 / e2 > 10.0  # ~16x for a 4th-order-accurate interpolant

    def test_out_of_range(self):
        traj = _const_traj(np.zeros((5, 2)))
        with pytest.raises(OutOfRange):
            sample_phases(traj, -1.0)
        with pytest.raises(OutOfRange):
            sample_phases(traj, 99.0)


class TestTrajectoryValidation:
    def test_rejects_nonuniform_grid(self):
        with pytest.raises(InvalidArgument):
            PhaseTrajectory(grid=np.array([0.0, 0.1, 0.3]),
                            phases=np.zeros((3, 1)))

    def test_rejects_row_mismatch(self):
        with pytest.raises(InvalidArgument):
            PhaseTrajectory(grid=np.array([0.0, 0.1]), phases=np.zeros((3, 1)))
