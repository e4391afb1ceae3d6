"""kchain: Kuramoto oscillator networks driving free-fermion spin chains.

A classical phase-oscillator network is integrated first; its solution
modulates the site-local transverse fields of an exactly solvable quantum
chain (Ising in the Majorana picture, XX in the single-particle picture).
Synchronization and traveling waves on the classical side imprint band
structure, ballistic spreading and topological pumping on the quantum side.
"""

__version__ = "0.1.0"

from .chain import (ChainParams, DriveField, MajoranaGenerator, Propagator,
                    SpectrumSnapshot, WavefunctionState, XXGenerator,
                    analytic_dispersion, build_majorana_generator,
                    build_xx_generator, covariance_energy,
                    covariance_from_occupations, density_metrics,
                    eigenmode_decomposition, evolve_covariance,
                    evolve_propagator, evolve_wavefunction,
                    ground_state_covariance, instantaneous_spectrum,
                    localized_eigenstate, mode_site_weights,
                    product_state_covariance, profile_metrics,
                    sigma_z_profile)
from .cosim import (Diagnostics, EigenSnapshot, RunResult, Scenario,
                    build_manifest, eigenstate_snapshots, make_drive,
                    run_scenario)
from .errors import (IntegrationDiverged, IntegrationUnstable,
                     InvalidArgument, KchainError, NumericalFailure,
                     OutOfRange, UnsupportedModel)
from .oscillators import (NetworkSpec, PhaseState, PhaseTrajectory, SLState,
                          WaveProfile, build_all_to_all, build_zigzag,
                          detect_sync_onset, integrate, kuramoto_rhs,
                          order_parameter, order_parameter_series,
                          random_initial_phases, sample_amplitudes,
                          sample_phases, stuart_landau_rhs, wave_onset,
                          wave_profile)

__all__ = [name for name in dir() if not name.startswith("_")]
