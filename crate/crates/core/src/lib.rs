//! Gain sensing of quantum-limited amplifiers: Fisher information of number
//! and coherent probes, photon-counting simulation, gain estimators and the
//! energy-constrained Bures distance between amplifier channels.

pub mod amplifier;
pub mod bures;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod montecarlo;
pub mod params;

pub use amplifier::{
    added_photon_cutoff, count_moments, displaced_thermal_params, fock_transition_prob,
    lemma_identity_check, lossy_count_distribution, lossy_count_pmf_on_support, nb_pmf,
    DisplacedThermalParams, ModeInput, PhotonNumberDistribution, DEFAULT_TAIL_TOL,
};
pub use bures::{
    min_fidelity_classical, min_fidelity_quantum, nds_fidelity_lower_bound_check, EcbResult,
};
pub use error::{Error, Result};
pub use estimators::{
    g_hat, mse_coherent_analytic, mse_number_analytic, threshold_gain, MseBreakdown,
};
pub use fisher::{
    fi_heterodyne, fi_homodyne, fi_of_pmf_family, fi_schmidt_counting, fidelity_coherent,
    fidelity_coherent_lossy, fidelity_nds, qfi_coherent, qfi_coherent_lossy, qfi_from_fidelity,
    qfi_nds, qfi_nds_tau, qfi_number_lossy, qfi_number_lossy_multimode, FisherValue,
    LossyNumberQfi, Parameter,
};
pub use montecarlo::{
    chi_square_test, run_estimator_trials, run_estimator_trials_with_workers, EstimatorStats,
    TrialPlan,
};
pub use params::{probe_totals, DetectorSpec, Gain, GainPair, ProbeSpec, MAX_GAIN};
