//! Emulated quantum path: Hadamard-test shot noise, Pauli decomposition,
//! random initial ensembles and the Hermitian-combination estimator.

mod ensemble;
mod estimator;
mod hadamard;

pub use ensemble::{random_initial_state, Ensemble};
pub use estimator::{estimator_commuting_form, estimator_overlaps, estimator_trajectory};
pub use hadamard::{
    circuit_count, decompose_observable, hadamard_probabilities, hadamard_trajectory,
    sample_overlap, sample_trajectory, CircuitKey, OverlapCircuit, SampledOverlap,
    SampledTrajectory, ShotPlan,
};
