//! Real-time propagation under `U = exp(-i √(Δτ/2) H)` and overlap trajectories.

mod state;
mod trajectory;

pub use state::{make_step_propagator, operator_overlap, StateVector, StepPropagator};
pub use trajectory::{
    evolve_trajectory, maximally_mixed_trajectory, InitialCondition, OverlapRecord, RecordErrors, Trajectory,
    TrajectoryErrors,
};
pub(crate) use trajectory::check_m;
