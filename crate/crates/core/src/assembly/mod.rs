//! Imaginary-time curves and partition functions assembled from a trajectory,
//! λ shifts applied as phases, and spectrum extraction from λ sweeps.

mod curve;
mod sweep;
mod weights;

pub use curve::{
    assemble_at, assemble_curve, assemble_curve_with_floor, assemble_partition, convergence_tau,
    default_window, relative_error, steady_state, steady_state_std_error, ImaginaryTimeCurve,
    PrefixValue, SteadyState, DEFAULT_Z_FLOOR,
};
pub use sweep::{
    detect_plateaus, plateau_tolerance, sweep_lambda, sweep_lambda_with, Plateau,
    SpectrumEstimate, SweepOptions,
};
pub use weights::{binomial_weights, cached_weights, folded_sum, gaussian_weights, WeightScheme};
