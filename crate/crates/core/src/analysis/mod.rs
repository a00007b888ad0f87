//! Operator-level checks of the continuum limit and the identities built on it.

mod identities;
mod inversion;
mod operator;
mod quadrature;

pub use identities::{
    crooks_check, crooks_like_expectation, gaussian_weight_defect, generalized_hs_check,
    generalized_hs_report, two_level_acceleration, two_level_itqde_ratio, CrooksCheck,
    GeneralizedHsReport, DEFAULT_HS_ORDER,
};
pub use inversion::{
    invert_itqde_propagator, inversion_alias_sum, inversion_index, inversion_scalar,
    inversion_times, snap_inversion_m, InversionKernel,
};
pub use operator::{spectral_norm, ApproximationRecord, OperatorApproximation};
pub use quadrature::{
    discrete_gaussian_operator, gauss_hermite, gauss_hermite_bound, gauss_hermite_tight_bound,
    hs_integral_operator, Quadrature,
};
