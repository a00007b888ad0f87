use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::CMatrix;

/// An operator built by some rule next to the exact operator it stands for.
#[derive(Debug, Clone)]
pub struct OperatorApproximation {
    pub op: &'static str,
    pub target: CMatrix,
    pub approximation: CMatrix,
    /// Spectral norm of `target - approximation`.
    pub error_norm: f64,
    pub frobenius_error: f64,
    pub parameters: BTreeMap<String, f64>,
    pub bound: Option<f64>,
}

/// The JSON-facing part of an [`OperatorApproximation`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationRecord {
    pub op: String,
    pub parameters: BTreeMap<String, f64>,
    pub error_norm: f64,
    pub frobenius_error: f64,
    pub bound: Option<f64>,
    pub passed: bool,
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

impl OperatorApproximation {
    pub(crate) fn new(
        op: &'static str,
        target: CMatrix,
        approximation: CMatrix,
        parameters: &[(&str, f64)],
    ) -> Self {
        let diff = &target - &approximation;
        Self {
            op,
            error_norm: spectral_norm(&diff),
            frobenius_error: diff.norm(),
            target,
            approximation,
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            bound: None,
        }
    }

    /// `passed` is `error_norm ≤ bound` when a bound exists, else `tolerance`.
    pub fn record(&self, tolerance: f64) -> ApproximationRecord {
        let limit = self.bound.unwrap_or(tolerance);
        ApproximationRecord {
            op: self.op.to_string(),
            parameters: self.parameters.clone(),
            error_norm: self.error_norm,
            frobenius_error: self.frobenius_error,
            bound: self.bound,
            passed: self.error_norm <= limit,
        }
    }
}
