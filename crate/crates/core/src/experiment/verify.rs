use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::config::ModelSpec;
use crate::analysis::{hs_integral_operator, Quadrature};
use crate::assembly::{assemble_at, binomial_weights, folded_sum, WeightScheme};
use crate::error::{ItqdeError, Result};
use crate::model::dense::check_dense_limit;
use crate::model::{eigendecompose, to_dense, Boundary, CMatrix, DEFAULT_DENSE_LIMIT};
use crate::propagation::{evolve_trajectory, maximally_mixed_trajectory, make_step_propagator, StateVector};
use crate::sampling::{estimator_trajectory, hadamard_trajectory};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub qubits: usize,
    pub m: usize,
    pub dtau: f64,
    pub dense_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { qubits: 3, m: 20, dtau: 1e-2, dense_limit: DEFAULT_DENSE_LIMIT }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub qubits: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn suite(name: &'static str, worst: f64, tolerance: f64) -> SuiteResult {
    SuiteResult { name, passed: worst <= tolerance, worst, tolerance }
}

/// `Tr(O L^m[ρ]) / Tr(L^m[ρ])` with `L[ρ] = (UρU + U†ρU†)/2`, `U = e^{-i√(Δτ/2)H}`.
fn superoperator_value(u: &CMatrix, rho0: &CMatrix, o: &CMatrix, m: usize) -> f64 {
    let ud = u.adjoint();
    let mut rho = rho0.clone();
    for _ in 0..m {
        rho = (u * &rho * u + &ud * &rho * &ud) * Complex64::new(0.5, 0.0);
    }
    ((o * &rho).trace() / rho.trace()).re
}

/// Invariant suites on a TFIM chain of `qubits` sites (`J = 1`, `h = 2`).
pub fn verify(options: &VerifyOptions) -> Result<VerifyReport> {
    if options.m == 0 || options.m % 2 == 1 {
        return Err(ItqdeError::config("m", format!("must be even and positive, got {}", options.m)));
    }
    if !(options.dtau > 0.0) {
        return Err(ItqdeError::config("dtau", "must be positive"));
    }
    check_dense_limit(options.qubits, options.dense_limit)?;
    let model = ModelSpec::Tfim { j: 1.0, h: 2.0, sites: options.qubits, boundary: Boundary::Open };
    let h = model.build()?;
    let dense = to_dense(&h)?;
    let eig = eigendecompose(&dense)?;
    let prop = make_step_propagator(&dense, options.dtau)?;
    let labels = [("H".to_string(), h.clone())];
    let d = dense.dimension();
    let (m, dtau) = (options.m, options.dtau);
    let mut suites = Vec::new();

    let u = eig.apply_function(|e| Complex64::from_polar(1.0, -(dtau / 2.0).sqrt() * e));
    let psi = StateVector::basis(options.qubits, 0)?;
    let v = DVector::from_column_slice(psi.amplitudes());
    let pure = evolve_trajectory(&psi, &prop, m, &labels)?;
    let mixed = maximally_mixed_trajectory(&prop, m, &labels)?;
    let mut worst = 0.0f64;
    for k in (2..=m).step_by(2) {
        let a = assemble_at(&pure, "H", 0.0, WeightScheme::ExactBinomial, k)?.value;
        let b = superoperator_value(&u, &(&v * v.adjoint()), dense.matrix(), k);
        let c = assemble_at(&mixed, "H", 0.0, WeightScheme::ExactBinomial, k)?.value;
        let e = superoperator_value(&u, &CMatrix::identity(d, d), dense.matrix(), k);
        worst = worst.max((a - b).abs()).max((c - e).abs());
    }
    suites.push(suite("superoperator_equivalence", worst, 1e-9));

    let worst = [2usize, 100, 1000, 10_000]
        .iter()
        .map(|&m| Ok((folded_sum(&binomial_weights(m)?) - 1.0).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    suites.push(suite("weight_normalization", worst, 1e-12));

    let mut ratio = 0.0f64;
    for tau in [0.5, 1.0] {
        for n in [2, 4, 8, 16] {
            let a = hs_integral_operator(&dense, tau, Quadrature::GaussHermite { n })?;
            ratio = ratio.max(a.error_norm / a.bound.expect("Gauss-Hermite bound"));
        }
    }
    suites.push(suite("gauss_hermite_bound", ratio, 1.0));

    let est = estimator_trajectory(&psi, &prop, m, &labels)?;
    suites.push(suite("estimator_agreement", est.max_deviation(&pure), 1e-9));
    let had = hadamard_trajectory(&StateVector::plus(options.qubits), &prop, m, &labels)?;
    let direct = evolve_trajectory(&StateVector::plus(options.qubits), &prop, m, &labels)?;
    suites.push(suite("hadamard_agreement", had.max_deviation(&direct), 1e-9));

    Ok(VerifyReport { qubits: options.qubits, suites })
}
