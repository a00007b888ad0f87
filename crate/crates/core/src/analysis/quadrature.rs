use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::OperatorApproximation;
use crate::assembly::binomial_weights;
use crate::error::{ItqdeError, Result};
use crate::model::{eigendecompose, DenseHermitian, EigenDecomposition};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(ItqdeError::Parameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn gaussian_target(eig: &EigenDecomposition, tau: f64) -> crate::model::CMatrix {
    eig.apply_function(|e| Complex64::new((-tau * e * e).exp(), 0.0))
}

/// `2^{-m} Σ_j C(m,j) e^{-i(2j-m)√(2Δτ)H}` against `e^{-τH²}`, `τ = mΔτ`.
///
/// Per eigenvalue the sum is `w_0 + 2Σ_{j≥1} w_j cos(2j√(2Δτ)E)` with the
/// folded weights, which equals `cos^m(√(2Δτ)E)`.
pub fn discrete_gaussian_operator(h: &DenseHermitian, dtau: f64, m: usize) -> Result<OperatorApproximation> {
    check_positive("dtau", dtau)?;
    let w = binomial_weights(m)?;
    let eig = eigendecompose(h)?;
    let a = 2.0 * (2.0 * dtau).sqrt();
    let approx = eig.apply_function(|e| {
        let tail: f64 = w[1..]
            .iter()
            .enumerate()
            .map(|(i, wj)| wj * ((i + 1) as f64 * a * e).cos())
            .sum();
        Complex64::new(w[0] + 2.0 * tail, 0.0)
    });
    let tau = m as f64 * dtau;
    Ok(OperatorApproximation::new(
        "discrete_gaussian",
        gaussian_target(&eig, tau),
        approx,
        &[("tau", tau), ("dtau", dtau), ("m", m as f64)],
    ))
}

/// Rules for `(1/√π)∫e^{-x²} f(x) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Quadrature {
    /// Nodes `x_j = jδ`, `δ = √(2/m)`, `|j| ≤ m/2`.
    Riemann { m: usize },
    GaussHermite { n: usize },
}

/// Nodes and weights for `∫e^{-x²} f(x) dx` by Golub–Welsch.
///
/// The weights sum to `√π`.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(ItqdeError::Parameter("Gauss-Hermite order must be at least 1".into()));
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // the rule is symmetric; enforce it exactly so odd integrands vanish
    for i in 0..n / 2 {
        let k = n - 1 - i;
        let x = 0.5 * (pairs[k].0 - pairs[i].0);
        let w = 0.5 * (pairs[k].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Ok(pairs.into_iter().unzip())
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `(n! 2^n/(2n)!)(2τ)^n ‖H‖^{2n}`.
pub fn gauss_hermite_bound(n: usize, tau: f64, h_norm: f64) -> f64 {
    gauss_hermite_tight_bound(n, tau, h_norm) * 2f64.powi(n as i32)
}

/// `(n!/(2n)!)(2τ)^n ‖H‖^{2n}`, the remainder of the `1/√π`-normalized rule.
///
/// Only the even (cosine) part of the integrand leaves a remainder, so the
/// real-valued mean-value form applies.
pub fn gauss_hermite_tight_bound(n: usize, tau: f64, h_norm: f64) -> f64 {
    if h_norm == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    (ln_factorial(n) - ln_factorial(2 * n) + nf * (2.0 * tau).ln() + 2.0 * nf * h_norm.ln()).exp()
}

/// Slack for rounding in the eigenbasis round trip when a bound is tiny.
fn rounding_floor(dimension: usize) -> f64 {
    8.0 * f64::EPSILON * dimension as f64
}

/// `(1/√π)∫e^{-x²}e^{-2ix√τH}dx` by `quad`, against `e^{-τH²}`.
///
/// Gauss–Hermite runs carry the bound and fail with a validation error if the
/// error exceeds it.
pub fn hs_integral_operator(h: &DenseHermitian, tau: f64, quad: Quadrature) -> Result<OperatorApproximation> {
    check_positive("tau", tau)?;
    let eig = eigendecompose(h)?;
    let (nodes, weights, params): (Vec<f64>, Vec<f64>, Vec<(&str, f64)>) = match quad {
        Quadrature::Riemann { m } => {
            crate::propagation::check_m(m)?;
            let delta = (2.0 / m as f64).sqrt();
            let half = (m / 2) as i64;
            let xs: Vec<f64> = (-half..=half).map(|j| j as f64 * delta).collect();
            let ws = xs.iter().map(|x| delta * (-x * x).exp()).collect();
            (xs, ws, vec![("tau", tau), ("m", m as f64)])
        }
        Quadrature::GaussHermite { n } => {
            let (x, w) = gauss_hermite(n)?;
            (x, w, vec![("tau", tau), ("n_quad", n as f64)])
        }
    };
    let norm = std::f64::consts::PI.sqrt().recip();
    let st = 2.0 * tau.sqrt();
    let approx = eig.apply_function(|e| {
        nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| Complex64::from_polar(w * norm, -st * x * e))
            .sum()
    });
    let mut out = OperatorApproximation::new("hs_integral", gaussian_target(&eig, tau), approx, &params);
    if let Quadrature::GaussHermite { n } = quad {
        let h_norm = eig.max_abs_energy();
        let bound = gauss_hermite_bound(n, tau, h_norm);
        let tight = gauss_hermite_tight_bound(n, tau, h_norm);
        out.parameters.insert("tight_bound".into(), tight);
        let floor = rounding_floor(eig.dimension());
        out.parameters.insert("rounding_floor".into(), floor);
        out.bound = Some(bound + floor);
        if out.error_norm > tight + floor {
            return Err(ItqdeError::Validation(format!(
                "Gauss-Hermite error {:e} exceeds bound {:e} (n={n}, tau={tau})",
                out.error_norm,
                tight + floor
            )));
        }
    }
    Ok(out)
}
