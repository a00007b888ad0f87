use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::OperatorApproximation;
use crate::error::{ItqdeError, Result};
use crate::model::{eigendecompose, DenseHermitian};

/// How each shifted Gaussian `e^{-τ(H-μ)²}` in the inversion sum is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionKernel {
    /// Exact operator Gaussians.
    #[default]
    Exact,
    /// The large-m discrete sum over `|j| ≤ K²` with `m = 2K²`.
    DiscreteHs,
}

/// `m` rounded to the nearest `2K²`, with that `K ≥ 1`.
pub fn snap_inversion_m(m: usize) -> (usize, usize) {
    let k = ((m as f64 / 2.0).sqrt().round() as usize).max(1);
    (2 * k * k, k)
}

/// The admissible times `t_k = 2k√τ/K`, `k = 0..=K²`.
pub fn inversion_times(tau: f64, grid: usize) -> Vec<f64> {
    (0..=grid * grid)
        .map(|k| 2.0 * k as f64 * tau.sqrt() / grid as f64)
        .collect()
}

/// Integer `k` with `t = 2k√τ/K`, or a grid error.
pub fn inversion_index(tau: f64, t: f64, grid: usize) -> Result<i64> {
    if grid == 0 {
        return Err(ItqdeError::Parameter("K must be at least 1".into()));
    }
    if !(tau > 0.0 && t.is_finite()) {
        return Err(ItqdeError::Parameter(format!("need tau > 0 and finite t, got tau={tau}, t={t}")));
    }
    let kf = t * grid as f64 / (2.0 * tau.sqrt());
    let k = kf.round();
    if (kf - k).abs() > 1e-9 * kf.abs().max(1.0) {
        return Err(ItqdeError::IncompatibleGrid(format!(
            "t={t} is not on the grid 2k*sqrt(tau)/K for tau={tau}, K={grid} (k={kf})"
        )));
    }
    let limit = (grid * grid) as f64;
    if k.abs() > limit {
        return Err(ItqdeError::IncompatibleGrid(format!(
            "|k|={} exceeds K^2={limit}; the sum aliases beyond it",
            k.abs()
        )));
    }
    Ok(k as i64)
}

fn discrete_gaussian(e: f64, mu: f64, tau: f64, grid: usize) -> f64 {
    // (1/√π) Σ δ e^{-x_j²} cos(2x_j√τ(E-μ)), x_j = j/K
    let delta = 1.0 / grid as f64;
    let half = (grid * grid) as i64;
    let arg = 2.0 * tau.sqrt() * (e - mu);
    let s: f64 = (-half..=half)
        .map(|j| {
            let x = j as f64 * delta;
            (-x * x).exp() * (x * arg).cos()
        })
        .sum();
    s * delta / std::f64::consts::PI.sqrt()
}

/// `√π e^{t²/4τ} Σ_{λ<K} G_λ(E) e^{-iπλt/√τ}` for a single energy.
pub fn inversion_scalar(e: f64, tau: f64, t: f64, grid: usize, kernel: InversionKernel) -> Complex64 {
    let pi = std::f64::consts::PI;
    let st = tau.sqrt();
    let sum: Complex64 = (0..grid)
        .map(|l| {
            let mu = pi * l as f64 / st;
            let g = match kernel {
                InversionKernel::Exact => (-tau * (e - mu) * (e - mu)).exp(),
                InversionKernel::DiscreteHs => discrete_gaussian(e, mu, tau, grid),
            };
            Complex64::from_polar(g, -pi * l as f64 * t / st)
        })
        .sum();
    sum * pi.sqrt() * (t * t / (4.0 * tau)).exp()
}

/// `e^{t²/4τ} Σ_{j ≡ k (mod K), j ≠ k, |j| ≤ K²} e^{-j²/K²} e^{-2ij√τE/K}`.
///
/// The exact residual of the [`InversionKernel::DiscreteHs`] reconstruction.
pub fn inversion_alias_sum(e: f64, tau: f64, k: i64, grid: usize) -> Complex64 {
    let kk = grid as i64;
    let half = kk * kk;
    let t = 2.0 * k as f64 * tau.sqrt() / grid as f64;
    let mut s = Complex64::new(0.0, 0.0);
    let mut j = k.rem_euclid(kk) - half - kk;
    while j <= half {
        if j >= -half && j != k {
            let x = j as f64 / grid as f64;
            s += Complex64::from_polar((-x * x).exp(), -2.0 * x * tau.sqrt() * e);
        }
        j += kk;
    }
    s * (t * t / (4.0 * tau)).exp()
}

/// `e^{-itH}` rebuilt from `K` shifted Gaussians, against the exact propagator.
///
/// `t` must be `2k√τ/K` with `|k| ≤ K²`.
pub fn invert_itqde_propagator(
    h: &DenseHermitian,
    tau: f64,
    t: f64,
    grid: usize,
    kernel: InversionKernel,
) -> Result<OperatorApproximation> {
    let k = inversion_index(tau, t, grid)?;
    let eig = eigendecompose(h)?;
    let target = eig.apply_function(|e| Complex64::from_polar(1.0, -t * e));
    let approx = eig.apply_function(|e| inversion_scalar(e, tau, t, grid, kernel));
    let kernel_code = match kernel {
        InversionKernel::Exact => 0.0,
        InversionKernel::DiscreteHs => 1.0,
    };
    Ok(OperatorApproximation::new(
        "invert_propagator",
        target,
        approx,
        &[
            ("tau", tau),
            ("t", t),
            ("K", grid as f64),
            ("k", k as f64),
            ("m", 2.0 * (grid * grid) as f64),
            ("discrete_kernel", kernel_code),
        ],
    ))
}
