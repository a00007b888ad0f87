use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{
    assemble_curve, default_window, steady_state, steady_state_std_error,
};
use super::weights::WeightScheme;
use crate::error::{ItqdeError, Result};
use crate::propagation::{Trajectory, TrajectoryErrors};

/// One energy read off the sweep and the λ-interval it governs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub energy: f64,
    /// λ at which the steady value is flattest.
    pub lambda: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub label: String,
    pub scheme: WeightScheme,
    pub window: usize,
    pub lambdas: Vec<f64>,
    /// Steady `⟨O⟩(τ_final)` for the unshifted observable.
    pub steady_values: Vec<f64>,
    /// `⟨O⟩ + λ`, the shifted reading.
    pub steady_plus_lambda: Vec<f64>,
    pub half_ranges: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub plateau_tolerance: f64,
    pub plateaus: Vec<Plateau>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions<'a> {
    /// Defaults to the last tenth of the prefixes.
    pub window: Option<usize>,
    pub errors: Option<&'a TrajectoryErrors>,
}

pub fn sweep_lambda(
    traj: &Trajectory,
    label: &str,
    lambdas: &[f64],
    scheme: WeightScheme,
) -> Result<SpectrumEstimate> {
    sweep_lambda_with(traj, label, lambdas, scheme, &SweepOptions::default())
}

pub fn sweep_lambda_with(
    traj: &Trajectory,
    label: &str,
    lambdas: &[f64],
    scheme: WeightScheme,
    options: &SweepOptions<'_>,
) -> Result<SpectrumEstimate> {
    check_grid(lambdas)?;
    traj.validate()?;
    if !traj.has_label(label) {
        return Err(ItqdeError::Validation(format!(
            "observable {label:?} not recorded in trajectory"
        )));
    }
    let window = options.window.unwrap_or_else(|| default_window(traj.m / 2));
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let curve = assemble_curve(traj, label, lambda, scheme)?;
            let (value, half) = match steady_state(&curve, window) {
                Ok(s) => (s.value, s.half_range),
                Err(ItqdeError::NoSteadyState) => (f64::NAN, f64::NAN),
                Err(e) => return Err(e),
            };
            let se = match options.errors {
                Some(errs) => match steady_state_std_error(traj, errs, label, lambda, scheme, window) {
                    Ok(se) => Some(se),
                    Err(ItqdeError::NoSteadyState) => Some(f64::NAN),
                    Err(e) => return Err(e),
                },
                None => None,
            };
            Ok((value, half, se))
        })
        .collect::<Result<Vec<_>>>()?;
    let steady_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (plateaus, plateau_tolerance) = detect_plateaus(lambdas, &steady_values);
    Ok(SpectrumEstimate {
        label: label.to_string(),
        scheme,
        window,
        lambdas: lambdas.to_vec(),
        steady_plus_lambda: steady_values.iter().zip(lambdas).map(|(v, l)| v + l).collect(),
        steady_values,
        half_ranges: rows.iter().map(|r| r.1).collect(),
        std_errors: options
            .errors
            .map(|_| rows.iter().map(|r| r.2.unwrap_or(f64::NAN)).collect()),
        plateau_tolerance,
        plateaus,
    })
}

pub(crate) fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(ItqdeError::Parameter("empty lambda grid".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(ItqdeError::Parameter("lambda grid has non-finite values".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ItqdeError::Parameter(
            "lambda grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Derivative along a possibly non-uniform grid: second-order centered
/// differences inside, one-sided at the ends.
fn gradient(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut g = vec![0.0; n];
    g[0] = (y[1] - y[0]) / (x[1] - x[0]);
    g[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        let hd = x[i] - x[i - 1];
        let hs = x[i + 1] - x[i];
        g[i] = (hd * hd * y[i + 1] - hs * hs * y[i - 1] + (hs * hs - hd * hd) * y[i])
            / (hs * hd * (hd + hs));
    }
    g
}

/// `max(1e-3 · span, 5 · median gap)` over the sorted values.
pub fn plateau_tolerance(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.len() < 2 {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let span = v[v.len() - 1] - v[0];
    let mut gaps: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let mid = gaps.len() / 2;
    let median = if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        0.5 * (gaps[mid - 1] + gaps[mid])
    };
    (1e-3 * span).max(5.0 * median)
}

/// Plateaus are the flattest points of the steady-value staircase.
///
/// Candidates are local minima of `|ds/dλ|`. Neighbouring candidates whose
/// values differ by less than the tolerance are one plateau, represented by
/// the flatter of the two. Plateau intervals are split at the steepest point
/// between neighbouring candidates, so they never overlap.
pub fn detect_plateaus(lambdas: &[f64], values: &[f64]) -> (Vec<Plateau>, f64) {
    let idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
    let x: Vec<f64> = idx.iter().map(|&i| lambdas[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let eps = plateau_tolerance(&y);
    let n = x.len();
    if n == 0 {
        return (Vec::new(), eps);
    }
    if n == 1 {
        let p = Plateau {
            energy: y[0],
            lambda: x[0],
            lambda_min: x[0],
            lambda_max: x[0],
            points: 1,
        };
        return (vec![p], eps);
    }
    let slope: Vec<f64> = gradient(&x, &y).iter().map(|g| g.abs()).collect();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || slope[i] <= slope[i - 1];
            let right = i == n - 1 || slope[i] <= slope[i + 1];
            left && right
        })
        .collect();

    let mut merged: Vec<usize> = Vec::new();
    for c in candidates.drain(..) {
        match merged.last_mut() {
            Some(last) if (y[c] - y[*last]).abs() < eps => {
                if slope[c] < slope[*last] {
                    *last = c;
                }
            }
            _ => merged.push(c),
        }
    }

    let mut starts = vec![0usize];
    for pair in merged.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let split = (a + 1..=b)
            .max_by(|&p, &q| slope[p].total_cmp(&slope[q]).then(q.cmp(&p)))
            .unwrap_or(b);
        starts.push(split);
    }
    let plateaus = merged
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let lo = starts[k];
            let hi = if k + 1 < starts.len() { starts[k + 1] - 1 } else { n - 1 };
            Plateau {
                energy: y[c],
                lambda: x[c],
                lambda_min: x[lo],
                lambda_max: x[hi],
                points: hi - lo + 1,
            }
        })
        .collect();
    (plateaus, eps)
}

impl SpectrumEstimate {
    pub fn energies(&self) -> Vec<f64> {
        self.plateaus.iter().map(|p| p.energy).collect()
    }

    /// Rows `lambda,steady_value,steady_plus_lambda,halfrange`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,steady_value,steady_plus_lambda,halfrange\n");
        for k in 0..self.lambdas.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.lambdas[k], self.steady_values[k], self.steady_plus_lambda[k], self.half_ranges[k]
            ));
        }
        out
    }

    pub fn plateaus_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            label: &'a str,
            scheme: WeightScheme,
            tolerance: f64,
            plateaus: &'a [Plateau],
        }
        Ok(serde_json::to_string_pretty(&Summary {
            label: &self.label,
            scheme: self.scheme,
            tolerance: self.plateau_tolerance,
            plateaus: &self.plateaus,
        })?)
    }
}
