use num_complex::Complex64;
use serde::Serialize;

use super::weights::WeightScheme;
use crate::error::{ItqdeError, Result};
use crate::propagation::{Trajectory, TrajectoryErrors};

/// Partition functions smaller than this are treated as singular.
pub const DEFAULT_Z_FLOOR: f64 = 1e-13;

/// `⟨O^{(λ)}⟩(τ_k)` and `Z^{(λ)}(τ_k)` on every even prefix `m_k = 2, 4, …, m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImaginaryTimeCurve {
    pub label: String,
    pub dtau: f64,
    pub lambda: f64,
    pub scheme: WeightScheme,
    pub prefixes: Vec<usize>,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub partition: Vec<f64>,
    pub flagged: Vec<bool>,
}

/// λ phases applied to the stored forward overlaps: `e^{-i 2j √(2Δτ) λ}`.
fn shift_phases(dtau: f64, lambda: f64, count: usize) -> Vec<Complex64> {
    let step = 2.0 * (2.0 * dtau).sqrt() * lambda;
    (0..count)
        .map(|j| Complex64::from_polar(1.0, -(j as f64) * step))
        .collect()
}

/// Real part of each phased overlap; index 0 stays unphased.
fn phased_real(overlaps: &[Complex64], phases: &[Complex64]) -> Vec<f64> {
    overlaps.iter().zip(phases).map(|(o, p)| (o * p).re).collect()
}

/// `w_0 x_0 + 2 Σ_{j=1}^{k} w_j x_j` where `w` has `k + 1` entries.
fn folded(w: &[f64], x: &[f64]) -> f64 {
    let tail: f64 = w[1..].iter().zip(&x[1..]).map(|(a, b)| a * b).sum();
    w[0] * x[0] + 2.0 * tail
}

struct Phased {
    z: Vec<f64>,
    n: Option<Vec<f64>>,
}

fn phased(traj: &Trajectory, label: Option<&str>, lambda: f64) -> Result<Phased> {
    let count = traj.records.len();
    let phases = shift_phases(traj.dtau, lambda, count);
    let z = phased_real(&traj.state_overlaps(), &phases);
    let n = match label {
        Some(l) => Some(phased_real(&traj.observable_overlaps(l)?, &phases)),
        None => None,
    };
    Ok(Phased { z, n })
}

/// Value at a single prefix; singular partition functions are an error here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixValue {
    pub m: usize,
    pub tau: f64,
    pub value: f64,
    pub partition: f64,
}

pub fn assemble_at(
    traj: &Trajectory,
    label: &str,
    lambda: f64,
    scheme: WeightScheme,
    m_prefix: usize,
) -> Result<PrefixValue> {
    if m_prefix > traj.m {
        return Err(ItqdeError::Parameter(format!(
            "prefix {m_prefix} exceeds trajectory length m={}",
            traj.m
        )));
    }
    let w = scheme.weights(m_prefix)?;
    let p = phased(traj, Some(label), lambda)?;
    let k = m_prefix / 2;
    let z = folded(&w, &p.z[..=k]);
    let n = folded(&w, &p.n.as_ref().expect("label given")[..=k]);
    if !(z.abs() >= DEFAULT_Z_FLOOR) {
        return Err(ItqdeError::SingularPartition {
            m: m_prefix,
            magnitude: z.abs(),
        });
    }
    Ok(PrefixValue {
        m: m_prefix,
        tau: m_prefix as f64 * traj.dtau,
        value: n / z,
        partition: z,
    })
}

pub fn assemble_curve(
    traj: &Trajectory,
    label: &str,
    lambda: f64,
    scheme: WeightScheme,
) -> Result<ImaginaryTimeCurve> {
    assemble_curve_with_floor(traj, label, lambda, scheme, DEFAULT_Z_FLOOR)
}

/// As [`assemble_curve`]; prefixes with `|Z| < z_floor` get a NaN value and a flag.
pub fn assemble_curve_with_floor(
    traj: &Trajectory,
    label: &str,
    lambda: f64,
    scheme: WeightScheme,
    z_floor: f64,
) -> Result<ImaginaryTimeCurve> {
    traj.validate()?;
    let p = phased(traj, Some(label), lambda)?;
    let nvals = p.n.expect("label given");
    let count = traj.m / 2;
    let mut curve = ImaginaryTimeCurve {
        label: label.to_string(),
        dtau: traj.dtau,
        lambda,
        scheme,
        prefixes: Vec::with_capacity(count),
        taus: Vec::with_capacity(count),
        values: Vec::with_capacity(count),
        partition: Vec::with_capacity(count),
        flagged: Vec::with_capacity(count),
    };
    for k in 1..=count {
        let mk = 2 * k;
        let w = scheme.weights(mk)?;
        let z = folded(&w, &p.z[..=k]);
        let n = folded(&w, &nvals[..=k]);
        let singular = !(z.abs() >= z_floor);
        curve.prefixes.push(mk);
        curve.taus.push(mk as f64 * traj.dtau);
        curve.partition.push(z);
        curve.values.push(if singular { f64::NAN } else { n / z });
        curve.flagged.push(singular);
    }
    Ok(curve)
}

/// Partition function alone, `Z^{(λ)}(τ_k)` for every prefix.
pub fn assemble_partition(traj: &Trajectory, lambda: f64, scheme: WeightScheme) -> Result<Vec<f64>> {
    traj.validate()?;
    let p = phased(traj, None, lambda)?;
    (1..=traj.m / 2)
        .map(|k| Ok(folded(&scheme.weights(2 * k)?, &p.z[..=k])))
        .collect()
}

impl ImaginaryTimeCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rows `tau,value,partition_re,flagged`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,value,partition_re,flagged\n");
        for k in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.taus[k], self.values[k], self.partition[k], self.flagged[k] as u8
            ));
        }
        out
    }
}

/// Mean of the final `window` unflagged values and their half-range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub value: f64,
    pub half_range: f64,
    pub window: usize,
    pub used: usize,
}

/// Last tenth of the prefixes, at least one.
pub fn default_window(curve_len: usize) -> usize {
    curve_len.div_ceil(10).max(1)
}

pub fn steady_state(curve: &ImaginaryTimeCurve, window: usize) -> Result<SteadyState> {
    if window == 0 || window > curve.len() {
        return Err(ItqdeError::Parameter(format!(
            "steady-state window {window} outside 1..={}",
            curve.len()
        )));
    }
    let tail: Vec<f64> = curve.values[curve.len() - window..]
        .iter()
        .zip(&curve.flagged[curve.len() - window..])
        .filter(|(v, f)| !**f && v.is_finite())
        .map(|(v, _)| *v)
        .collect();
    if tail.is_empty() {
        return Err(ItqdeError::NoSteadyState);
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SteadyState {
        value: mean,
        half_range: 0.5 * (hi - lo),
        window,
        used: tail.len(),
    })
}

/// Standard error of the windowed steady state, propagated linearly from
/// independent overlap errors through every `N_k / Z_k` in the window.
pub fn steady_state_std_error(
    traj: &Trajectory,
    errors: &TrajectoryErrors,
    label: &str,
    lambda: f64,
    scheme: WeightScheme,
    window: usize,
) -> Result<f64> {
    traj.validate()?;
    let count = traj.m / 2;
    if window == 0 || window > count {
        return Err(ItqdeError::Parameter(format!(
            "steady-state window {window} outside 1..={count}"
        )));
    }
    let phases = shift_phases(traj.dtau, lambda, count + 1);
    let p = phased(traj, Some(label), lambda)?;
    let nvals = p.n.expect("label given");
    // d(mean)/d(Re r_j), d/d(Im r_j), d/d(Re o_j), d/d(Im o_j)
    let mut grad = vec![[0.0f64; 4]; count + 1];
    let mut used = 0usize;
    for k in count + 1 - window..=count {
        let w = scheme.weights(2 * k)?;
        let z = folded(&w, &p.z[..=k]);
        if !(z.abs() >= DEFAULT_Z_FLOOR) {
            continue;
        }
        let n = folded(&w, &nvals[..=k]);
        used += 1;
        let dz = -n / (z * z);
        grad[0][0] += w[0] * dz;
        grad[0][2] += w[0] / z;
        for j in 1..=k {
            let c = phases[j] * w[j];
            let (dre, dim) = (2.0 * c.re, -2.0 * c.im);
            grad[j][0] += dre * dz;
            grad[j][1] += dim * dz;
            grad[j][2] += dre / z;
            grad[j][3] += dim / z;
        }
    }
    if used == 0 {
        return Err(ItqdeError::NoSteadyState);
    }
    let inv = 1.0 / used as f64;
    let mut var = 0.0;
    for (j, g) in grad.iter().enumerate() {
        let Some(e) = errors.get(j) else { continue };
        let obs = e.obs_se.get(label).copied().unwrap_or([0.0, 0.0]);
        let se = [e.overlap_se[0], e.overlap_se[1], obs[0], obs[1]];
        for (gi, si) in g.iter().zip(se) {
            var += (gi * inv * si).powi(2);
        }
    }
    Ok(var.sqrt())
}

/// Smallest `τ_k` from which every later value stays within `tol` of `target`.
pub fn convergence_tau(curve: &ImaginaryTimeCurve, target: f64, tol: f64) -> Result<Option<f64>> {
    if !(tol > 0.0) {
        return Err(ItqdeError::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut first = None;
    for (k, v) in curve.values.iter().enumerate().rev() {
        if (v - target).abs() < tol {
            first = Some(k);
        } else {
            break;
        }
    }
    Ok(first.map(|k| curve.taus[k]))
}

/// `|estimate - exact| / |ground|`.
pub fn relative_error(estimate: f64, exact: f64, ground: f64) -> Result<f64> {
    if ground == 0.0 {
        return Err(ItqdeError::Parameter(
            "relative error needs a non-zero ground energy".into(),
        ));
    }
    Ok((estimate - exact).abs() / ground.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{to_dense, ObservableSum, PauliTerm};
    use crate::propagation::{make_step_propagator, maximally_mixed_trajectory, RecordErrors};

    fn z_traj(dtau: f64, m: usize) -> Trajectory {
        let z = ObservableSum::new(1, vec![PauliTerm::parse(1.0, "Z").unwrap()]).unwrap();
        let p = make_step_propagator(&to_dense(&z).unwrap(), dtau).unwrap();
        maximally_mixed_trajectory(&p, m, &[("H".into(), z)]).unwrap()
    }

    fn flat_curve(values: Vec<f64>) -> ImaginaryTimeCurve {
        let n = values.len();
        ImaginaryTimeCurve {
            label: "H".into(),
            dtau: 0.1,
            lambda: 0.0,
            scheme: WeightScheme::ExactBinomial,
            prefixes: (1..=n).map(|k| 2 * k).collect(),
            taus: (1..=n).map(|k| 0.2 * k as f64).collect(),
            flagged: values.iter().map(|v| v.is_nan()).collect(),
            partition: vec![1.0; n],
            values,
        }
    }

    #[test]
    fn symmetric_spectrum_gives_zero() {
        let c = assemble_curve(&z_traj(0.01, 200), "H", 0.0, WeightScheme::ExactBinomial).unwrap();
        assert!(c.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn shifted_z_selects_lower_level() {
        let (dtau, m) = (0.01, 2000);
        let c = assemble_curve(&z_traj(dtau, m), "H", 0.5, WeightScheme::ExactBinomial).unwrap();
        // oracle Tr[H e^{-τ(H+λ)²}]/Tr[e^{-τ(H+λ)²}] with H = Z
        for (tau, v) in c.taus.iter().zip(&c.values) {
            let (a, b) = ((-tau * 0.25f64).exp(), (-tau * 2.25f64).exp());
            let want = (b - a) / (a + b);
            assert!((v - want).abs() < 5e-3, "tau={tau}: {v} vs {want}");
        }
        let s = steady_state(&c, default_window(c.len())).unwrap();
        assert!((s.value + 1.0).abs() < 1e-3, "{}", s.value);
    }

    #[test]
    fn prefix_matches_curve() {
        let t = z_traj(0.01, 40);
        let c = assemble_curve(&t, "H", 0.3, WeightScheme::ExactBinomial).unwrap();
        let p = assemble_at(&t, "H", 0.3, WeightScheme::ExactBinomial, 24).unwrap();
        assert_eq!(p.value, c.values[11]);
        assert!(assemble_at(&t, "H", 0.3, WeightScheme::ExactBinomial, 42).is_err());
        assert!(assemble_curve(&t, "missing", 0.3, WeightScheme::ExactBinomial).is_err());
    }

    #[test]
    fn steady_state_cases() {
        let s = steady_state(&flat_curve(vec![2.5; 20]), 4).unwrap();
        assert_eq!((s.value, s.half_range), (2.5, 0.0));
        let ramp = flat_curve((0..20).map(|k| k as f64).collect());
        let s = steady_state(&ramp, 4).unwrap();
        assert_eq!(s.half_range, 1.5);
        let mut nan = flat_curve(vec![1.0; 5]);
        nan.values[4] = f64::NAN;
        nan.flagged[4] = true;
        assert!(matches!(steady_state(&nan, 1), Err(ItqdeError::NoSteadyState)));
        assert_eq!(steady_state(&nan, 2).unwrap().used, 1);
        assert!(steady_state(&nan, 0).is_err());
        assert!(steady_state(&nan, 6).is_err());
    }

    #[test]
    fn convergence_tau_cases() {
        let c = flat_curve(vec![3.0; 10]);
        assert_eq!(convergence_tau(&c, 3.0, 1e-4).unwrap(), Some(c.taus[0]));
        let ramp = flat_curve((0..10).map(|k| k as f64).collect());
        assert_eq!(convergence_tau(&ramp, -1.0, 0.5).unwrap(), None);
        let decay = flat_curve((0..10).map(|k| 0.5f64.powi(k)).collect());
        assert_eq!(convergence_tau(&decay, 0.0, 0.1).unwrap(), Some(decay.taus[4]));
        assert!(convergence_tau(&c, 3.0, 0.0).is_err());
    }

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(1.0, 1.0, -5.0).unwrap(), 0.0);
        assert!((relative_error(-4.9, -5.0, -5.0).unwrap() - 0.02).abs() < 1e-15);
        assert!(relative_error(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn singular_partition_is_flagged() {
        let t = z_traj(0.01, 20);
        let c = assemble_curve_with_floor(&t, "H", 0.0, WeightScheme::ExactBinomial, 10.0).unwrap();
        assert!(c.flagged.iter().all(|&f| f));
        assert!(c.values.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn zero_errors_give_zero_uncertainty() {
        let t = z_traj(0.01, 40);
        let errors = TrajectoryErrors {
            records: (0..=20).map(|j| (j, RecordErrors::default())).collect(),
        };
        let se = steady_state_std_error(&t, &errors, "H", 0.5, WeightScheme::ExactBinomial, 2).unwrap();
        assert_eq!(se, 0.0);
    }

    #[test]
    fn uncertainty_matches_finite_differences() {
        let mut t = z_traj(0.01, 40);
        let (lambda, window, label) = (0.7, 3, "H");
        let base = |t: &Trajectory| {
            let c = assemble_curve(t, label, lambda, WeightScheme::ExactBinomial).unwrap();
            steady_state(&c, window).unwrap().value
        };
        // one unit of error on Im r_5 only
        let mut errors = TrajectoryErrors::default();
        errors.records.insert(5, RecordErrors { overlap_se: [0.0, 1.0], ..Default::default() });
        let se = steady_state_std_error(&t, &errors, label, lambda, WeightScheme::ExactBinomial, window).unwrap();
        let v0 = base(&t);
        let h = 1e-6;
        t.records[5].state_overlap += Complex64::new(0.0, h);
        let fd = (base(&t) - v0) / h;
        assert!((se - fd.abs()).abs() < 1e-5 * (1.0 + fd.abs()), "{se} vs {fd}");
    }
}
