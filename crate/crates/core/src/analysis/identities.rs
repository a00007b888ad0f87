use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::quadrature::gauss_hermite;
use crate::assembly::{assemble_at, WeightScheme};
use crate::error::{ItqdeError, Result};
use crate::model::{eigendecompose, CMatrix, DenseHermitian, EigenDecomposition, ObservableSum, PauliTerm};
use crate::propagation::{maximally_mixed_trajectory, InitialCondition, StateVector, StepPropagator, Trajectory};

/// `√(2/(mπ))[Re r_0 + 2Σ_{j≥1} e^{-2j²/m} Re r_j]` for a pure-state trajectory.
///
/// The `j = 0` term enters once. Approximates `⟨ψ_0|e^{-τH²}|ψ_0⟩`, `τ = mΔτ`.
pub fn crooks_like_expectation(traj: &Trajectory) -> Result<f64> {
    if !matches!(traj.initial_condition, InitialCondition::Pure(_)) {
        return Err(ItqdeError::Parameter(
            "the overlap identity needs a pure initial state".into(),
        ));
    }
    traj.validate()?;
    let w = WeightScheme::GaussianAsymptotic.weights(traj.m)?;
    let r = traj.state_overlaps();
    let tail: f64 = w[1..].iter().zip(&r[1..]).map(|(w, r)| w * r.re).sum();
    Ok(w[0] * r[0].re + 2.0 * tail)
}

/// `√(2/(mπ))(1 + 2Σ_{j=1}^{m/2} e^{-2j²/m}) - 1`: the value for `H = 0` minus one.
pub fn gaussian_weight_defect(m: usize) -> Result<f64> {
    let w = WeightScheme::GaussianAsymptotic.weights(m)?;
    Ok(crate::assembly::folded_sum(&w) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrooksCheck {
    pub value: f64,
    pub exact: f64,
    pub deviation: f64,
    pub weight_defect: f64,
}

/// [`crooks_like_expectation`] next to the dense `⟨ψ_0|e^{-τH²}|ψ_0⟩`.
pub fn crooks_check(traj: &Trajectory, eig: &EigenDecomposition) -> Result<CrooksCheck> {
    let value = crooks_like_expectation(traj)?;
    let InitialCondition::Pure(psi) = &traj.initial_condition else {
        unreachable!("checked above")
    };
    if psi.dimension() != eig.dimension() {
        return Err(ItqdeError::Validation("state and Hamiltonian dimensions differ".into()));
    }
    let tau = traj.m as f64 * traj.dtau;
    let a = eig.to_eigenbasis(psi.amplitudes());
    let exact = a
        .iter()
        .zip(&eig.energies)
        .map(|(a, e)| a.norm_sqr() * (-tau * e * e).exp())
        .sum::<f64>();
    Ok(CrooksCheck {
        value,
        exact,
        deviation: (value - exact).abs(),
        weight_defect: gaussian_weight_defect(traj.m)?,
    })
}

/// Max elementwise gaps between the quadrature right-hand side
/// `(1/√π)∫e^{-x²}e^{-ix√τH}|ψ_0⟩⟨ψ_0|e^{-ix√τH}dx` and three left-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralizedHsReport {
    /// `e^{-τH²/2} ρ_mix e^{-τH²/2}`, `ρ_mix` with `a_k a_l* e^{-τE_kE_l/2}`.
    pub printed: f64,
    /// Same sandwich, `ρ_mix` exponent `-τ(E_k²+E_l²)/2`.
    pub squared_exponent: f64,
    /// `e^{-τH²/4} ρ_mix e^{-τH²/4}` with the printed `ρ_mix`.
    pub quarter_sandwich: f64,
    pub order: usize,
}

impl GeneralizedHsReport {
    pub fn holding_readings(&self, tol: f64) -> Vec<&'static str> {
        [
            ("printed", self.printed),
            ("squared_exponent", self.squared_exponent),
            ("quarter_sandwich", self.quarter_sandwich),
        ]
        .into_iter()
        .filter(|(_, d)| *d <= tol)
        .map(|(n, _)| n)
        .collect()
    }
}

pub const DEFAULT_HS_ORDER: usize = 40;

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Evaluates the mixed-state transform for every reading; returns the report.
///
/// `a_l` is conjugated so the left-hand sides are built from `|ψ_0⟩⟨ψ_0|`.
pub fn generalized_hs_report(
    psi0: &StateVector,
    h: &DenseHermitian,
    tau: f64,
    order: usize,
) -> Result<GeneralizedHsReport> {
    if !(tau > 0.0) {
        return Err(ItqdeError::Parameter(format!("tau must be positive, got {tau}")));
    }
    if psi0.dimension() != h.dimension() {
        return Err(ItqdeError::Validation("state and Hamiltonian dimensions differ".into()));
    }
    let eig = eigendecompose(h)?;
    let (nodes, weights) = gauss_hermite(order)?;
    let v = DVector::from_column_slice(psi0.amplitudes());
    let pi_norm = std::f64::consts::PI.sqrt().recip();
    let mut rhs = CMatrix::zeros(v.len(), v.len());
    for (x, w) in nodes.iter().zip(&weights) {
        let u = eig.apply_function(|e| Complex64::from_polar(1.0, -x * tau.sqrt() * e));
        let uv = &u * &v;
        // e^{-ix√τH}|ψ⟩⟨ψ|e^{-ix√τH} = (Uψ)(U†ψ)†
        let udv = u.adjoint() * &v;
        rhs += (uv * udv.adjoint()) * Complex64::new(w * pi_norm, 0.0);
    }
    let a = eig.to_eigenbasis(psi0.amplitudes());
    let e = &eig.energies;
    let in_energy_basis = |f: &dyn Fn(usize, usize) -> f64| {
        let d = e.len();
        let inner = CMatrix::from_fn(d, d, |k, l| a[k] * a[l].conj() * f(k, l));
        &eig.vectors * inner * eig.vectors.adjoint()
    };
    let printed = in_energy_basis(&|k, l| (-tau * e[k] * e[l] / 2.0 - tau * (e[k] * e[k] + e[l] * e[l]) / 2.0).exp());
    let squared = in_energy_basis(&|k, l| (-tau * (e[k] * e[k] + e[l] * e[l])).exp());
    let quarter = in_energy_basis(&|k, l| (-tau * e[k] * e[l] / 2.0 - tau * (e[k] * e[k] + e[l] * e[l]) / 4.0).exp());
    Ok(GeneralizedHsReport {
        printed: max_abs(&(printed - &rhs)),
        squared_exponent: max_abs(&(squared - &rhs)),
        quarter_sandwich: max_abs(&(quarter - &rhs)),
        order,
    })
}

/// Max elementwise deviation of the identity as printed.
pub fn generalized_hs_check(psi0: &StateVector, h: &DenseHermitian, tau: f64) -> Result<f64> {
    Ok(generalized_hs_report(psi0, h, tau, DEFAULT_HS_ORDER)?.printed)
}

/// `p(E_1)/p(E_0) = e^{-4τΔ(Ē+λ)}` under `e^{-τ(H+λ)²}` for levels `Ē ∓ Δ`.
pub fn two_level_acceleration(ebar: f64, delta: f64, lambda: f64, tau: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(ItqdeError::Parameter(format!("Delta must be positive, got {delta}")));
    }
    Ok((-4.0 * tau * delta * (ebar + lambda)).exp())
}

/// The same ratio read off an ITQDE curve on `diag(Ē-Δ, Ē+Δ)` from `ρ(0) ∝ I`.
///
/// `p_1 = (⟨H⟩ - E_0)/2Δ`. Uses `m = 2⌈τ/2Δτ⌉` steps.
pub fn two_level_itqde_ratio(ebar: f64, delta: f64, lambda: f64, tau: f64, dtau: f64) -> Result<f64> {
    two_level_acceleration(ebar, delta, lambda, tau)?;
    let half = (tau / (2.0 * dtau)).round().max(1.0) as usize;
    let m = 2 * half;
    let dtau = tau / m as f64;
    let h = DenseHermitian::from_real_diagonal(&[ebar - delta, ebar + delta]);
    let prop = StepPropagator::from_eigen(std::sync::Arc::new(eigendecompose(&h)?), dtau)?;
    let obs = ObservableSum::new(
        1,
        vec![PauliTerm::parse(ebar, "I")?, PauliTerm::parse(-delta, "Z")?],
    )?;
    let traj = maximally_mixed_trajectory(&prop, m, &[("H".to_string(), obs)])?;
    let v = assemble_at(&traj, "H", lambda, WeightScheme::ExactBinomial, m)?;
    let p1 = (v.value - (ebar - delta)) / (2.0 * delta);
    Ok(p1 / (1.0 - p1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_tfim, to_dense, Boundary};
    use crate::propagation::{evolve_trajectory, make_step_propagator};

    fn tfim2() -> DenseHermitian {
        to_dense(&build_tfim(1.0, 2.0, 2, Boundary::Open).unwrap()).unwrap()
    }

    #[test]
    fn crooks_zero_hamiltonian() {
        let h = DenseHermitian::from_real_diagonal(&[0.0, 0.0]);
        let p = make_step_propagator(&h, 1e-3).unwrap();
        let t = evolve_trajectory(&StateVector::plus(1), &p, 1000, &[]).unwrap();
        let v = crooks_like_expectation(&t).unwrap();
        let d = gaussian_weight_defect(1000).unwrap();
        assert!((v - 1.0 - d).abs() < 1e-14);
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn crooks_eigenstate() {
        let h = DenseHermitian::from_real_diagonal(&[0.7, -0.3]);
        let p = make_step_propagator(&h, 5e-4).unwrap();
        let t = evolve_trajectory(&StateVector::basis(1, 0).unwrap(), &p, 1000, &[]).unwrap();
        let v = crooks_like_expectation(&t).unwrap();
        assert!((v - (-0.5f64 * 0.49).exp()).abs() < 1e-4);
    }

    #[test]
    fn crooks_tfim_dense() {
        let h = tfim2();
        let eig = eigendecompose(&h).unwrap();
        let p = make_step_propagator(&h, 0.2 / 1000.0).unwrap();
        let t = evolve_trajectory(&StateVector::basis(2, 0).unwrap(), &p, 1000, &[]).unwrap();
        let c = crooks_check(&t, &eig).unwrap();
        assert!(c.deviation < 1e-3, "{c:?}");
    }

    #[test]
    fn crooks_rejects_mixed() {
        let p = make_step_propagator(&tfim2(), 0.01).unwrap();
        let t = maximally_mixed_trajectory(&p, 10, &[]).unwrap();
        assert!(crooks_like_expectation(&t).is_err());
    }

    #[test]
    fn generalized_hs_zero_hamiltonian() {
        let h = DenseHermitian::from_real_diagonal(&[0.0; 4]);
        let psi = StateVector::plus(2);
        let r = generalized_hs_report(&psi, &h, 0.7, 40).unwrap();
        assert!(r.printed < 1e-14 && r.squared_exponent < 1e-14 && r.quarter_sandwich < 1e-14);
    }

    #[test]
    fn generalized_hs_readings_on_random_state() {
        let h = tfim2();
        let amps = (0..4)
            .map(|i| Complex64::new(0.3 + i as f64 * 0.2, 0.5 - i as f64 * 0.31))
            .collect();
        let psi = StateVector::normalized(amps).unwrap();
        let r = generalized_hs_report(&psi, &h, 0.3, DEFAULT_HS_ORDER).unwrap();
        assert!(r.quarter_sandwich < 1e-6, "{r:?}");
        assert!(r.printed > 1e-3 && r.squared_exponent > 1e-3, "{r:?}");
        assert_eq!(r.holding_readings(1e-6), vec!["quarter_sandwich"]);
    }

    #[test]
    fn generalized_hs_eigenstate_scalar() {
        // RHS is e^{-τE²}; the printed reading gives e^{-3τE²/2}
        let h = DenseHermitian::from_real_diagonal(&[0.5, -1.0]);
        let r = generalized_hs_report(&StateVector::basis(1, 0).unwrap(), &h, 1.0, 40).unwrap();
        assert!(r.quarter_sandwich < 1e-12);
        assert!((r.printed - ((-0.25f64).exp() - (-0.375f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn two_level_closed_form() {
        assert_eq!(two_level_acceleration(1.0, 0.5, -1.0, 3.0).unwrap(), 1.0);
        assert!((two_level_acceleration(1.0, 0.5, 1.0, 1.0).unwrap() - (-4f64).exp()).abs() < 1e-16);
        assert!(two_level_acceleration(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn two_level_matches_itqde() {
        for lambda in [0.0, 0.5, 1.0] {
            let want = two_level_acceleration(1.0, 0.5, lambda, 0.5).unwrap();
            let got = two_level_itqde_ratio(1.0, 0.5, lambda, 0.5, 1e-5).unwrap();
            assert!(((got - want) / want).abs() < 1e-3, "λ={lambda}: {got} vs {want}");
        }
    }
}
