use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{ItqdeError, Result};
use crate::model::{to_dense, CMatrix, ObservableSum};
use crate::propagation::{
    operator_overlap, InitialCondition, OverlapRecord, StateVector, StepPropagator, Trajectory,
};

const AGREEMENT_TOL: f64 = 1e-9;

fn expectation(psi: &StateVector, a: &CMatrix) -> Complex64 {
    let v = DVector::from_column_slice(psi.amplitudes());
    (v.adjoint() * (a * &v))[(0, 0)]
}

/// `<ψ_0|S_Re|ψ_0> + i <ψ_0|S_Im|ψ_0>` with `A = U^{2j} O U^{2j}`,
/// `S_Re = (A + A†)/2` and `S_Im = (A - A†)/2i`.
///
/// Both parts are expectations of Hermitian operators. The result is checked
/// against the direct `<ψ_{-2j}|O|ψ_{2j}>`.
pub fn estimator_overlaps(
    psi0: &StateVector,
    prop: &StepPropagator,
    j: usize,
    obs: &ObservableSum,
) -> Result<Complex64> {
    let o = to_dense(obs)?.into_matrix();
    let value = estimator_from_dense(psi0, prop, j, &o)?;
    let k = 2 * j as i64;
    let direct = operator_overlap(&prop.advance(psi0, -k)?, obs, &prop.advance(psi0, k)?)?;
    if (value - direct).norm() > AGREEMENT_TOL {
        return Err(ItqdeError::Validation(format!(
            "estimator overlap {value} disagrees with direct overlap {direct} at j={j}"
        )));
    }
    Ok(value)
}

fn estimator_from_dense(
    psi0: &StateVector,
    prop: &StepPropagator,
    j: usize,
    o: &CMatrix,
) -> Result<Complex64> {
    if o.nrows() != psi0.dimension() || prop.dimension() != psi0.dimension() {
        return Err(ItqdeError::Validation(
            "observable, propagator and state dimensions differ".into(),
        ));
    }
    let u = prop.power_matrix(2 * j as i64);
    let a = &u * o * &u;
    let ad = a.adjoint();
    let s_re = (&a + &ad) * Complex64::new(0.5, 0.0);
    let s_im = (&a - &ad) * Complex64::new(0.0, -0.5);
    let re = expectation(psi0, &s_re).re;
    let im = expectation(psi0, &s_im).re;
    Ok(Complex64::new(re, im))
}

/// The literal commuting form `<ψ_0|O (U^{4j} ± U^{-4j})/2|ψ_0>`.
///
/// Equal to [`estimator_overlaps`] when `[O, H] = 0` and wrong otherwise.
pub fn estimator_commuting_form(
    psi0: &StateVector,
    prop: &StepPropagator,
    j: usize,
    obs: &ObservableSum,
) -> Result<Complex64> {
    let o = to_dense(obs)?.into_matrix();
    let fwd = prop.power_matrix(4 * j as i64);
    let bwd = prop.power_matrix(-(4 * j as i64));
    let re = expectation(psi0, &(&o * (&fwd + &bwd) * Complex64::new(0.5, 0.0)));
    let im = expectation(psi0, &(&o * (&fwd - &bwd) * Complex64::new(0.0, -0.5)));
    Ok(Complex64::new(re.re, im.re))
}

/// A whole trajectory through the estimator path; the state overlap uses `O = I`.
pub fn estimator_trajectory(
    psi0: &StateVector,
    prop: &StepPropagator,
    m: usize,
    observables: &[(String, ObservableSum)],
) -> Result<Trajectory> {
    crate::propagation::check_m(m)?;
    let d = psi0.dimension();
    let dense: Vec<(String, CMatrix)> = observables
        .iter()
        .map(|(l, o)| Ok((l.clone(), to_dense(o)?.into_matrix())))
        .collect::<Result<_>>()?;
    let identity = CMatrix::identity(d, d);
    let records = (0..=m / 2)
        .map(|j| {
            let state_overlap = estimator_from_dense(psi0, prop, j, &identity)?;
            let mut obs = BTreeMap::new();
            for (l, o) in &dense {
                obs.insert(l.clone(), estimator_from_dense(psi0, prop, j, o)?);
            }
            Ok(OverlapRecord {
                j,
                state_overlap,
                observable_overlaps: obs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        dtau: prop.dtau(),
        m,
        initial_condition: InitialCondition::Pure(psi0.clone()),
        records,
        observable_labels: observables.iter().map(|(l, _)| l.clone()).collect(),
    })
}
