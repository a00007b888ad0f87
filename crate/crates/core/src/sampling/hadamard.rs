use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{keyed_rng, random_initial_state, Ensemble};
use crate::error::{ItqdeError, Result};
use crate::model::{CMatrix, ObservableSum, PauliTerm};
use crate::propagation::{
    evolve_trajectory, InitialCondition, OverlapRecord, RecordErrors, StateVector,
    StepPropagator, Trajectory, TrajectoryErrors,
};

fn missing_propagator() -> ItqdeError {
    ItqdeError::Validation("this circuit needs a propagator".into())
}

/// The unitary whose expectation a Hadamard test estimates.
#[derive(Debug, Clone, PartialEq)]
pub enum OverlapCircuit {
    Identity,
    /// `U^{4j}`: the state overlap.
    Power4j { j: usize },
    /// `U^{2j} P U^{2j}` for a unit-coefficient Pauli string `P`.
    Sandwich { j: usize, term: PauliTerm },
    /// Any unitary given as a matrix.
    Matrix(CMatrix),
}

impl OverlapCircuit {
    /// `W|φ>`.
    pub fn apply(&self, phi: &StateVector, prop: Option<&StepPropagator>) -> Result<Vec<Complex64>> {
        match self {
            OverlapCircuit::Identity => Ok(phi.amplitudes().to_vec()),
            OverlapCircuit::Power4j { j } => {
                Ok(prop.ok_or_else(missing_propagator)?.advance(phi, 4 * *j as i64)?.amplitudes().to_vec())
            }
            OverlapCircuit::Sandwich { j, term } => {
                let p = prop.ok_or_else(missing_propagator)?;
                if term.qubit_count() != phi.qubit_count() {
                    return Err(ItqdeError::Validation(format!(
                        "Pauli string on {} qubits, state on {}",
                        term.qubit_count(),
                        phi.qubit_count()
                    )));
                }
                let k = 2 * *j as i64;
                let mid = p.advance(phi, k)?;
                let mut out = vec![Complex64::new(0.0, 0.0); phi.dimension()];
                let unit = PauliTerm::new(1.0, term.letters().to_vec())?;
                unit.apply_into(Complex64::new(1.0, 0.0), mid.amplitudes(), &mut out);
                let flipped = StateVector::from_raw(out);
                Ok(p.advance(&flipped, k)?.amplitudes().to_vec())
            }
            OverlapCircuit::Matrix(w) => {
                if w.nrows() != phi.dimension() || w.ncols() != phi.dimension() {
                    return Err(ItqdeError::Validation(format!(
                        "unitary is {}x{}, state dimension {}",
                        w.nrows(),
                        w.ncols(),
                        phi.dimension()
                    )));
                }
                let v = DVector::from_column_slice(phi.amplitudes());
                Ok((w * v).iter().copied().collect())
            }
        }
    }
}

/// `|0>`-probabilities of the real and imaginary Hadamard tests.
///
/// The real branch measures `‖(φ + Wφ)/2‖² = (1 + Re⟨W⟩)/2`. The imaginary
/// branch inserts `S†` on the ancilla, giving `‖(φ - iWφ)/2‖² = (1 + Im⟨W⟩)/2`.
pub fn hadamard_probabilities(
    psi0: &StateVector,
    w: &OverlapCircuit,
    prop: Option<&StepPropagator>,
) -> Result<(f64, f64)> {
    if let OverlapCircuit::Identity = w {
        return Ok((1.0, 0.5));
    }
    let phi = psi0.amplitudes();
    let wphi = w.apply(psi0, prop)?;
    let i = Complex64::new(0.0, 1.0);
    let mut p_re = 0.0;
    let mut p_im = 0.0;
    for (a, b) in phi.iter().zip(&wphi) {
        p_re += ((a + b) * 0.5).norm_sqr();
        p_im += ((a - i * b) * 0.5).norm_sqr();
    }
    Ok((p_re.clamp(0.0, 1.0), p_im.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledOverlap {
    pub j: usize,
    pub estimate: Complex64,
    /// Standard errors of the real and imaginary parts.
    pub std_error: [f64; 2],
    pub shots_used: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots_per_circuit: u64,
    pub seed: u64,
    pub ensemble: Ensemble,
    /// Skip shot noise and pass exact overlaps through.
    #[serde(default)]
    pub exact: bool,
}

impl ShotPlan {
    pub fn validate(&self) -> Result<()> {
        if self.shots_per_circuit == 0 {
            return Err(ItqdeError::Parameter("shots per circuit must be at least 1".into()));
        }
        self.ensemble.validate()
    }
}

/// Identifies one circuit in the fan-out so its draws do not depend on order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitKey {
    pub member: u64,
    pub j: u64,
    /// 0 for the state overlap, `1 + α` for Pauli term `α`.
    pub term: u64,
}

fn estimate_branch(p: f64, shots: u64, seed: u64, key: CircuitKey, branch: u64) -> (f64, f64) {
    let mut rng = keyed_rng(seed, &[key.member, key.j, key.term, branch]);
    let count = Binomial::new(shots, p)
        .expect("probability within [0, 1]")
        .sample(&mut rng);
    let ph = count as f64 / shots as f64;
    (2.0 * ph - 1.0, 2.0 * (ph * (1.0 - ph) / shots as f64).sqrt())
}

/// Binomial shot draws on both branches at the exact probabilities.
pub fn sample_overlap(
    psi0: &StateVector,
    w: &OverlapCircuit,
    prop: Option<&StepPropagator>,
    plan: &ShotPlan,
    key: CircuitKey,
) -> Result<SampledOverlap> {
    plan.validate()?;
    let (p_re, p_im) = hadamard_probabilities(psi0, w, prop)?;
    let (re, se_re) = estimate_branch(p_re, plan.shots_per_circuit, plan.seed, key, 0);
    let (im, se_im) = if matches!(w, OverlapCircuit::Identity) {
        (0.0, 0.0)
    } else {
        estimate_branch(p_im, plan.shots_per_circuit, plan.seed, key, 1)
    };
    Ok(SampledOverlap {
        j: key.j as usize,
        estimate: Complex64::new(re, im),
        std_error: [se_re, se_im],
        shots_used: 2 * plan.shots_per_circuit,
    })
}

/// `(c_α, P_α)` pairs of the canonical Pauli expansion.
pub fn decompose_observable(obs: &ObservableSum) -> Vec<(f64, PauliTerm)> {
    obs.terms()
        .iter()
        .map(|t| {
            let unit = PauliTerm::new(1.0, t.letters().to_vec()).expect("letters already validated");
            (t.coefficient, unit)
        })
        .collect()
}

/// `2 (M + 1) (m/2 + 1) · ensemble size` with `M` summed over observables.
pub fn circuit_count(m: usize, observables: &[(String, ObservableSum)], ensemble_size: usize) -> u64 {
    let terms: usize = observables.iter().map(|(_, o)| o.len()).sum();
    2 * (terms as u64 + 1) * (m as u64 / 2 + 1) * ensemble_size as u64
}

#[derive(Debug, Clone)]
pub struct SampledTrajectory {
    pub trajectory: Trajectory,
    pub errors: TrajectoryErrors,
    pub circuit_count: u64,
}

fn member_sampled(
    psi: &StateVector,
    prop: &StepPropagator,
    m: usize,
    observables: &[(String, ObservableSum)],
    plan: &ShotPlan,
    member: u64,
) -> Result<(Vec<OverlapRecord>, Vec<RecordErrors>)> {
    let decomposed: Vec<Vec<(f64, PauliTerm)>> =
        observables.iter().map(|(_, o)| decompose_observable(o)).collect();
    let per_j = (0..=m / 2)
        .map(|j| {
            let key = |term: u64| CircuitKey {
                member,
                j: j as u64,
                term,
            };
            let w = if j == 0 {
                OverlapCircuit::Identity
            } else {
                OverlapCircuit::Power4j { j }
            };
            let s = sample_overlap(psi, &w, Some(prop), plan, key(0))?;
            let mut obs = BTreeMap::new();
            let mut obs_se = BTreeMap::new();
            let mut offset = 1u64;
            for ((label, _), terms) in observables.iter().zip(&decomposed) {
                let mut total = Complex64::new(0.0, 0.0);
                let mut var = [0.0f64; 2];
                for (a, (c, p)) in terms.iter().enumerate() {
                    let w = OverlapCircuit::Sandwich { j, term: p.clone() };
                    let so = sample_overlap(psi, &w, Some(prop), plan, key(offset + a as u64))?;
                    total += so.estimate * *c;
                    var[0] += (c * so.std_error[0]).powi(2);
                    var[1] += (c * so.std_error[1]).powi(2);
                }
                offset += terms.len() as u64;
                obs.insert(label.clone(), total);
                obs_se.insert(label.clone(), [var[0].sqrt(), var[1].sqrt()]);
            }
            Ok((
                OverlapRecord {
                    j,
                    state_overlap: s.estimate,
                    observable_overlaps: obs,
                },
                RecordErrors {
                    overlap_se: s.std_error,
                    obs_se,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_j.into_iter().unzip())
}

/// Ensemble-averaged trajectory from emulated Hadamard tests.
///
/// Member `i` uses `random_initial_state(ensemble, n, i, seed)`. Errors of
/// the mean combine member errors as `√(Σ se²) / N`.
pub fn sample_trajectory(
    prop: &StepPropagator,
    m: usize,
    observables: &[(String, ObservableSum)],
    plan: &ShotPlan,
) -> Result<SampledTrajectory> {
    plan.validate()?;
    let qubits = prop.dimension().trailing_zeros() as usize;
    let size = plan.ensemble.size();
    let condition = match &plan.ensemble {
        Ensemble::Fixed { state } => InitialCondition::Pure(state.clone()),
        e => InitialCondition::Ensemble {
            kind: e.name().to_string(),
            size,
        },
    };
    let members = (0..size)
        .into_par_iter()
        .map(|i| {
            let psi = random_initial_state(&plan.ensemble, qubits, i, plan.seed)?;
            if plan.exact {
                let t = evolve_trajectory(&psi, prop, m, observables)?;
                let zeros = t
                    .records
                    .iter()
                    .map(|_| RecordErrors {
                        overlap_se: [0.0, 0.0],
                        obs_se: observables.iter().map(|(l, _)| (l.clone(), [0.0, 0.0])).collect(),
                    })
                    .collect();
                Ok((t.records, zeros))
            } else {
                member_sampled(&psi, prop, m, observables, plan, i as u64)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let member_trajs: Vec<Trajectory> = members
        .iter()
        .map(|(records, _)| Trajectory {
            dtau: prop.dtau(),
            m,
            initial_condition: condition.clone(),
            records: records.clone(),
            observable_labels: observables.iter().map(|(l, _)| l.clone()).collect(),
        })
        .collect();
    let trajectory = if size == 1 {
        member_trajs.into_iter().next().expect("one member")
    } else {
        Trajectory::average(&member_trajs, condition)?
    };

    let inv = 1.0 / size as f64;
    let mut errors = TrajectoryErrors::default();
    for j in 0..=m / 2 {
        let mut acc = RecordErrors::default();
        let mut sq = [0.0f64; 2];
        let mut obs_sq: BTreeMap<String, [f64; 2]> = BTreeMap::new();
        for (_, errs) in &members {
            let e = &errs[j];
            sq[0] += e.overlap_se[0].powi(2);
            sq[1] += e.overlap_se[1].powi(2);
            for (l, v) in &e.obs_se {
                let slot = obs_sq.entry(l.clone()).or_insert([0.0, 0.0]);
                slot[0] += v[0].powi(2);
                slot[1] += v[1].powi(2);
            }
        }
        acc.overlap_se = [sq[0].sqrt() * inv, sq[1].sqrt() * inv];
        acc.obs_se = obs_sq
            .into_iter()
            .map(|(l, v)| (l, [v[0].sqrt() * inv, v[1].sqrt() * inv]))
            .collect();
        errors.records.insert(j, acc);
    }
    Ok(SampledTrajectory {
        trajectory,
        errors,
        circuit_count: circuit_count(m, observables, size),
    })
}

/// Noise-free trajectory rebuilt from the Hadamard-test probabilities,
/// `(2p_re - 1) + i(2p_im - 1)` per circuit.
pub fn hadamard_trajectory(
    psi0: &StateVector,
    prop: &StepPropagator,
    m: usize,
    observables: &[(String, ObservableSum)],
) -> Result<Trajectory> {
    let decomposed: Vec<Vec<(f64, PauliTerm)>> =
        observables.iter().map(|(_, o)| decompose_observable(o)).collect();
    let from_p = |(a, b): (f64, f64)| Complex64::new(2.0 * a - 1.0, 2.0 * b - 1.0);
    let records = (0..=m / 2)
        .into_par_iter()
        .map(|j| {
            let w = if j == 0 {
                OverlapCircuit::Identity
            } else {
                OverlapCircuit::Power4j { j }
            };
            let state_overlap = from_p(hadamard_probabilities(psi0, &w, Some(prop))?);
            let mut obs = BTreeMap::new();
            for ((label, _), terms) in observables.iter().zip(&decomposed) {
                let mut total = Complex64::new(0.0, 0.0);
                for (c, p) in terms {
                    let w = OverlapCircuit::Sandwich { j, term: p.clone() };
                    total += from_p(hadamard_probabilities(psi0, &w, Some(prop))?) * *c;
                }
                obs.insert(label.clone(), total);
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
