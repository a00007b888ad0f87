use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{StateVector, StepPropagator};
use crate::error::{ItqdeError, Result};
use crate::model::ObservableSum;

/// Where a trajectory starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    Pure(StateVector),
    MaximallyMixed,
    /// Average over sampled initial states.
    Ensemble { kind: String, size: usize },
}

/// Overlaps at one `j`.
///
/// `state_overlap` is `<ψ_{-2j}|ψ_{2j}> = <ψ_0|U^{4j}|ψ_0>` and each observable
/// overlap is `<ψ_{-2j}|O|ψ_{2j}>`, with `|ψ_k> = U^k|ψ_0>`. The mirrored
/// `<ψ_{2j}|ψ_{-2j}>` is the complex conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRecord {
    pub j: usize,
    pub state_overlap: Complex64,
    pub observable_overlaps: BTreeMap<String, Complex64>,
}

impl OverlapRecord {
    /// `<ψ_{2j}|ψ_{-2j}>`.
    pub fn backward_overlap(&self) -> Complex64 {
        self.state_overlap.conj()
    }

    pub fn observable(&self, label: &str) -> Option<Complex64> {
        self.observable_overlaps.get(label).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dtau: f64,
    pub m: usize,
    pub initial_condition: InitialCondition,
    pub records: Vec<OverlapRecord>,
    pub observable_labels: Vec<String>,
}

pub(crate) fn check_m(m: usize) -> Result<()> {
    if m < 2 || m % 2 != 0 {
        return Err(ItqdeError::Parameter(format!(
            "m must be even and at least 2, got {m}"
        )));
    }
    Ok(())
}

fn check_observables(observables: &[(String, ObservableSum)], qubits: usize) -> Result<()> {
    for (label, obs) in observables {
        if obs.qubit_count() != qubits {
            return Err(ItqdeError::Validation(format!(
                "observable {label:?} acts on {} qubits, expected {qubits}",
                obs.qubit_count()
            )));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for (label, _) in observables {
        if !seen.insert(label) {
            return Err(ItqdeError::Validation(format!("duplicate observable label {label:?}")));
        }
    }
    Ok(())
}

fn labels(observables: &[(String, ObservableSum)]) -> Vec<String> {
    observables.iter().map(|(l, _)| l.clone()).collect()
}

/// Records `<ψ_{-2j}|ψ_{2j}>` and `<ψ_{-2j}|O|ψ_{2j}>` for `j = 0..=m/2`.
///
/// Each `|ψ_{±2j}>` is obtained from eigenphases raised to `±2j` directly, so
/// records are independent and computed in parallel.
pub fn evolve_trajectory(
    psi0: &StateVector,
    prop: &StepPropagator,
    m: usize,
    observables: &[(String, ObservableSum)],
) -> Result<Trajectory> {
    check_m(m)?;
    prop.check_dim(psi0.dimension())?;
    check_observables(observables, psi0.qubit_count())?;
    let eig = prop.eigen();
    let a0 = eig.to_eigenbasis(psi0.amplitudes());
    let records = (0..=m / 2)
        .into_par_iter()
        .map(|j| {
            let fwd_phases = prop.phases(2 * j as i64);
            let fwd: Vec<Complex64> = a0.iter().zip(&fwd_phases).map(|(a, p)| a * p).collect();
            let bwd: Vec<Complex64> = a0
                .iter()
                .zip(&fwd_phases)
                .map(|(a, p)| a * p.conj())
                .collect();
            // <ψ_{-2j}|ψ_{2j}> in the eigenbasis, phases e^{-4ijsE}
            let state_overlap: Complex64 = bwd.iter().zip(&fwd).map(|(b, f)| b.conj() * f).sum();
            let plus = eig.from_eigenbasis(&fwd);
            let minus = eig.from_eigenbasis(&bwd);
            let mut obs = BTreeMap::new();
            for (label, o) in observables {
                obs.insert(label.clone(), o.matrix_element(&minus, &plus)?);
            }
            Ok(OverlapRecord {
                j,
                state_overlap: if j == 0 { Complex64::new(1.0, 0.0) } else { state_overlap },
                observable_overlaps: obs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        dtau: prop.dtau(),
        m,
        initial_condition: InitialCondition::Pure(psi0.clone()),
        records,
        observable_labels: labels(observables),
    })
}

/// The `ρ(0) ∝ I` trajectory from eigenphase averages.
pub fn maximally_mixed_trajectory(
    prop: &StepPropagator,
    m: usize,
    observables: &[(String, ObservableSum)],
) -> Result<Trajectory> {
    check_m(m)?;
    let eig = prop.eigen();
    let d = eig.dimension();
    check_observables(observables, d.trailing_zeros() as usize)?;
    let diagonals: Vec<Vec<f64>> = observables
        .iter()
        .map(|(_, o)| eig.diagonal_elements(o))
        .collect::<Result<_>>()?;
    let inv_d = 1.0 / d as f64;
    let records = (0..=m / 2)
        .into_par_iter()
        .map(|j| {
            let phases = prop.phases(4 * j as i64);
            let state_overlap = if j == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                phases.iter().sum::<Complex64>() * inv_d
            };
            let obs = observables
                .iter()
                .zip(&diagonals)
                .map(|((label, _), diag)| {
                    let v: Complex64 = diag.iter().zip(&phases).map(|(o, p)| p * *o).sum();
                    (label.clone(), v * inv_d)
                })
                .collect();
            OverlapRecord {
                j,
                state_overlap,
                observable_overlaps: obs,
            }
        })
        .collect();
    Ok(Trajectory {
        dtau: prop.dtau(),
        m,
        initial_condition: InitialCondition::MaximallyMixed,
        records,
        observable_labels: labels(observables),
    })
}

impl Trajectory {
    pub fn has_label(&self, label: &str) -> bool {
        self.observable_labels.iter().any(|l| l == label)
    }

    pub fn state_overlaps(&self) -> Vec<Complex64> {
        self.records.iter().map(|r| r.state_overlap).collect()
    }

    pub fn observable_overlaps(&self, label: &str) -> Result<Vec<Complex64>> {
        if !self.has_label(label) {
            return Err(ItqdeError::Validation(format!(
                "observable {label:?} not recorded in trajectory"
            )));
        }
        Ok(self
            .records
            .iter()
            .map(|r| r.observable_overlaps[label])
            .collect())
    }

    /// Checks record ordering, contiguity and length.
    pub fn validate(&self) -> Result<()> {
        check_m(self.m)?;
        if !(self.dtau > 0.0) {
            return Err(ItqdeError::Validation(format!("dtau {} is not positive", self.dtau)));
        }
        if self.records.len() != self.m / 2 + 1 {
            return Err(ItqdeError::Validation(format!(
                "trajectory with m={} has {} records, expected {}",
                self.m,
                self.records.len(),
                self.m / 2 + 1
            )));
        }
        for (k, r) in self.records.iter().enumerate() {
            if r.j != k {
                return Err(ItqdeError::Validation(format!(
                    "record {k} has j={}, records must be contiguous from 0",
                    r.j
                )));
            }
            for l in &self.observable_labels {
                if !r.observable_overlaps.contains_key(l) {
                    return Err(ItqdeError::Validation(format!(
                        "record j={} is missing observable {l:?}",
                        r.j
                    )));
                }
            }
        }
        Ok(())
    }

    /// Record-wise mean of trajectories sharing `dtau`, `m` and labels.
    pub fn average(members: &[Trajectory], initial_condition: InitialCondition) -> Result<Trajectory> {
        let first = members
            .first()
            .ok_or_else(|| ItqdeError::Validation("cannot average zero trajectories".into()))?;
        for t in members {
            if t.m != first.m || t.dtau != first.dtau || t.observable_labels != first.observable_labels {
                return Err(ItqdeError::Validation(
                    "trajectories differ in dtau, m or observables".into(),
                ));
            }
        }
        let scale = 1.0 / members.len() as f64;
        let records = (0..first.records.len())
            .map(|k| {
                let state_overlap =
                    members.iter().map(|t| t.records[k].state_overlap).sum::<Complex64>() * scale;
                let observable_overlaps = first
                    .observable_labels
                    .iter()
                    .map(|l| {
                        let v = members
                            .iter()
                            .map(|t| t.records[k].observable_overlaps[l])
                            .sum::<Complex64>();
                        (l.clone(), v * scale)
                    })
                    .collect();
                OverlapRecord {
                    j: k,
                    state_overlap,
                    observable_overlaps,
                }
            })
            .collect();
        Ok(Trajectory {
            dtau: first.dtau,
            m: first.m,
            initial_condition,
            records,
            observable_labels: first.observable_labels.clone(),
        })
    }

    /// Largest componentwise deviation over every overlap.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        let mut worst = 0.0_f64;
        for (a, b) in self.records.iter().zip(&other.records) {
            worst = worst.max((a.state_overlap - b.state_overlap).norm());
            for (l, v) in &a.observable_overlaps {
                if let Some(w) = b.observable_overlaps.get(l) {
                    worst = worst.max((v - w).norm());
                } else {
                    return f64::INFINITY;
                }
            }
        }
        if self.records.len() != other.records.len() {
            return f64::INFINITY;
        }
        worst
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TrajectoryJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TrajectoryJson = serde_json::from_str(text)?;
        let traj = Trajectory::from(raw);
        traj.validate()?;
        Ok(traj)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Standard errors attached to a sampled trajectory, keyed by `j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordErrors {
    pub overlap_se: [f64; 2],
    pub obs_se: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrajectoryErrors {
    pub records: BTreeMap<usize, RecordErrors>,
}

impl TrajectoryErrors {
    pub fn get(&self, j: usize) -> Option<&RecordErrors> {
        self.records.get(&j)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    j: usize,
    overlap: [f64; 2],
    obs: BTreeMap<String, [f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryJson {
    dtau: f64,
    m: usize,
    initial_condition: InitialCondition,
    observable_labels: Vec<String>,
    records: Vec<RecordJson>,
}

impl From<&Trajectory> for TrajectoryJson {
    fn from(t: &Trajectory) -> Self {
        Self {
            dtau: t.dtau,
            m: t.m,
            initial_condition: t.initial_condition.clone(),
            observable_labels: t.observable_labels.clone(),
            records: t
                .records
                .iter()
                .map(|r| RecordJson {
                    j: r.j,
                    overlap: pair(r.state_overlap),
                    obs: r
                        .observable_overlaps
                        .iter()
                        .map(|(k, v)| (k.clone(), pair(*v)))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl From<TrajectoryJson> for Trajectory {
    fn from(t: TrajectoryJson) -> Self {
        Self {
            dtau: t.dtau,
            m: t.m,
            initial_condition: t.initial_condition,
            observable_labels: t.observable_labels,
            records: t
                .records
                .into_iter()
                .map(|r| OverlapRecord {
                    j: r.j,
                    state_overlap: unpair(r.overlap),
                    observable_overlaps: r.obs.into_iter().map(|(k, v)| (k, unpair(v))).collect(),
                })
                .collect(),
        }
    }
}
