use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ItqdeError, Result};
use crate::model::{eigendecompose, CMatrix, DenseHermitian, EigenDecomposition, ObservableSum};

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = amplitudes.len();
        if d == 0 || !d.is_power_of_two() {
            return Err(ItqdeError::Validation(format!(
                "state length {d} is not a power of two"
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(ItqdeError::Validation(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(ItqdeError::Validation("cannot normalize a zero state".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(amplitudes)
    }

    /// Computational basis state `|index>`.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let d = 1usize << qubits;
        if index >= d {
            return Err(ItqdeError::Validation(format!(
                "basis index {index} out of range for {qubits} qubits"
            )));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); d];
        a[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: a })
    }

    /// `|+>^n`.
    pub fn plus(qubits: usize) -> Self {
        let d = 1usize << qubits;
        let v = Complex64::new((d as f64).sqrt().recip(), 0.0);
        Self {
            amplitudes: vec![v; d],
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn qubit_count(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }
}

impl TryFrom<Vec<[f64; 2]>> for StateVector {
    type Error = ItqdeError;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<StateVector> for Vec<[f64; 2]> {
    fn from(s: StateVector) -> Self {
        s.amplitudes.iter().map(|a| [a.re, a.im]).collect()
    }
}

/// `<bra|O|ket>` contracted term by term.
pub fn operator_overlap(bra: &StateVector, obs: &ObservableSum, ket: &StateVector) -> Result<Complex64> {
    obs.matrix_element(bra.amplitudes(), ket.amplitudes())
}

/// `U = exp(-i s H)` with `s = √(Δτ/2)`, realized through eigenphases.
#[derive(Debug, Clone)]
pub struct StepPropagator {
    source: Arc<EigenDecomposition>,
    dtau: f64,
    step: f64,
    step_phases: Vec<Complex64>,
}

pub fn make_step_propagator(h: &DenseHermitian, dtau: f64) -> Result<StepPropagator> {
    StepPropagator::from_eigen(Arc::new(eigendecompose(h)?), dtau)
}

impl StepPropagator {
    pub fn from_eigen(source: Arc<EigenDecomposition>, dtau: f64) -> Result<Self> {
        if !(dtau > 0.0) || !dtau.is_finite() {
            return Err(ItqdeError::Parameter(format!("dtau must be positive, got {dtau}")));
        }
        let step = (dtau / 2.0).sqrt();
        let step_phases = source
            .energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -step * e))
            .collect();
        Ok(Self {
            source,
            dtau,
            step,
            step_phases,
        })
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// `√(Δτ/2)`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.source
    }

    pub fn eigen_arc(&self) -> Arc<EigenDecomposition> {
        Arc::clone(&self.source)
    }

    pub fn step_phases(&self) -> &[Complex64] {
        &self.step_phases
    }

    pub fn dimension(&self) -> usize {
        self.step_phases.len()
    }

    /// Eigenphases of `U^k`, evaluated directly rather than by repeated products.
    pub fn phases(&self, k: i64) -> Vec<Complex64> {
        let angle = -(k as f64) * self.step;
        self.source
            .energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, angle * e))
            .collect()
    }

    /// `U^k |psi>`; negative `k` runs backwards.
    pub fn advance(&self, psi: &StateVector, k: i64) -> Result<StateVector> {
        self.check_dim(psi.dimension())?;
        let mut a = self.source.to_eigenbasis(psi.amplitudes());
        for (x, p) in a.iter_mut().zip(self.phases(k)) {
            *x *= p;
        }
        Ok(StateVector::from_raw(self.source.from_eigenbasis(&a)))
    }

    /// Dense `U^k`.
    pub fn power_matrix(&self, k: i64) -> CMatrix {
        let angle = -(k as f64) * self.step;
        self.source
            .apply_function(|e| Complex64::from_polar(1.0, angle * e))
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dimension() {
            return Err(ItqdeError::Validation(format!(
                "state dimension {d} does not match propagator dimension {}",
                self.dimension()
            )));
        }
        Ok(())
    }
}
