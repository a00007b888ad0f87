use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ItqdeError, Result};
use crate::propagation::StateVector;

/// SplitMix64 finalizer.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generator keyed by `(seed, parts…)`, independent of evaluation order.
pub(crate) fn keyed_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    ChaCha8Rng::seed_from_u64(h)
}

const DOMAIN_BASIS: u64 = 0xB45;
const DOMAIN_CLIFFORD: u64 = 0xC11;

/// Initial states averaged over to stand in for `ρ(0) ∝ I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Ensemble {
    Fixed { state: StateVector },
    Basis { count: usize },
    Clifford { count: usize },
}

impl Ensemble {
    pub fn size(&self) -> usize {
        match self {
            Ensemble::Fixed { .. } => 1,
            Ensemble::Basis { count } | Ensemble::Clifford { count } => *count,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::Fixed { .. } => "fixed",
            Ensemble::Basis { .. } => "basis",
            Ensemble::Clifford { .. } => "clifford",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size() == 0 {
            return Err(ItqdeError::Parameter("ensemble size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Member `index` of the ensemble on `qubits` qubits.
///
/// Basis members walk a fresh seeded permutation of all `2^n` basis states in
/// every cycle of `2^n` indices. Clifford members run `3n` layers of random
/// `{I, H, S}` single-qubit gates plus one random CNOT each on `|0…0>`, then a
/// random Pauli layer, which makes the ensemble mean exactly `I/2^n`.
pub fn random_initial_state(
    ensemble: &Ensemble,
    qubits: usize,
    index: usize,
    seed: u64,
) -> Result<StateVector> {
    match ensemble {
        Ensemble::Fixed { state } => {
            if state.qubit_count() != qubits {
                return Err(ItqdeError::Validation(format!(
                    "fixed state has {} qubits, expected {qubits}",
                    state.qubit_count()
                )));
            }
            Ok(state.clone())
        }
        Ensemble::Basis { .. } => {
            let d = 1usize << qubits;
            let (cycle, pos) = (index / d, index % d);
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(&mut keyed_rng(seed, &[DOMAIN_BASIS, cycle as u64]));
            StateVector::basis(qubits, perm[pos])
        }
        Ensemble::Clifford { .. } => Ok(random_clifford_state(qubits, index, seed)),
    }
}

fn random_clifford_state(qubits: usize, index: usize, seed: u64) -> StateVector {
    let mut rng = keyed_rng(seed, &[DOMAIN_CLIFFORD, index as u64]);
    let d = 1usize << qubits;
    let mut amp = vec![Complex64::new(0.0, 0.0); d];
    amp[0] = Complex64::new(1.0, 0.0);
    let bit = |q: usize| 1usize << (qubits - 1 - q);
    for _ in 0..3 * qubits {
        for q in 0..qubits {
            match rng.random_range(0..3u8) {
                0 => {}
                1 => hadamard(&mut amp, bit(q)),
                _ => phase_s(&mut amp, bit(q)),
            }
        }
        if qubits >= 2 {
            let c = rng.random_range(0..qubits);
            let mut t = rng.random_range(0..qubits - 1);
            if t >= c {
                t += 1;
            }
            cnot(&mut amp, bit(c), bit(t));
        }
    }
    for q in 0..qubits {
        if rng.random_bool(0.5) {
            pauli_x(&mut amp, bit(q));
        }
        if rng.random_bool(0.5) {
            pauli_z(&mut amp, bit(q));
        }
    }
    StateVector::normalized(amp).expect("unitary circuit keeps the state normalized")
}

fn hadamard(a: &mut [Complex64], b: usize) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for x in 0..a.len() {
        if x & b == 0 {
            let (u, v) = (a[x], a[x | b]);
            a[x] = (u + v) * r;
            a[x | b] = (u - v) * r;
        }
    }
}

fn phase_s(a: &mut [Complex64], b: usize) {
    for (x, v) in a.iter_mut().enumerate() {
        if x & b != 0 {
            *v *= Complex64::new(0.0, 1.0);
        }
    }
}

fn cnot(a: &mut [Complex64], control: usize, target: usize) {
    for x in 0..a.len() {
        if x & control != 0 && x & target == 0 {
            a.swap(x, x | target);
        }
    }
}

fn pauli_x(a: &mut [Complex64], b: usize) {
    for x in 0..a.len() {
        if x & b == 0 {
            a.swap(x, x | b);
        }
    }
}

fn pauli_z(a: &mut [Complex64], b: usize) {
    for (x, v) in a.iter_mut().enumerate() {
        if x & b != 0 {
            *v = -*v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CMatrix;

    #[test]
    fn basis_cycle_visits_each_state_once() {
        let e = Ensemble::Basis { count: 8 };
        for cycle in 0..2 {
            let mut seen = vec![0; 4];
            for pos in 0..4 {
                let s = random_initial_state(&e, 2, 4 * cycle + pos, 11).unwrap();
                let k = s.amplitudes().iter().position(|a| a.norm() == 1.0).unwrap();
                seen[k] += 1;
            }
            assert_eq!(seen, vec![1; 4]);
        }
    }

    #[test]
    fn deterministic_in_index_and_seed() {
        let e = Ensemble::Clifford { count: 4 };
        let a = random_initial_state(&e, 3, 2, 5).unwrap();
        let b = random_initial_state(&e, 3, 2, 5).unwrap();
        let c = random_initial_state(&e, 3, 2, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn clifford_states_are_stabilizer_like() {
        let e = Ensemble::Clifford { count: 1 };
        for idx in 0..200 {
            let s = random_initial_state(&e, 3, idx, 99).unwrap();
            let mags: Vec<f64> = s
                .amplitudes()
                .iter()
                .map(|a| a.norm())
                .filter(|&m| m > 1e-12)
                .collect();
            let support = mags.len();
            assert!(support.is_power_of_two());
            let want = (support as f64).sqrt().recip();
            assert!(mags.iter().all(|m| (m - want).abs() < 1e-12));
        }
    }

    #[test]
    fn clifford_mean_is_maximally_mixed() {
        let e = Ensemble::Clifford { count: 10_000 };
        let mut rho = CMatrix::zeros(4, 4);
        for idx in 0..10_000 {
            let s = random_initial_state(&e, 2, idx, 3).unwrap();
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            rho += &v * v.adjoint();
        }
        rho /= Complex64::new(10_000.0, 0.0);
        let diff = rho - CMatrix::identity(4, 4) * Complex64::new(0.25, 0.0);
        // trace distance = half the sum of |eigenvalues| of the Hermitian difference
        let eig = diff.symmetric_eigen();
        let td = 0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
        assert!(td < 0.05, "{td}");
    }

    #[test]
    fn fixed_state_qubit_check() {
        let e = Ensemble::Fixed {
            state: StateVector::basis(2, 0).unwrap(),
        };
        assert!(random_initial_state(&e, 3, 0, 0).is_err());
        assert!(Ensemble::Basis { count: 0 }.validate().is_err());
    }
}
