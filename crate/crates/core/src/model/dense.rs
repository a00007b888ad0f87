//! Dense matrix realization and the exact-diagonalization oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::pauli::ObservableSum;
use crate::error::{ItqdeError, Result};

pub const DEFAULT_DENSE_LIMIT: usize = 14;

const HERMITIAN_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// A Hermitian matrix on `d = 2^n` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    matrix: CMatrix,
}

impl DenseHermitian {
    /// Wraps `matrix` after checking `‖A - A†‖_F ≤ 1e-12 ‖A‖_F`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(ItqdeError::Validation(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = hermiticity_defect(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(ItqdeError::Validation(format!(
                "matrix is not Hermitian (relative defect {dev:e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let matrix = CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self { matrix }
    }

    /// A seeded random Hermitian matrix with Gaussian entries (GUE-like).
    pub fn random(dimension: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
        let mut a = CMatrix::zeros(dimension, dimension);
        for r in 0..dimension {
            a[(r, r)] = Complex64::new(g(&mut rng), 0.0);
            for c in r + 1..dimension {
                let z = Complex64::new(g(&mut rng), g(&mut rng)) * std::f64::consts::FRAC_1_SQRT_2;
                a[(r, c)] = z;
                a[(c, r)] = z.conj();
            }
        }
        Self { matrix: a }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn negated(&self) -> Self {
        Self {
            matrix: -self.matrix.clone(),
        }
    }

    pub fn shifted(&self, lambda: f64) -> Self {
        let mut matrix = self.matrix.clone();
        for k in 0..matrix.nrows() {
            matrix[(k, k)] += lambda;
        }
        Self { matrix }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / norm
}

/// Realizes `obs` as a dense matrix, refusing registers above [`DEFAULT_DENSE_LIMIT`].
pub fn to_dense(obs: &ObservableSum) -> Result<DenseHermitian> {
    to_dense_with_limit(obs, DEFAULT_DENSE_LIMIT)
}

pub fn to_dense_with_limit(obs: &ObservableSum, limit: usize) -> Result<DenseHermitian> {
    check_dense_limit(obs.qubit_count(), limit)?;
    let d = obs.dimension();
    let mut m = CMatrix::zeros(d, d);
    for term in obs.terms() {
        let masks = term.masks();
        for x in 0..d {
            m[(x ^ masks.flip, x)] += masks.phase(x) * term.coefficient;
        }
    }
    Ok(DenseHermitian { matrix: m })
}

pub fn check_dense_limit(qubits: usize, limit: usize) -> Result<()> {
    if qubits > limit {
        return Err(ItqdeError::ResourceLimit {
            what: "dense qubit count",
            requested: qubits,
            limit,
        });
    }
    Ok(())
}

/// Sorted eigenvalues and the matching orthonormal eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub energies: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.energies.iter().fold(0.0_f64, |a, e| a.max(e.abs()))
    }

    /// `V f(E) V†`.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let phases: Vec<Complex64> = self.energies.iter().map(|&e| f(e)).collect();
        let mut scaled = self.vectors.clone();
        for (c, p) in phases.iter().enumerate() {
            for r in 0..scaled.nrows() {
                scaled[(r, c)] *= p;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|e| Complex64::new(e, 0.0))
    }

    /// `V† v`: amplitudes in the eigenbasis.
    pub fn to_eigenbasis(&self, v: &[Complex64]) -> Vec<Complex64> {
        let dv = DVector::from_column_slice(v);
        (self.vectors.adjoint() * dv).iter().copied().collect()
    }

    /// `V a`: back to the computational basis.
    pub fn from_eigenbasis(&self, a: &[Complex64]) -> Vec<Complex64> {
        let da = DVector::from_column_slice(a);
        (&self.vectors * da).iter().copied().collect()
    }

    /// `⟨E_k|O|E_k⟩` for every eigenvector, real by Hermiticity of `O`.
    pub fn diagonal_elements(&self, obs: &ObservableSum) -> Result<Vec<f64>> {
        (0..self.dimension())
            .map(|k| {
                let col: Vec<Complex64> = self.vectors.column(k).iter().copied().collect();
                Ok(obs.matrix_element(&col, &col)?.re)
            })
            .collect()
    }

    /// Sorted distinct energies, merging values closer than `tol`.
    pub fn distinct_energies(&self, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &e in &self.energies {
            match out.last() {
                Some(&last) if (e - last).abs() <= tol => {}
                _ => out.push(e),
            }
        }
        out
    }

    pub fn reconstruction_error(&self, source: &DenseHermitian) -> f64 {
        let norm = source.matrix.norm().max(f64::MIN_POSITIVE);
        (self.reconstruct() - &source.matrix).norm() / norm
    }

    pub fn orthonormality_error(&self) -> f64 {
        let d = self.dimension();
        (self.vectors.adjoint() * &self.vectors - CMatrix::identity(d, d)).norm()
    }
}

/// Hermitian eigensolve with ascending energies.
pub fn eigendecompose(h: &DenseHermitian) -> Result<EigenDecomposition> {
    check_dense_limit(h.dimension().trailing_zeros() as usize, DEFAULT_DENSE_LIMIT)?;
    let dev = h.hermiticity_defect();
    if dev > HERMITIAN_TOL {
        return Err(ItqdeError::Validation(format!(
            "cannot diagonalize a non-Hermitian matrix (relative defect {dev:e})"
        )));
    }
    let d = h.dimension();
    let eig = h.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { energies, vectors })
}
