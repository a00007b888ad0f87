//! Hamiltonians and observables: Pauli sums, lattice builders, dense oracle.

pub mod builders;
pub mod dense;
pub mod pauli;

pub use builders::{build_fermi_hubbard, build_tfim, shift_spectrum, Boundary, Lattice};
pub use dense::{
    eigendecompose, to_dense, to_dense_with_limit, CMatrix, DenseHermitian, EigenDecomposition,
    DEFAULT_DENSE_LIMIT,
};
pub use pauli::{ObservableSum, Pauli, PauliMasks, PauliTerm};
