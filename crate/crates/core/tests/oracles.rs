mod common;

use itqde::assembly::{assemble_curve, WeightScheme};
use itqde::model::{
    build_fermi_hubbard, build_tfim, eigendecompose, shift_spectrum, to_dense, Boundary, Lattice,
};
use itqde::propagation::{evolve_trajectory, make_step_propagator, maximally_mixed_trajectory, StateVector};
use num_complex::Complex64 as C;

use common::*;

fn library_spectrum(obs: &itqde::model::ObservableSum) -> Vec<f64> {
    eigendecompose(&to_dense(obs).unwrap()).unwrap().energies
}

fn assert_spectra(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{x} vs {y}");
    }
}

#[test]
fn tfim_two_sites_frozen() {
    let s17 = 17f64.sqrt();
    let frozen = [-s17, -1.0, 1.0, s17];
    assert_spectra(&hermitian_eigenvalues(&tfim_matrix(1.0, 2.0, 2)), &frozen, 1e-12);
    assert_spectra(&library_spectrum(&build_tfim(1.0, 2.0, 2, Boundary::Open).unwrap()), &frozen, 1e-12);
}

#[test]
fn tfim_eight_sites_ground() {
    let lib = library_spectrum(&build_tfim(1.0, 14.0, 8, Boundary::Open).unwrap());
    assert!((lib[0] + 112.125028493020).abs() < 1e-9);
    assert_spectra(&lib, &hermitian_eigenvalues(&tfim_matrix(1.0, 14.0, 8)), 1e-9);
}

#[test]
fn pauli_matrices_match_dense_realization() {
    let h = build_tfim(0.7, 1.3, 3, Boundary::Open).unwrap();
    let terms: Vec<(f64, String)> =
        h.terms().iter().map(|t| (t.coefficient, t.letter_string())).collect();
    let lib = common::from_nalgebra(to_dense(&h).unwrap().matrix());
    assert!(max_abs_diff(&lib, &pauli_sum_matrix(&terms)) < 1e-14);
    assert!(max_abs_diff(&lib, &tfim_matrix(0.7, 1.3, 3)) < 1e-14);
}

#[test]
fn hubbard_dimer_frozen() {
    // half filling at U = 2, t = -1 sits at U/2 - sqrt(U²/4 + 4t²) - 2μ = -√5
    let s5 = 5f64.sqrt();
    let frozen = [
        -s5, -1.5, -1.5, -1.0, -1.0, -1.0, -0.5, -0.5, 0.0, 0.5, 0.5, 1.0, 1.5, 1.5, 2.0, s5,
    ];
    let lib = library_spectrum(
        &build_fermi_hubbard(-1.0, 2.0, 0.5, &Lattice::Chain { sites: 2 }, Boundary::Open).unwrap(),
    );
    assert_spectra(&lib, &frozen, 1e-12);
    assert_spectra(&hermitian_eigenvalues(&fock_fermi_hubbard(-1.0, 2.0, 0.5, 2, &[(0, 1)])), &frozen, 1e-12);
}

#[test]
fn hubbard_plaquette_matches_fock_space() {
    let fock = hermitian_eigenvalues(&fock_fermi_hubbard(-1.0, 2.0, 0.5, 4, &[(0, 1), (2, 3), (0, 2), (1, 3)]));
    assert!((fock[0] + 4.828427124746).abs() < 1e-9);
    assert!((fock[255] - 5.685846165554).abs() < 1e-9);
    for boundary in [Boundary::Open, Boundary::Periodic] {
        let lib = library_spectrum(
            &build_fermi_hubbard(-1.0, 2.0, 0.5, &Lattice::Rect { rows: 2, cols: 2 }, boundary).unwrap(),
        );
        assert_spectra(&lib, &fock, 1e-9);
    }
}

#[test]
fn hubbard_ring_sign_structure() {
    // a 3-site ring has a closed loop, so fermionic signs change the spectrum
    let bonds = [(0, 1), (1, 2), (0, 2)];
    let fock = hermitian_eigenvalues(&fock_fermi_hubbard(-1.0, 3.0, 0.2, 3, &bonds));
    let lib = library_spectrum(
        &build_fermi_hubbard(-1.0, 3.0, 0.2, &Lattice::Chain { sites: 3 }, Boundary::Periodic).unwrap(),
    );
    assert_spectra(&lib, &fock, 1e-10);
}

#[test]
fn step_propagator_matches_taylor_exponential() {
    let h = build_tfim(1.0, 0.6, 3, Boundary::Periodic).unwrap();
    let hm = from_nalgebra(to_dense(&h).unwrap().matrix());
    let dtau = 3e-2;
    let prop = make_step_propagator(&to_dense(&h).unwrap(), dtau).unwrap();
    for k in [1i64, 4, -4, 9] {
        let lib = from_nalgebra(&prop.power_matrix(k));
        let want = expm_i(&hm, k as f64 * (dtau / 2.0).sqrt());
        assert!(max_abs_diff(&lib, &want) < 1e-12, "k={k}");
    }
}

#[test]
fn lambda_phase_equals_repropagation() {
    let h = build_tfim(1.0, 1.5, 3, Boundary::Open).unwrap();
    let lambda = -0.8;
    let hs = shift_spectrum(&h, lambda).unwrap();
    let obs = vec![("H".to_string(), h.clone())];
    let dtau = 5e-3;
    let m = 200;
    let psi = StateVector::plus(3);
    let base = make_step_propagator(&to_dense(&h).unwrap(), dtau).unwrap();
    let shifted = make_step_propagator(&to_dense(&hs).unwrap(), dtau).unwrap();
    for (a, b) in [
        (evolve_trajectory(&psi, &base, m, &obs).unwrap(), evolve_trajectory(&psi, &shifted, m, &obs).unwrap()),
        (maximally_mixed_trajectory(&base, m, &obs).unwrap(), maximally_mixed_trajectory(&shifted, m, &obs).unwrap()),
    ] {
        let phased = assemble_curve(&a, "H", lambda, WeightScheme::ExactBinomial).unwrap();
        let direct = assemble_curve(&b, "H", 0.0, WeightScheme::ExactBinomial).unwrap();
        for (x, y) in phased.values.iter().zip(&direct.values) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in phased.partition.iter().zip(&direct.partition) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn large_m_approaches_gaussian_state() {
    let h = build_tfim(1.0, 2.0, 2, Boundary::Open).unwrap();
    let energies = [-(17f64.sqrt()), -1.0, 1.0, 17f64.sqrt()];
    let obs = vec![("H".to_string(), h.clone())];
    let tau = 0.8;
    let lambda = 0.5;
    let mut errors = Vec::new();
    for m in [100usize, 1000, 10000] {
        let prop = make_step_propagator(&to_dense(&h).unwrap(), tau / m as f64).unwrap();
        let traj = maximally_mixed_trajectory(&prop, m, &obs).unwrap();
        let curve = assemble_curve(&traj, "H", lambda, WeightScheme::ExactBinomial).unwrap();
        let got = *curve.values.last().unwrap();
        errors.push((got - gaussian_mixed_energy(&energies, tau, lambda)).abs());
    }
    assert!(errors[2] < 2e-3, "{errors:?}");
    assert!(errors[0] / errors[1] > 8.0 && errors[1] / errors[2] > 8.0, "{errors:?}");
}

#[test]
fn pure_state_superoperator_at_lambda() {
    let h = build_tfim(1.0, 0.9, 2, Boundary::Open).unwrap();
    let hm = from_nalgebra(to_dense(&h).unwrap().matrix());
    let dtau = 2e-2;
    let lambda = 1.1;
    let psi = StateVector::basis(2, 1).unwrap();
    let prop = make_step_propagator(&to_dense(&h).unwrap(), dtau).unwrap();
    let traj = evolve_trajectory(&psi, &prop, 12, &[("H".to_string(), h)]).unwrap();
    let curve = assemble_curve(&traj, "H", lambda, WeightScheme::ExactBinomial).unwrap();
    let u = expm_i(&add(&hm, &identity(4), C::new(lambda, 0.0)), (dtau / 2.0).sqrt());
    let rho = pure_density(psi.amplitudes());
    for (k, v) in curve.values.iter().enumerate() {
        let want = superoperator_expectation(&u, &rho, &hm, 2 * (k + 1));
        assert!((v - want).abs() < 1e-12);
    }
}
