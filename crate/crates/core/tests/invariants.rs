use itqde::assembly::{assemble_curve, assemble_partition, binomial_weights, folded_sum, WeightScheme};
use itqde::model::{build_tfim, eigendecompose, to_dense, Boundary, DenseHermitian};
use itqde::propagation::{
    evolve_trajectory, make_step_propagator, maximally_mixed_trajectory, StateVector, StepPropagator, Trajectory,
};
use itqde::sampling::{sample_trajectory, Ensemble, ShotPlan};
use proptest::prelude::*;

fn tfim2_prop(dtau: f64) -> (StepPropagator, Vec<(String, itqde::model::ObservableSum)>) {
    let h = build_tfim(1.0, 2.0, 2, Boundary::Open).unwrap();
    let prop = make_step_propagator(&to_dense(&h).unwrap(), dtau).unwrap();
    (prop, vec![("H".to_string(), h)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binomial_weights_normalized(half in 1usize..20_000) {
        let w = binomial_weights(2 * half).unwrap();
        prop_assert!((folded_sum(&w) - 1.0).abs() < 1e-12);
        prop_assert!(w.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn mixed_partition_is_mean_cosine_power(
        half in 1usize..60,
        dtau in 1e-4f64..5e-2,
        lambda in -6.0f64..6.0,
    ) {
        let m = 2 * half;
        let (prop, obs) = tfim2_prop(dtau);
        let traj = maximally_mixed_trajectory(&prop, m, &obs).unwrap();
        let z = assemble_partition(&traj, lambda, WeightScheme::ExactBinomial).unwrap();
        let s = (dtau / 2.0).sqrt();
        let energies = &prop.eigen().energies;
        for (k, zk) in z.iter().enumerate() {
            let mk = 2 * (k + 1) as i32;
            let want: f64 = energies.iter().map(|e| (2.0 * s * (e + lambda)).cos().powi(mk)).sum::<f64>()
                / energies.len() as f64;
            prop_assert!((zk - want).abs() < 1e-12, "k={k} {zk} {want}");
        }
    }

    #[test]
    fn lambda_shift_is_periodic(half in 1usize..40, dtau in 1e-3f64..5e-2, lambda in -3.0f64..3.0) {
        let (prop, obs) = tfim2_prop(dtau);
        let traj = evolve_trajectory(&StateVector::plus(2), &prop, 2 * half, &obs).unwrap();
        let period = std::f64::consts::PI / (2.0 * dtau).sqrt();
        let a = assemble_curve(&traj, "H", lambda, WeightScheme::ExactBinomial).unwrap();
        let b = assemble_curve(&traj, "H", lambda + period, WeightScheme::ExactBinomial).unwrap();
        for (x, y) in a.partition.iter().zip(&b.partition) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn trajectory_json_round_trip(seed in 0u64..1000, half in 1usize..12, basis in 0usize..8) {
        let h = DenseHermitian::random(8, seed);
        let prop = StepPropagator::from_eigen(std::sync::Arc::new(eigendecompose(&h).unwrap()), 1e-2).unwrap();
        let o = build_tfim(1.0, 0.5, 3, Boundary::Open).unwrap();
        let psi = StateVector::basis(3, basis).unwrap();
        let traj = evolve_trajectory(&psi, &prop, 2 * half, &[("O".to_string(), o)]).unwrap();
        let back = Trajectory::from_json(&traj.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, traj);
    }

    #[test]
    fn shot_noise_keyed_by_seed(seed in 0u64..u64::MAX) {
        let (prop, obs) = tfim2_prop(1e-2);
        let plan = ShotPlan {
            shots_per_circuit: 200,
            seed,
            ensemble: Ensemble::Clifford { count: 3 },
            exact: false,
        };
        let a = sample_trajectory(&prop, 10, &obs, &plan).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| sample_trajectory(&prop, 10, &obs, &plan).unwrap());
        prop_assert_eq!(a.trajectory.to_json().unwrap(), b.trajectory.to_json().unwrap());
    }
}

#[test]
fn different_seeds_give_different_noise() {
    let (prop, obs) = tfim2_prop(1e-2);
    let plan = |seed| ShotPlan {
        shots_per_circuit: 200,
        seed,
        ensemble: Ensemble::Basis { count: 4 },
        exact: false,
    };
    let a = sample_trajectory(&prop, 10, &obs, &plan(1)).unwrap();
    let b = sample_trajectory(&prop, 10, &obs, &plan(2)).unwrap();
    assert!(a.trajectory.max_deviation(&b.trajectory) > 1e-3);
}
