//! Cross-module invariants checked on random inputs.

use proptest::prelude::*;

use noisereg::fourier::extract_modes;
use noisereg::optim::{
    improvement_ratio, initial_point, param_shift_grad, CircuitLoss, ParametricLoss,
};
use noisereg::paulisim::random::{random_circuit, random_hamiltonian};
use noisereg::seed::{rng_from_seed, uniform_angles};
use noisereg::whrf::{WhrfLoss, WishartField};

fn problem(
    seed: u64,
    n: usize,
    m: usize,
) -> (noisereg::paulisim::Circuit, noisereg::paulisim::Hamiltonian) {
    let mut rng = rng_from_seed(seed);
    let c = random_circuit(n, m, &mut rng).unwrap();
    let h = random_hamiltonian(n, 2, &mut rng).unwrap();
    (c, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_loss_ignores_noise_ops(seed in any::<u64>(), n in 1usize..4, m in 1usize..5) {
        let (c, h) = problem(seed, n, m);
        let phi = uniform_angles(&mut rng_from_seed(seed ^ 1), m);
        let stripped = c.strip_noise();
        prop_assert!((c.expectation(&h, &phi, 0.0).unwrap() - stripped.expectation(&h, &phi, 0.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn adjoint_gradient_matches_shift_rule(seed in any::<u64>(), n in 1usize..4, m in 1usize..5, mu in 0.0f64..=1.0) {
        let (c, h) = problem(seed, n, m);
        let loss = CircuitLoss::new(c, h).unwrap();
        let phi = uniform_angles(&mut rng_from_seed(seed ^ 2), m);
        let (_, adj) = loss.value_and_gradient(&phi, mu).unwrap();
        let shift = param_shift_grad(&loss, &phi, mu).unwrap();
        for (a, s) in adj.iter().zip(&shift) {
            prop_assert!((a - s).abs() < 1e-10);
        }
    }

    #[test]
    fn full_noise_leaves_only_the_constant_mode(seed in any::<u64>(), n in 1usize..4, m in 1usize..5) {
        let (c, h) = problem(seed, n, m);
        let table = extract_modes(&c, &h).unwrap();
        let phi = uniform_angles(&mut rng_from_seed(seed ^ 3), m);
        prop_assert!((c.expectation(&h, &phi, 1.0).unwrap() - table.constant()).abs() < 1e-10);
    }

    #[test]
    fn whrf_regularized_loss_is_bounded_by_spectrum(seed in any::<u64>(), m in 1usize..6, d in 1usize..6, lam in 0.0f64..=1.0) {
        let field = WishartField::sample(m, d, seed).unwrap();
        let loss = WhrfLoss::new(&field);
        let phi = uniform_angles(&mut rng_from_seed(seed ^ 4), m);
        let v = loss.value(&phi, 1.0 - lam).unwrap();
        prop_assert!(v >= field.min_eigenvalue() - 1e-9);
        prop_assert!(v <= field.trace() + 1e-9);
    }

    #[test]
    fn paired_cohorts_share_starting_points(master in any::<u64>(), k in 0usize..1000, m in 1usize..20) {
        prop_assert_eq!(initial_point(master, k, m), initial_point(master, k, m));
        let (_, phi) = initial_point(master, k, m);
        prop_assert!(phi.iter().all(|x| (0.0..std::f64::consts::TAU).contains(x)));
    }

    #[test]
    fn improvement_ratio_of_identical_cohorts_is_one(values in prop::collection::vec(-10.0f64..10.0, 20..200)) {
        for p in [1.0, 5.0, 50.0] {
            let r = improvement_ratio(&values, &values, p).unwrap();
            // at least floor((n - 1) p / 100) + 1 values sit at or below the interpolated threshold
            prop_assert!(r >= 1.0 - 100.0 / (p * values.len() as f64));
        }
    }
}
