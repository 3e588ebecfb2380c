use proptest::prelude::*;
use wsrmax::lagrange::*;
use wsrmax::linalg::{c, fro_norm_sq, hermitian_part, identity, CMat};
use wsrmax::rng::SeededStream;
use wsrmax::WsrError;

fn random_problem(seed: u64, n: usize, m: usize, rank: usize) -> RegularizedProblem {
    let mut rng = SeededStream::new(seed, 50);
    let a = rng.complex_gaussian_mat(n, rank, 1.0);
    let g = hermitian_part(&(&a * a.adjoint()));
    let r = rng.complex_gaussian_mat(n, m, 1.0);
    // Budget below the unconstrained power so the constraint is active.
    let p0 = power_curve(&RegularizedProblem::new(g.clone(), r.clone(), 1.0).unwrap(), 0.0).unwrap();
    let budget = p0 * (0.05 + 0.5 * rng.uniform());
    RegularizedProblem::new(g, r, budget).unwrap()
}

#[test]
fn grid_scan_oracle_agrees_with_bisection() {
    for seed in 0..50 {
        let prob = random_problem(seed, 4, 4, 4);
        let sol = find_mu(&prob, &BisectionSettings::exact()).unwrap();
        let budget = prob.budget();
        let hi = prob.r().norm() / budget.sqrt();
        let n = 100_000;
        let step = hi / n as f64;
        let first = (0..=n)
            .map(|i| i as f64 * step)
            .find(|&mu| power_curve(&prob, mu).unwrap() <= budget)
            .expect("bracket end is feasible");
        assert!(sol.mu <= first + 1e-12 && sol.mu >= first - step, "seed {seed}: {} vs {first}", sol.mu);
        assert!(sol.power <= budget * (1.0 + 1e-10));
        assert!(sol.mu * (budget - sol.power) <= 1e-10 * budget * hi);
    }
}

#[test]
fn eigendecomposition_is_reused_across_probes() {
    // Power evaluation from the cached decomposition agrees with a fresh
    // regularized solve at every probe point.
    let prob = random_problem(3, 5, 2, 3);
    let solver = SpectralSolver::new(&prob);
    for &mu in &[0.0, 1e-3, 0.1, 1.0, 10.0] {
        let direct = fro_norm_sq(&pinv_solve(&prob, mu).unwrap());
        assert!((solver.power(mu).unwrap() - direct).abs() <= 1e-12 * direct.max(1.0));
    }
}

#[test]
fn rank_deficient_gram_uses_pseudo_inverse() {
    let prob = random_problem(4, 4, 2, 1);
    let w0 = pinv_solve(&prob, 0.0).unwrap();
    assert!(w0.iter().all(|z| z.is_finite()));
    let sol = find_mu(&prob, &BisectionSettings::exact()).unwrap();
    assert!(sol.power <= prob.budget() * (1.0 + 1e-10));
}

#[test]
fn search_failure_carries_bracket() {
    let g = identity(2);
    let r = CMat::from_element(2, 1, c(10.0, 0.0));
    let prob = RegularizedProblem::new(g, r, 1.0).unwrap();
    let tight = BisectionSettings { tol_power: 0.0, tol_mu: 1e-300, max_iter: 3 };
    match find_mu(&prob, &tight) {
        Err(WsrError::SearchFailure { lo, hi, iterations }) => {
            assert_eq!(iterations, 3);
            assert!(lo < hi);
        }
        other => panic!("expected a search failure, got {other:?}"),
    }
}

#[test]
fn invalid_settings_and_inputs_are_rejected() {
    let prob = random_problem(5, 3, 1, 3);
    assert!(find_mu(&prob, &BisectionSettings { tol_power: -1.0, tol_mu: 1e-6, max_iter: 5 }).is_err());
    assert!(matches!(power_curve(&prob, -0.5), Err(WsrError::Domain(_))));
    assert!(RegularizedProblem::new(identity(2), CMat::zeros(3, 1), 1.0).is_err());
    assert!(RegularizedProblem::new(identity(2), CMat::zeros(2, 1), -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_curve_is_nonincreasing(seed in 0u64..100_000, n in 1usize..6, rank in 1usize..6) {
        let prob = random_problem(seed, n, 2, rank.min(n));
        let mut last = f64::INFINITY;
        for i in 0..60 {
            let mu = 1e-4 * 1.3f64.powi(i);
            let p = power_curve(&prob, mu).unwrap();
            prop_assert!(p <= last * (1.0 + 1e-12));
            last = p;
        }
    }

    #[test]
    fn returned_multiplier_is_feasible_and_slack(seed in 0u64..100_000, n in 1usize..6) {
        let prob = random_problem(seed, n, 3, n);
        let sol = find_mu(&prob, &BisectionSettings::exact()).unwrap();
        let hi = prob.r().norm() / prob.budget().sqrt();
        prop_assert!(sol.power <= prob.budget() * (1.0 + 1e-10));
        prop_assert!(sol.mu >= 0.0);
        prop_assert!(sol.mu * (prob.budget() - sol.power) <= 1e-10 * prob.budget() * hi);
    }

    #[test]
    fn relaxed_search_stays_feasible(seed in 0u64..100_000, i in 0u32..40) {
        let prob = random_problem(seed, 4, 2, 4);
        let sol = find_mu(&prob, &BisectionSettings::relaxed(i)).unwrap();
        prop_assert!(sol.power <= prob.budget());
    }
}
