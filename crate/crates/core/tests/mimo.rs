mod common;

use common::*;
use proptest::prelude::*;
use wsrmax::calculus::{surrogate_mimo, EtaMode};
use wsrmax::equivalence::*;
use wsrmax::lagrange::BisectionSettings;
use wsrmax::linalg::{c, hermitian_defect, identity, max_abs_diff, min_eigenvalue, CMat};
use wsrmax::mimo::*;
use wsrmax::rng::SeededStream;
use wsrmax::solver::{Algorithm, FpVariant, SolverConfig, WmmseOrder};
use wsrmax::system_model::*;

const EXACT: BisectionSettings = BisectionSettings { tol_power: 1e-10, tol_mu: 1e-15, max_iter: 200 };

fn identity_link(m: usize, p: f64) -> MimoScenario {
    MimoScenario::new(vec![vec![identity(m)]], vec![m], vec![1.0], vec![1.0], vec![p]).unwrap()
}

fn scaled_identity(m: usize, s: f64) -> MimoBeamformers {
    MimoBeamformers { w: vec![identity(m) * c(s, 0.0)] }
}

fn link_powers(bf: &MimoBeamformers) -> Vec<f64> {
    bf.w.iter().map(|w| w.norm_squared()).collect()
}

/// The isotropic optimum for `H = I` is `√(P/M)·I`; among scaled identities
/// `M ln(1 + s²)` peaks at the largest feasible `s`.
#[test]
fn identity_channel_reaches_isotropic_optimum() {
    let (m, p) = (3, 2.0);
    let scn = identity_link(m, p);
    let best = golden_max(|s| wsr_mimo(&scn, &scaled_identity(m, s)), 0.0, (p / m as f64).sqrt(), 1e-12);
    let optimum = scaled_identity(m, best);
    assert!((best - (p / m as f64).sqrt()).abs() < 1e-6);

    let below = scaled_identity(m, 0.3);
    let one = wmmse_step_mimo(&scn, &below, &EXACT).unwrap().bf;
    let diag = one.w[0][(0, 0)];
    assert!(max_abs_diff(&one.w[0], &(identity(m) * diag)) < 1e-12);

    let init = random_init_mimo(&scn, 4);
    for alg in Algorithm::families() {
        let cfg = SolverConfig::new(alg).with_max_iters(20_000).with_stop_epsilon(1e-14);
        let t = run_mimo(&scn, &cfg, &init).unwrap();
        let gram = t.final_bf.w[0].adjoint() * &t.final_bf.w[0];
        assert!(max_abs_diff(&gram, &(identity(m) * c(p / m as f64, 0.0))) < 1e-4, "{alg}");
        assert!((t.final_wsr() - wsr_mimo(&scn, &optimum)).abs() < 1e-8, "{alg}");
    }
}

#[test]
fn isotropic_optimum_is_a_fixed_point() {
    let (m, p) = (4, 3.0);
    let scn = identity_link(m, p);
    let opt = scaled_identity(m, (p / m as f64).sqrt());
    for mode in [EtaMode::FrobeniusBound, EtaMode::ExactLambdaMax] {
        assert!(mm_plus_step_mimo(&scn, &opt, mode).unwrap().bf.max_abs_diff(&opt) < 1e-12);
        assert!(fp_plus_step_mimo(&scn, &opt, mode).unwrap().bf.max_abs_diff(&opt) < 1e-12);
    }
    assert!(wmmse_step_mimo(&scn, &opt, &EXACT).unwrap().bf.max_abs_diff(&opt) < 1e-9);
    for alg in Algorithm::families() {
        let t = run_mimo(&scn, &SolverConfig::new(alg), &opt).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations(), 1, "{alg}");
    }
}

#[test]
fn auxiliary_matrices_satisfy_invariants() {
    for seed in 0..10 {
        let scn = iid_mimo(seed, 4, 4, 1.0);
        let bf = random_bf_mimo(&scn, &mut SeededStream::new(seed, 70));
        let r = check_woodbury_mk(&scn, &bf);
        assert!(r.pass, "{r:?}");
        let (_, m) = wmmse_auxiliaries(&scn, &bf).unwrap();
        for mk in &m {
            assert!(min_eigenvalue(&(mk - identity(mk.nrows()))) > -1e-9);
        }
        let (_, gamma) = fp_auxiliaries(&scn, &bf).unwrap();
        for g in &gamma {
            assert!(hermitian_defect(g) < 1e-10);
            assert!(min_eigenvalue(g) > -1e-10);
        }
    }
}

#[test]
fn one_step_equivalence_and_gradient_identity() {
    for seed in 0..10 {
        let scn = iid_mimo(seed, 4, 4, 1.0);
        let bf = random_bf_mimo(&scn, &mut SeededStream::new(seed, 71));
        let r = check_mimo_step_equivalence(&scn, &bf, &EXACT);
        assert!(r.pass, "{r:?}");
        for mode in [EtaMode::FrobeniusBound, EtaMode::ExactLambdaMax] {
            let r = check_plus_equivalence_mimo(&scn, &bf, mode);
            assert!(r.pass, "{r:?}");
            let r = check_pgd_identity_mimo(&scn, &bf, mode);
            assert!(r.pass, "{r:?}");
        }
    }
}

#[test]
fn zero_beamformers_stay_zero() {
    let scn = iid_mimo(1, 3, 3, 1.0);
    let zero = MimoBeamformers::zeros(&scn);
    let steps = [
        fp_step_mimo(&scn, &zero, &EXACT).unwrap().bf,
        mm_step_mimo(&scn, &zero, &EXACT).unwrap().bf,
        mm_plus_step_mimo(&scn, &zero, EtaMode::FrobeniusBound).unwrap().bf,
        fp_plus_step_mimo(&scn, &zero, EtaMode::FrobeniusBound).unwrap().bf,
    ];
    for s in steps {
        assert!(link_powers(&s).iter().all(|p| *p == 0.0));
    }
}

#[test]
fn mm_sandwich_holds() {
    for seed in 0..10 {
        let scn = iid_mimo(seed, 4, 4, 1.0);
        let bf = random_bf_mimo(&scn, &mut SeededStream::new(seed, 72));
        let next = mm_step_mimo(&scn, &bf, &EXACT).unwrap().bf;
        let l = surrogate_mimo(&next, &bf, &scn);
        assert!(wsr_mimo(&scn, &next) >= l - 1e-10);
        assert!(l >= wsr_mimo(&scn, &bf) - 1e-8);
    }
}

#[test]
fn mm_plus_interior_direction_is_not_scaled() {
    let small = iid_mimo(5, 3, 3, 1.0);
    let bf = random_bf_mimo(&small, &mut SeededStream::new(5, 73));
    let chans: Vec<Vec<CMat>> = (0..3).map(|i| (0..3).map(|j| small.channel(i, j).clone()).collect()).collect();
    let scn = MimoScenario::new(chans, vec![3; 3], vec![1.0; 3], vec![1.0; 3], vec![1e6; 3]).unwrap();
    let out = mm_plus_step_mimo(&scn, &bf, EtaMode::FrobeniusBound).unwrap();
    let MimoAuxState::MmPlus { q, .. } = &out.aux else { panic!("wrong state") };
    for (k, qk) in q.iter().enumerate() {
        assert!(qk.norm_squared() <= scn.budget(k));
    }
    assert_eq!(out.bf.max_abs_diff(&MimoBeamformers { w: q.clone() }), 0.0);
}

#[test]
fn runs_are_monotone_feasible_and_deterministic() {
    for seed in 0..4 {
        let scn = geo_mimo(seed, 4, 4);
        let init = random_init_mimo(&scn, seed);
        for alg in Algorithm::families() {
            let cfg = SolverConfig::new(alg).with_max_iters(200);
            let t = run_mimo(&scn, &cfg, &init).unwrap();
            assert!(t.error.is_none());
            assert!(t.final_bf.is_feasible(scn.budgets()));
            assert!(t.max_decrease() <= 1e-8, "{alg}: {}", t.max_decrease());
            assert_eq!(t.wsr_values(), run_mimo(&scn, &cfg, &init).unwrap().wsr_values());
        }
    }
}

#[test]
fn every_iterate_is_feasible_per_link() {
    let scn = geo_mimo(2, 3, 4);
    let cfg = SolverConfig::new(Algorithm::Mm);
    for alg in Algorithm::families() {
        let mut bf = random_init_mimo(&scn, 2);
        for _ in 0..30 {
            bf = step_mimo(&scn, &bf, alg, &cfg).unwrap().bf;
            for (k, p) in link_powers(&bf).into_iter().enumerate() {
                assert!(p <= scn.budget(k) * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn miso_only_variants_are_rejected() {
    let scn = geo_mimo(1, 2, 2);
    let init = random_init_mimo(&scn, 1);
    for alg in [Algorithm::Wmmse { order: WmmseOrder::MLW }, Algorithm::Fp { variant: FpVariant::ConvGammaFirst }] {
        assert!(run_mimo(&scn, &SolverConfig::new(alg), &init).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_step_never_decreases_wsr(seed in 0u64..100_000, k in 1usize..4, m in 1usize..4) {
        let scn = iid_mimo(seed, k, m, 1.0 + (seed % 5) as f64);
        let bf = random_bf_mimo(&scn, &mut SeededStream::new(seed, 74));
        let f0 = wsr_mimo(&scn, &bf);
        let cfg = SolverConfig::new(Algorithm::Mm);
        for alg in Algorithm::families() {
            let s = step_mimo(&scn, &bf, alg, &cfg).unwrap();
            prop_assert!(wsr_mimo(&scn, &s.bf) >= f0 - 1e-8);
        }
    }
}
