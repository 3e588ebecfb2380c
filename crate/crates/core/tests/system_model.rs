mod common;

use common::*;
use proptest::prelude::*;
use wsrmax::linalg::{c, hermitian_defect, identity, min_eigenvalue, CMat, CVec};
use wsrmax::system_model::*;
use wsrmax::WsrError;

fn literal_geo() -> GeometryConfig {
    GeometryConfig { noise_floor_dbm: 0.0, ..GeometryConfig::default() }
}

#[test]
fn path_loss_reference_values() {
    let geo = literal_geo();
    assert!((path_loss(1.0, &geo).unwrap() - 1.0e-3).abs() < 1e-15);
    let expected = 1.0e-3 * 10f64.powf(-3.67);
    assert!((path_loss(10.0, &geo).unwrap() / expected - 1.0).abs() < 1e-12);
    assert!(path_loss(3.0, &geo).unwrap() > path_loss(3.5, &geo).unwrap());
}

#[test]
fn path_loss_rejects_nonpositive_distance() {
    let geo = literal_geo();
    assert!(matches!(path_loss(0.0, &geo), Err(WsrError::Domain(_))));
    assert!(matches!(path_loss(-2.0, &geo), Err(WsrError::Domain(_))));
}

#[test]
fn default_noise_floor_matches_psd_and_bandwidth() {
    let n = GeometryConfig::default().noise_floor_dbm;
    assert!((n - (-169.0 + 10.0 * 240e3f64.log10())).abs() < 1e-12);
    assert!((dbm_to_linear(0.0) - 1.0).abs() < 1e-15);
}

#[test]
fn generation_is_seed_deterministic() {
    let a = geo_miso(42, 4, 4);
    let b = geo_miso(42, 4, 4);
    assert_eq!(a, b);
    assert_ne!(a, geo_miso(43, 4, 4));
    assert!(a.channels().iter().all(|h| h.len() == 4));
    let x = geo_mimo(42, 3, 2);
    assert_eq!(x, geo_mimo(42, 3, 2));
}

#[test]
fn mimo_channel_shapes_follow_link_dims() {
    let dims = vec![
        LinkDims { tx: 3, rx: 2, streams: 2 },
        LinkDims { tx: 4, rx: 5, streams: 1 },
        LinkDims { tx: 2, rx: 2, streams: 2 },
    ];
    let scn = generate_mimo(&GeometryConfig::default(), &dims, &[1.0; 3], &[1.0; 3], &[1.0; 3]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(scn.channel(i, j).shape(), (dims[i].rx, dims[j].tx));
        }
        assert_eq!(scn.dims(i), &dims[i]);
    }
}

#[test]
fn miso_entry_variance_matches_path_loss() {
    let geo = GeometryConfig { rx_radius: 0.0, ..literal_geo() }.with_seed(5);
    let n = 100_000;
    let scn = generate_miso(&geo, 1, n, &[1.0], &[1.0], 1.0).unwrap();
    let d = {
        let (a, b) = (geo.rx_center, geo.tx_center);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    let kappa = path_loss(d, &geo).unwrap();
    let h = scn.channel(0);
    let var = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    assert!((var / kappa - 1.0).abs() < 0.02, "variance {var} vs {kappa}");
    let mean = h.iter().sum::<wsrmax::C64>() / n as f64;
    assert!(mean.norm() < 0.02 * kappa.sqrt());
}

#[test]
fn mimo_entry_variance_matches_path_loss() {
    let geo = GeometryConfig { rx_radius: 0.0, tx_radius: 0.0, ..literal_geo() }.with_seed(9);
    let dims = vec![LinkDims { tx: 320, rx: 320, streams: 1 }; 2];
    let scn = generate_mimo(&geo, &dims, &[1.0; 2], &[1.0; 2], &[1.0; 2]).unwrap();
    let d = {
        let (a, b) = (geo.rx_center, geo.tx_center);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    let kappa = path_loss(d, &geo).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let h = scn.channel(i, j);
            let var = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / h.len() as f64;
            assert!((var / kappa - 1.0).abs() < 0.02, "H[{i}][{j}] variance {var} vs {kappa}");
        }
    }
}

fn two_user(h1: CVec, h2: CVec) -> MisoScenario {
    MisoScenario::new(vec![h1, h2], vec![1.0, 1.0], vec![1.0, 1.0], 2.0).unwrap()
}

#[test]
fn sinr_examples() {
    let e1 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
    let e2 = cvec(&[(0.0, 0.0), (1.0, 0.0)]);
    let single = MisoScenario::new(vec![e1.clone()], vec![1.0], vec![1.0], 1.0).unwrap();
    let bf1 = MisoBeamformers { w: vec![e1.clone()] };
    assert!((sinr_miso(&single, &bf1, 0).unwrap() - 1.0).abs() < 1e-15);

    let scn = two_user(e1.clone(), e2.clone());
    let shared = MisoBeamformers { w: vec![e1.clone(), e1.clone()] };
    assert!((sinr_miso(&scn, &shared, 0).unwrap() - 0.5).abs() < 1e-15);
    let nulled = MisoBeamformers { w: vec![e1.clone(), e2.clone()] };
    assert!((sinr_miso(&scn, &nulled, 0).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(
        sinr_miso(&scn, &nulled, 2),
        Err(WsrError::IndexOutOfRange { index: 2, len: 2 })
    ));
}

#[test]
fn wsr_miso_examples() {
    let scn = iid_miso(1, 3, 4, 1.0);
    assert_eq!(wsr_miso(&scn, &MisoBeamformers::zeros(&scn)), 0.0);
    let e1 = cvec(&[(1.0, 0.0), (0.0, 0.0)]);
    let single = MisoScenario::new(vec![e1.clone()], vec![1.0], vec![1.0], 1.0).unwrap();
    let v = wsr_miso(&single, &MisoBeamformers { w: vec![e1] });
    assert!((v - 2f64.ln()).abs() < 1e-15);

    let mut rng = wsrmax::rng::SeededStream::new(3, 0);
    let bf = random_bf_miso(&scn, &mut rng);
    let by_terms: f64 = (0..3).map(|k| scn.weight(k) * (1.0 + sinr_miso(&scn, &bf, k).unwrap()).ln()).sum();
    assert!((wsr_miso(&scn, &bf) - by_terms).abs() < 1e-13);
}

#[test]
fn interference_plus_noise_examples() {
    let single = iid_mimo(2, 1, 3, 1.0);
    let mut rng = wsrmax::rng::SeededStream::new(4, 0);
    let bf = random_bf_mimo(&single, &mut rng);
    assert!(wsrmax::linalg::max_abs_diff(&interference_plus_noise(&single, &bf, 0), &identity(3)) < 1e-15);

    let scn = iid_mimo(2, 3, 3, 1.0);
    let zero = MimoBeamformers::zeros(&scn);
    for k in 0..3 {
        assert!(wsrmax::linalg::max_abs_diff(&interference_plus_noise(&scn, &zero, k), &identity(3)) < 1e-15);
    }
    for seed in 0..10 {
        let mut rng = wsrmax::rng::SeededStream::new(seed, 0);
        let bf = random_bf_mimo(&scn, &mut rng);
        for k in 0..3 {
            let f = interference_plus_noise(&scn, &bf, k);
            assert!(hermitian_defect(&f) < 1e-12);
            assert!(min_eigenvalue(&f) >= scn.noise(k) - 1e-12);
        }
    }
}

#[test]
fn wsr_mimo_examples() {
    let h = vec![vec![identity(4)]];
    let scn = MimoScenario::new(h, vec![4], vec![1.0], vec![1.0], vec![4.0]).unwrap();
    let bf = MimoBeamformers { w: vec![identity(4)] };
    assert!((wsr_mimo(&scn, &bf) - 4.0 * 2f64.ln()).abs() < 1e-13);
    assert_eq!(wsr_mimo(&scn, &MimoBeamformers::zeros(&scn)), 0.0);
}

#[test]
fn wsr_mimo_matches_lu_determinants() {
    let scn = iid_mimo(7, 3, 3, 2.0);
    for seed in 0..10 {
        let mut rng = wsrmax::rng::SeededStream::new(seed, 1);
        let bf = random_bf_mimo(&scn, &mut rng);
        let mut total = 0.0;
        for k in 0..3 {
            let f = interference_plus_noise(&scn, &bf, k);
            let x = scn.channel(k, k) * &bf.w[k];
            // det(I + X^H F⁻¹ X) = det(F + XX^H) / det(F), both through LU.
            let num = (&f + &x * x.adjoint()).lu().determinant();
            let den = f.lu().determinant();
            total += scn.weight(k) * (num / den).re.ln();
        }
        assert!((wsr_mimo(&scn, &bf) - total).abs() < 1e-10);
    }
}

#[test]
fn mse_miso_examples() {
    let scn = iid_miso(5, 3, 3, 1.0);
    let mut rng = wsrmax::rng::SeededStream::new(5, 0);
    let bf = random_bf_miso(&scn, &mut rng);
    assert!((mse_miso(&scn, &bf, c(0.0, 0.0), 1).unwrap() - 1.0).abs() < 1e-15);

    let single = MisoScenario::new(vec![cvec(&[(1.0, 0.0)])], vec![1.0], vec![1.0], 1.0).unwrap();
    let zero = MisoBeamformers::zeros(&single);
    assert!((mse_miso(&single, &zero, c(1.0, 0.0), 0).unwrap() - 2.0).abs() < 1e-15);

    let stats = MisoLinkStats::new(&scn, &bf);
    for k in 0..3 {
        let l = stats.gains[(k, k)] / stats.total[k];
        let e = mse_miso(&scn, &bf, l, k).unwrap();
        assert!((e - 1.0 / (1.0 + stats.sinr[k])).abs() < 1e-12);
    }
}

#[test]
fn mse_mimo_examples() {
    let scn = iid_mimo(6, 3, 3, 1.0);
    let mut rng = wsrmax::rng::SeededStream::new(6, 0);
    let bf = random_bf_mimo(&scn, &mut rng);
    let e0 = mse_mimo(&scn, &bf, &CMat::zeros(3, 3), 0).unwrap();
    assert!(wsrmax::linalg::max_abs_diff(&e0, &identity(3)) < 1e-15);
    let stats = MimoLinkStats::new(&scn, &bf).unwrap();
    for k in 0..3 {
        let l = wsrmax::mimo::wmmse_auxiliaries(&scn, &bf).unwrap().0[k].clone();
        let e = mse_mimo(&scn, &bf, &l, k).unwrap();
        assert!(hermitian_defect(&e) < 1e-10);
        assert!(min_eigenvalue(&wsrmax::linalg::hermitian_part(&e)) > -1e-10);
        let target = wsrmax::linalg::hpd_inverse(&(identity(3) + &stats.gamma[k])).unwrap();
        assert!((wsrmax::linalg::re_trace(&e) - wsrmax::linalg::re_trace(&target)).abs() < 1e-10);
    }
    assert!(matches!(mse_mimo(&scn, &bf, &CMat::zeros(2, 3), 0), Err(WsrError::Dimension(_))));
}

#[test]
fn power_examples() {
    let scn = iid_miso(8, 3, 2, 1.0);
    assert_eq!(total_power(&MisoBeamformers::zeros(&scn)), 0.0);
    let units = MisoBeamformers { w: vec![cvec(&[(1.0, 0.0), (0.0, 0.0)]); 3] };
    assert!((total_power(&units) - 3.0).abs() < 1e-15);
    assert!((total_power(&units.scaled(2.0)) - 12.0).abs() < 1e-13);
    let m = iid_mimo(8, 2, 2, 1.0);
    let bf = MimoBeamformers { w: vec![identity(2), identity(2) * c(3.0, 0.0)] };
    assert!((per_link_power(&bf, 1) - 18.0).abs() < 1e-13);
    assert!((total_power_mimo(&bf) - 20.0).abs() < 1e-13);
    assert!(!bf.is_feasible(m.budgets()));
}

#[test]
fn scenario_invariants_are_enforced() {
    let h = vec![cvec(&[(1.0, 0.0)]), cvec(&[(1.0, 0.0), (0.0, 1.0)])];
    assert!(MisoScenario::new(h, vec![1.0; 2], vec![1.0; 2], 1.0).is_err());
    let h = vec![cvec(&[(1.0, 0.0)])];
    assert!(MisoScenario::new(h.clone(), vec![-1.0], vec![1.0], 1.0).is_err());
    assert!(MisoScenario::new(h.clone(), vec![1.0], vec![0.0], 1.0).is_err());
    assert!(MisoScenario::new(h, vec![1.0], vec![1.0], 0.0).is_err());
    let too_many_streams = MimoScenario::new(vec![vec![identity(2)]], vec![3], vec![1.0], vec![1.0], vec![1.0]);
    assert!(too_many_streams.is_err());
}

#[test]
fn scenarios_roundtrip_through_json() {
    let scn = geo_miso(3, 3, 2);
    let text = scn.to_json();
    assert_eq!(MisoScenario::from_json(&text).unwrap(), scn);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.to_string().contains('['));
    let m = geo_mimo(3, 2, 2);
    assert_eq!(MimoScenario::from_json(&m.to_json()).unwrap(), m);
}

#[test]
fn random_init_uses_full_budget() {
    let scn = geo_miso(2, 4, 4);
    let w = random_init_miso(&scn, 2);
    assert!((total_power(&w) - scn.power_budget()).abs() < 1e-12);
    assert!(w.is_feasible(scn.power_budget()));
    let m = geo_mimo(2, 3, 2);
    let v = random_init_mimo(&m, 2);
    for k in 0..3 {
        assert!((per_link_power(&v, k) - m.budget(k)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wsr_is_nonnegative_and_phase_invariant(seed in 0u64..10_000, theta in 0.0f64..6.3, k in 1usize..4, m in 1usize..4) {
        let scn = iid_miso(seed, k, m, 1.0);
        let mut rng = wsrmax::rng::SeededStream::new(seed, 3);
        let bf = random_bf_miso(&scn, &mut rng);
        let base = wsr_miso(&scn, &bf);
        prop_assert!(base >= 0.0);
        for i in 0..k {
            prop_assert!(sinr_miso(&scn, &bf, i).unwrap() >= 0.0);
        }
        let mut rotated = bf.clone();
        rotated.w[0] *= c(theta.cos(), theta.sin());
        prop_assert!((wsr_miso(&scn, &rotated) - base).abs() < 1e-12 * base.max(1.0));
    }

    #[test]
    fn wsr_vanishes_iff_every_beam_misses_its_user(seed in 0u64..10_000) {
        let scn = iid_miso(seed, 2, 3, 1.0);
        let mut rng = wsrmax::rng::SeededStream::new(seed, 4);
        let mut bf = random_bf_miso(&scn, &mut rng);
        for k in 0..2 {
            // Remove the component along h_k.
            let h = scn.channel(k);
            let proj = h * (h.dotc(&bf.w[k]) / h.norm_squared());
            bf.w[k] -= proj;
        }
        prop_assert!(wsr_miso(&scn, &bf).abs() < 1e-14);
        bf.w[1] += scn.channel(1) * c(1e-3, 0.0);
        prop_assert!(wsr_miso(&scn, &bf) > 0.0);
    }

    #[test]
    fn interference_matrix_is_hermitian_and_bounded_below(seed in 0u64..10_000) {
        let scn = iid_mimo(seed, 3, 2, 2.0);
        let mut rng = wsrmax::rng::SeededStream::new(seed, 5);
        let bf = random_bf_mimo(&scn, &mut rng);
        for k in 0..3 {
            let f = interference_plus_noise(&scn, &bf, k);
            prop_assert!(hermitian_defect(&f) < 1e-12);
            prop_assert!(min_eigenvalue(&f) >= scn.noise(k) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn mmse_receiver_error_equals_inverse_one_plus_sinr(seed in 0u64..10_000) {
        let scn = iid_miso(seed, 3, 3, 2.0);
        let mut rng = wsrmax::rng::SeededStream::new(seed, 6);
        let bf = random_bf_miso(&scn, &mut rng);
        let stats = MisoLinkStats::new(&scn, &bf);
        for k in 0..3 {
            let l = stats.gains[(k, k)] / stats.total[k];
            let e = mse_miso(&scn, &bf, l, k).unwrap();
            prop_assert!((e - 1.0 / (1.0 + stats.sinr[k])).abs() < 1e-12);
        }
    }
}
