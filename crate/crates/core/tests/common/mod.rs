#![allow(dead_code)]

use wsrmax::linalg::{c, fro_norm_sq, CMat, CVec};
use wsrmax::rng::SeededStream;
use wsrmax::system_model::{
    generate_mimo, generate_miso, GeometryConfig, LinkDims, MimoBeamformers, MimoScenario, MisoBeamformers,
    MisoScenario,
};

/// Unit-variance Rayleigh MISO instance with `σ² = 1`, `ω = 1`.
pub fn iid_miso(seed: u64, k: usize, m: usize, power: f64) -> MisoScenario {
    let mut rng = SeededStream::new(seed, 11);
    let h = (0..k).map(|_| rng.complex_gaussian_vec(m, 1.0)).collect();
    MisoScenario::new(h, vec![1.0; k], vec![1.0; k], power).unwrap()
}

/// Unit-variance MIMO interference channel with uniform dims.
pub fn iid_mimo(seed: u64, k: usize, m: usize, power: f64) -> MimoScenario {
    let mut rng = SeededStream::new(seed, 12);
    let h = (0..k).map(|_| (0..k).map(|_| rng.complex_gaussian_mat(m, m, 1.0)).collect()).collect();
    MimoScenario::new(h, vec![m; k], vec![1.0; k], vec![1.0; k], vec![power; k]).unwrap()
}

/// Instance drawn from the default deployment geometry.
pub fn geo_miso(seed: u64, k: usize, m: usize) -> MisoScenario {
    let geo = GeometryConfig::default().with_seed(seed);
    generate_miso(&geo, k, m, &vec![1.0; k], &vec![1.0; k], 1.0).unwrap()
}

pub fn geo_mimo(seed: u64, k: usize, m: usize) -> MimoScenario {
    let geo = GeometryConfig::default().with_seed(seed);
    generate_mimo(&geo, &vec![LinkDims::uniform(m); k], &vec![1.0; k], &vec![1.0; k], &vec![1.0; k]).unwrap()
}

/// Random beamformers with total power uniform in `[0, P]`.
pub fn random_bf_miso(scn: &MisoScenario, rng: &mut SeededStream) -> MisoBeamformers {
    let raw = MisoBeamformers {
        w: (0..scn.num_users()).map(|_| rng.complex_gaussian_vec(scn.num_antennas(), 1.0)).collect(),
    };
    let p: f64 = raw.w.iter().map(|v| v.norm_squared()).sum();
    raw.scaled((scn.power_budget() * rng.uniform() / p).sqrt())
}

pub fn random_bf_mimo(scn: &MimoScenario, rng: &mut SeededStream) -> MimoBeamformers {
    MimoBeamformers {
        w: (0..scn.num_links())
            .map(|k| {
                let d = scn.dims(k);
                let w = rng.complex_gaussian_mat(d.tx, d.streams, 1.0);
                let s = (scn.budget(k) * rng.uniform() / fro_norm_sq(&w)).sqrt();
                w * c(s, 0.0)
            })
            .collect(),
    }
}

pub fn cvec(entries: &[(f64, f64)]) -> CVec {
    CVec::from_iterator(entries.len(), entries.iter().map(|&(re, im)| c(re, im)))
}

pub fn real_mat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}
