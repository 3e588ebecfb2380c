//! Problem instances and exact evaluation of SINR, rates, WSR, MSE and power.
//!
//! MISO broadcast: one `M`-antenna transmitter serves `K` single-antenna users
//! under a total power budget. MIMO interference channel: `K` transmitter /
//! receiver pairs, link `k` sends `Mˢ[k]` streams from `Mᵗ[k]` antennas to
//! `Mʳ[k]` antennas under its own budget `P[k]`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WsrError};
use crate::linalg::{c, fro_norm_sq, hpd_inverse, hpd_logdet, identity, vec_norm_sq, CMat, CVec, C64};
use crate::rng::{SeededStream, STREAM_CHANNELS, STREAM_INIT};

/// Relative slack allowed on power constraints when tagging feasibility.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

/// Convert dBm to linear milliwatts.
pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Thermal noise power in dBm over a bandwidth, from a PSD in dBm/Hz.
pub fn noise_floor_dbm(psd_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    psd_dbm_per_hz + 10.0 * bandwidth_hz.log10()
}

// ---------------------------------------------------------------------------
// Geometry and channel generation
// ---------------------------------------------------------------------------

/// Deployment geometry and large-scale fading parameters.
///
/// Channel coefficients are drawn with variance `κ(d) / N`, where `κ` is the
/// path loss and `N = 10^{noise_floor_dbm/10}` the receiver noise power in
/// mW. With this normalization the noise variance of the model is 1 and `P`
/// is measured in mW. Setting `noise_floor_dbm = 0` leaves `κ(d)` unscaled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// MISO base station position, or center of the MIMO transmitter disk (m).
    pub tx_center: [f64; 3],
    /// Radius of the MIMO transmitter disk (m); unused for MISO.
    pub tx_radius: f64,
    /// Center of the user / receiver disk (m).
    pub rx_center: [f64; 3],
    pub rx_radius: f64,
    /// Path loss at the reference distance (dB).
    pub ref_loss_db: f64,
    /// Reference distance (m).
    pub ref_distance: f64,
    /// Path-loss exponent.
    pub exponent: f64,
    /// Noise power used to normalize channel gains (dBm).
    pub noise_floor_dbm: f64,
    pub seed: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            tx_center: [0.0, 0.0, 10.0],
            tx_radius: 10.0,
            rx_center: [200.0, 30.0, 0.0],
            rx_radius: 10.0,
            ref_loss_db: -30.0,
            ref_distance: 1.0,
            exponent: 3.67,
            noise_floor_dbm: noise_floor_dbm(-169.0, 240e3),
            seed: 0,
        }
    }
}

impl GeometryConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ref_distance > 0.0) {
            return Err(WsrError::Invalid("ref_distance must be positive".into()));
        }
        if !(self.rx_radius >= 0.0) || !(self.tx_radius >= 0.0) {
            return Err(WsrError::Invalid("disk radii must be nonnegative".into()));
        }
        if !self.exponent.is_finite() || !self.ref_loss_db.is_finite() || !self.noise_floor_dbm.is_finite() {
            return Err(WsrError::Invalid("geometry parameters must be finite".into()));
        }
        Ok(())
    }

    /// Per-entry channel variance at distance `d`.
    pub fn channel_variance(&self, d: f64) -> Result<f64> {
        Ok(path_loss(d, self)? / dbm_to_linear(self.noise_floor_dbm))
    }
}

/// Distance-dependent attenuation `T₀ (d/d₀)^{-ϱ}` (linear).
pub fn path_loss(d: f64, geo: &GeometryConfig) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(WsrError::Domain(format!("path loss needs a positive distance, got {d}")));
    }
    if !(geo.ref_distance > 0.0) {
        return Err(WsrError::Domain("reference distance must be positive".into()));
    }
    Ok(10f64.powf(geo.ref_loss_db / 10.0) * (d / geo.ref_distance).powf(-geo.exponent))
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Rayleigh-fading MISO instance: users uniform in the receiver disk,
/// `h_k ~ CN(0, κ(d_k) I)` (after noise normalization).
pub fn generate_miso(
    geo: &GeometryConfig,
    num_users: usize,
    num_antennas: usize,
    weights: &[f64],
    noise: &[f64],
    power_budget: f64,
) -> Result<MisoScenario> {
    geo.validate()?;
    if num_users == 0 || num_antennas == 0 {
        return Err(WsrError::Invalid("K and M must be at least 1".into()));
    }
    let mut rng = SeededStream::new(geo.seed, STREAM_CHANNELS);
    let positions: Vec<[f64; 3]> = (0..num_users)
        .map(|_| rng.point_in_disk(geo.rx_center, geo.rx_radius))
        .collect();
    let mut channels = Vec::with_capacity(num_users);
    for p in &positions {
        let var = geo.channel_variance(distance(*p, geo.tx_center))?;
        channels.push(rng.complex_gaussian_vec(num_antennas, var));
    }
    MisoScenario::new(channels, weights.to_vec(), noise.to_vec(), power_budget)
}

/// Per-link antenna and stream counts of a MIMO interference channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDims {
    pub tx: usize,
    pub rx: usize,
    pub streams: usize,
}

impl LinkDims {
    pub fn uniform(m: usize) -> Self {
        Self { tx: m, rx: m, streams: m }
    }
}

/// Rayleigh-fading MIMO interference channel: transmitters uniform in the
/// transmitter disk, receivers in the receiver disk, `H[i][j]` entries
/// `CN(0, κ(‖rx_i − tx_j‖))`.
pub fn generate_mimo(
    geo: &GeometryConfig,
    dims: &[LinkDims],
    weights: &[f64],
    noise: &[f64],
    budgets: &[f64],
) -> Result<MimoScenario> {
    geo.validate()?;
    let k = dims.len();
    if k == 0 {
        return Err(WsrError::Invalid("K must be at least 1".into()));
    }
    let mut rng = SeededStream::new(geo.seed, STREAM_CHANNELS);
    let tx_pos: Vec<[f64; 3]> = (0..k).map(|_| rng.point_in_disk(geo.tx_center, geo.tx_radius)).collect();
    let rx_pos: Vec<[f64; 3]> = (0..k).map(|_| rng.point_in_disk(geo.rx_center, geo.rx_radius)).collect();
    let mut channels = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let var = geo.channel_variance(distance(rx_pos[i], tx_pos[j]))?;
            row.push(rng.complex_gaussian_mat(dims[i].rx, dims[j].tx, var));
        }
        channels.push(row);
    }
    let streams: Vec<usize> = dims.iter().map(|d| d.streams).collect();
    MimoScenario::new(channels, streams, weights.to_vec(), noise.to_vec(), budgets.to_vec())
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

fn check_weights_noise(k: usize, weights: &[f64], noise: &[f64]) -> Result<()> {
    if weights.len() != k || noise.len() != k {
        return Err(WsrError::Dimension(format!(
            "expected {k} weights and noise powers, got {} and {}",
            weights.len(),
            noise.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(WsrError::Invalid("weights must be finite and nonnegative".into()));
    }
    if noise.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(WsrError::Invalid("noise powers must be positive".into()));
    }
    Ok(())
}

/// Immutable MISO broadcast instance.
#[derive(Clone, Debug, PartialEq)]
pub struct MisoScenario {
    channels: Vec<CVec>,
    /// `M × K` matrix with columns `h_k`.
    stacked: CMat,
    weights: Vec<f64>,
    noise: Vec<f64>,
    power_budget: f64,
}

impl MisoScenario {
    pub fn new(channels: Vec<CVec>, weights: Vec<f64>, noise: Vec<f64>, power_budget: f64) -> Result<Self> {
        let k = channels.len();
        if k == 0 {
            return Err(WsrError::Invalid("at least one user required".into()));
        }
        let m = channels[0].len();
        if m == 0 || channels.iter().any(|h| h.len() != m) {
            return Err(WsrError::Dimension("all channel vectors must share a nonzero length".into()));
        }
        check_weights_noise(k, &weights, &noise)?;
        if !(power_budget > 0.0) || !power_budget.is_finite() {
            return Err(WsrError::Invalid("power budget must be positive".into()));
        }
        let stacked = CMat::from_columns(&channels);
        Ok(Self { channels, stacked, weights, noise, power_budget })
    }

    pub fn num_users(&self) -> usize {
        self.channels.len()
    }
    pub fn num_antennas(&self) -> usize {
        self.channels[0].len()
    }
    pub fn channel(&self, k: usize) -> &CVec {
        &self.channels[k]
    }
    pub fn channels(&self) -> &[CVec] {
        &self.channels
    }
    /// `[h_1 … h_K]`.
    pub fn channel_matrix(&self) -> &CMat {
        &self.stacked
    }
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn noise(&self, k: usize) -> f64 {
        self.noise[k]
    }
    pub fn noises(&self) -> &[f64] {
        &self.noise
    }
    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn check(&self, bf: &MisoBeamformers) -> Result<()> {
        if bf.w.len() != self.num_users() || bf.w.iter().any(|w| w.len() != self.num_antennas()) {
            return Err(WsrError::Dimension(format!(
                "beamformers must be {} vectors of length {}",
                self.num_users(),
                self.num_antennas()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = MisoDoc {
            num_users: self.num_users(),
            num_antennas: self.num_antennas(),
            channels: self.channels.iter().map(|h| h.iter().map(pair).collect()).collect(),
            weights: self.weights.clone(),
            noise: self.noise.clone(),
            power_budget: self.power_budget,
        };
        serde_json::to_string_pretty(&doc).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MisoDoc = serde_json::from_str(s)?;
        let channels: Vec<CVec> = doc
            .channels
            .iter()
            .map(|h| CVec::from_iterator(h.len(), h.iter().map(unpair)))
            .collect();
        let scn = Self::new(channels, doc.weights, doc.noise, doc.power_budget)?;
        if scn.num_users() != doc.num_users || scn.num_antennas() != doc.num_antennas {
            return Err(WsrError::Dimension("declared K/M disagree with channel data".into()));
        }
        Ok(scn)
    }
}

/// Immutable MIMO interference-channel instance; `channels[i][j]` is the
/// `Mʳ[i] × Mᵗ[j]` channel from transmitter `j` to receiver `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoScenario {
    channels: Vec<Vec<CMat>>,
    dims: Vec<LinkDims>,
    weights: Vec<f64>,
    noise: Vec<f64>,
    budgets: Vec<f64>,
}

impl MimoScenario {
    pub fn new(
        channels: Vec<Vec<CMat>>,
        streams: Vec<usize>,
        weights: Vec<f64>,
        noise: Vec<f64>,
        budgets: Vec<f64>,
    ) -> Result<Self> {
        let k = channels.len();
        if k == 0 || channels.iter().any(|row| row.len() != k) {
            return Err(WsrError::Dimension("channel array must be K × K with K ≥ 1".into()));
        }
        if streams.len() != k || budgets.len() != k {
            return Err(WsrError::Dimension("streams and budgets need one entry per link".into()));
        }
        let dims: Vec<LinkDims> = (0..k)
            .map(|i| LinkDims { tx: channels[0][i].ncols(), rx: channels[i][0].nrows(), streams: streams[i] })
            .collect();
        for i in 0..k {
            for j in 0..k {
                if channels[i][j].shape() != (dims[i].rx, dims[j].tx) {
                    return Err(WsrError::Dimension(format!(
                        "H[{i}][{j}] has shape {:?}, expected ({}, {})",
                        channels[i][j].shape(),
                        dims[i].rx,
                        dims[j].tx
                    )));
                }
            }
        }
        for (i, d) in dims.iter().enumerate() {
            if d.tx == 0 || d.rx == 0 || d.streams == 0 || d.streams > d.tx.min(d.rx) {
                return Err(WsrError::Invalid(format!(
                    "link {i}: need 1 ≤ streams ≤ min(tx, rx), got {d:?}"
                )));
            }
        }
        check_weights_noise(k, &weights, &noise)?;
        if budgets.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(WsrError::Invalid("power budgets must be positive".into()));
        }
        Ok(Self { channels, dims, weights, noise, budgets })
    }

    pub fn num_links(&self) -> usize {
        self.channels.len()
    }
    pub fn dims(&self, k: usize) -> &LinkDims {
        &self.dims[k]
    }
    /// Channel from transmitter `j` to receiver `i`.
    pub fn channel(&self, i: usize, j: usize) -> &CMat {
        &self.channels[i][j]
    }
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn noise(&self, k: usize) -> f64 {
        self.noise[k]
    }
    pub fn budget(&self, k: usize) -> f64 {
        self.budgets[k]
    }
    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn check(&self, bf: &MimoBeamformers) -> Result<()> {
        if bf.w.len() != self.num_links() {
            return Err(WsrError::Dimension("one beamforming matrix per link required".into()));
        }
        for (k, w) in bf.w.iter().enumerate() {
            if w.shape() != (self.dims[k].tx, self.dims[k].streams) {
                return Err(WsrError::Dimension(format!(
                    "W[{k}] has shape {:?}, expected ({}, {})",
                    w.shape(),
                    self.dims[k].tx,
                    self.dims[k].streams
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = MimoDoc {
            num_links: self.num_links(),
            dims: self.dims.clone(),
            channels: self
                .channels
                .iter()
                .map(|row| row.iter().map(matrix_doc).collect())
                .collect(),
            weights: self.weights.clone(),
            noise: self.noise.clone(),
            budgets: self.budgets.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MimoDoc = serde_json::from_str(s)?;
        let channels = doc
            .channels
            .iter()
            .map(|row| row.iter().map(matrix_from_doc).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let streams = doc.dims.iter().map(|d| d.streams).collect();
        let scn = Self::new(channels, streams, doc.weights, doc.noise, doc.budgets)?;
        if scn.num_links() != doc.num_links || scn.dims != doc.dims {
            return Err(WsrError::Dimension("declared dimensions disagree with channel data".into()));
        }
        Ok(scn)
    }
}

// JSON documents: complex numbers as [re, im], matrices as lists of rows.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MisoDoc {
    num_users: usize,
    num_antennas: usize,
    channels: Vec<Vec<[f64; 2]>>,
    weights: Vec<f64>,
    noise: Vec<f64>,
    power_budget: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MimoDoc {
    num_links: usize,
    dims: Vec<LinkDims>,
    channels: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
    weights: Vec<f64>,
    noise: Vec<f64>,
    budgets: Vec<f64>,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: &[f64; 2]) -> C64 {
    c(p[0], p[1])
}

fn matrix_doc(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect()).collect()
}

fn matrix_from_doc(rows: &Vec<Vec<[f64; 2]>>) -> Result<CMat> {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != cols) {
        return Err(WsrError::Dimension("ragged matrix in scenario document".into()));
    }
    Ok(CMat::from_fn(r, cols, |i, j| unpair(&rows[i][j])))
}

// ---------------------------------------------------------------------------
// Beamformers
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct MisoBeamformers {
    pub w: Vec<CVec>,
}

impl MisoBeamformers {
    pub fn zeros(scn: &MisoScenario) -> Self {
        Self { w: vec![CVec::zeros(scn.num_antennas()); scn.num_users()] }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { w: self.w.iter().map(|w| w * c(s, 0.0)).collect() }
    }

    /// `M × K` matrix with columns `w_k`.
    pub fn stacked(&self) -> CMat {
        CMat::from_columns(&self.w)
    }

    pub fn from_stacked(w: &CMat) -> Self {
        Self { w: w.column_iter().map(|col| col.into_owned()).collect() }
    }

    pub fn is_feasible(&self, budget: f64) -> bool {
        total_power(self) <= budget * (1.0 + FEASIBILITY_RTOL)
    }

    /// Largest entrywise difference across all users.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| crate::linalg::max_abs_diff_vec(a, b))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MimoBeamformers {
    pub w: Vec<CMat>,
}

impl MimoBeamformers {
    pub fn zeros(scn: &MimoScenario) -> Self {
        Self { w: (0..scn.num_links()).map(|k| CMat::zeros(scn.dims(k).tx, scn.dims(k).streams)).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { w: self.w.iter().map(|w| w * c(s, 0.0)).collect() }
    }

    pub fn is_feasible(&self, budgets: &[f64]) -> bool {
        self.w
            .iter()
            .zip(budgets)
            .all(|(w, p)| fro_norm_sq(w) <= p * (1.0 + FEASIBILITY_RTOL))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| crate::linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }
}

/// I.i.d. complex Gaussian beamformers scaled to use the full budget.
pub fn random_init_miso(scn: &MisoScenario, seed: u64) -> MisoBeamformers {
    let mut rng = SeededStream::new(seed, STREAM_INIT);
    let raw = MisoBeamformers {
        w: (0..scn.num_users()).map(|_| rng.complex_gaussian_vec(scn.num_antennas(), 1.0)).collect(),
    };
    let p = total_power(&raw);
    raw.scaled((scn.power_budget() / p).sqrt())
}

/// `w_k = √(P/K) h_k / ‖h_k‖`.
pub fn matched_filter_init_miso(scn: &MisoScenario) -> MisoBeamformers {
    let per_user = scn.power_budget() / scn.num_users() as f64;
    MisoBeamformers {
        w: scn
            .channels()
            .iter()
            .map(|h| {
                let n = h.norm();
                if n > 0.0 {
                    h * c(per_user.sqrt() / n, 0.0)
                } else {
                    CVec::zeros(h.len())
                }
            })
            .collect(),
    }
}

/// Per-link i.i.d. complex Gaussian beamformers with `‖W_k‖² = P_k`.
pub fn random_init_mimo(scn: &MimoScenario, seed: u64) -> MimoBeamformers {
    let mut rng = SeededStream::new(seed, STREAM_INIT);
    MimoBeamformers {
        w: (0..scn.num_links())
            .map(|k| {
                let d = scn.dims(k);
                let w = rng.complex_gaussian_mat(d.tx, d.streams, 1.0);
                let p = fro_norm_sq(&w);
                w * c((scn.budget(k) / p).sqrt(), 0.0)
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// MISO evaluation
// ---------------------------------------------------------------------------

/// Per-user received amplitudes and powers at a beamformer set.
#[derive(Clone, Debug)]
pub struct MisoLinkStats {
    /// `gains[(k, j)] = h_k^H w_j`.
    pub gains: CMat,
    /// `Σ_{j≠k} |h_k^H w_j|² + σ_k²`.
    pub interference: Vec<f64>,
    /// `Σ_j |h_k^H w_j|² + σ_k²`.
    pub total: Vec<f64>,
    pub sinr: Vec<f64>,
}

impl MisoLinkStats {
    pub fn new(scn: &MisoScenario, bf: &MisoBeamformers) -> Self {
        Self::from_stacked(scn, &bf.stacked())
    }

    /// Stats for the beamformers stacked as the columns of `w`.
    pub fn from_stacked(scn: &MisoScenario, w: &CMat) -> Self {
        let k = scn.num_users();
        let gains = scn.channel_matrix().ad_mul(w);
        let mut interference = vec![0.0; k];
        let mut total = vec![0.0; k];
        let mut sinr = vec![0.0; k];
        for i in 0..k {
            let signal = gains[(i, i)].norm_sqr();
            let cross: f64 = (0..k).filter(|&j| j != i).map(|j| gains[(i, j)].norm_sqr()).sum();
            interference[i] = cross + scn.noise(i);
            total[i] = interference[i] + signal;
            sinr[i] = signal / interference[i];
        }
        Self { gains, interference, total, sinr }
    }

    pub fn wsr(&self, scn: &MisoScenario) -> f64 {
        self.sinr.iter().enumerate().map(|(k, s)| scn.weight(k) * s.ln_1p()).sum()
    }
}

pub fn sinr_miso(scn: &MisoScenario, bf: &MisoBeamformers, k: usize) -> Result<f64> {
    scn.check(bf)?;
    if k >= scn.num_users() {
        return Err(WsrError::IndexOutOfRange { index: k, len: scn.num_users() });
    }
    let hk = scn.channel(k);
    let signal = hk.dotc(&bf.w[k]).norm_sqr();
    let interference: f64 = (0..scn.num_users())
        .filter(|&j| j != k)
        .map(|j| hk.dotc(&bf.w[j]).norm_sqr())
        .sum::<f64>()
        + scn.noise(k);
    Ok(signal / interference)
}

/// `Σ_k ω_k ln(1 + SINR_k)` in nats.
pub fn wsr_miso(scn: &MisoScenario, bf: &MisoBeamformers) -> f64 {
    scn.check(bf).expect("beamformer dimensions");
    MisoLinkStats::new(scn, bf).wsr(scn)
}

/// MSE of user `k` with scalar receiver `l`.
pub fn mse_miso(scn: &MisoScenario, bf: &MisoBeamformers, l: C64, k: usize) -> Result<f64> {
    scn.check(bf)?;
    if k >= scn.num_users() {
        return Err(WsrError::IndexOutOfRange { index: k, len: scn.num_users() });
    }
    let hk = scn.channel(k);
    let lc = l.conj();
    let own = (lc * hk.dotc(&bf.w[k]) - 1.0).norm_sqr();
    let cross: f64 = (0..scn.num_users())
        .filter(|&j| j != k)
        .map(|j| (lc * hk.dotc(&bf.w[j])).norm_sqr())
        .sum();
    Ok(own + cross + scn.noise(k) * l.norm_sqr())
}

pub fn total_power(bf: &MisoBeamformers) -> f64 {
    bf.w.iter().map(vec_norm_sq).sum()
}

// ---------------------------------------------------------------------------
// MIMO evaluation
// ---------------------------------------------------------------------------

/// `F_k = Σ_{j≠k} H_{k,j} W_j W_j^H H_{k,j}^H + σ_k² I`.
pub fn interference_plus_noise(scn: &MimoScenario, bf: &MimoBeamformers, k: usize) -> CMat {
    scn.check(bf).expect("beamformer dimensions");
    interference_plus_noise_unchecked(scn, bf, k)
}

fn interference_plus_noise_unchecked(scn: &MimoScenario, bf: &MimoBeamformers, k: usize) -> CMat {
    let mut f = identity(scn.dims(k).rx) * c(scn.noise(k), 0.0);
    for j in 0..scn.num_links() {
        if j == k {
            continue;
        }
        let hw = scn.channel(k, j) * &bf.w[j];
        f += &hw * hw.adjoint();
    }
    f
}

/// Per-link covariance quantities at a beamformer set.
#[derive(Clone, Debug)]
pub struct MimoLinkStats {
    /// Interference-plus-noise `F_k`.
    pub f: Vec<CMat>,
    pub f_inv: Vec<CMat>,
    /// Desired-signal image `X_k = H_{k,k} W_k`.
    pub x: Vec<CMat>,
    /// `Γ_k = X_k^H F_k^{-1} X_k` (Hermitian PSD).
    pub gamma: Vec<CMat>,
    /// `ln det(I + Γ_k)`.
    pub rate: Vec<f64>,
}

impl MimoLinkStats {
    pub fn new(scn: &MimoScenario, bf: &MimoBeamformers) -> Result<Self> {
        scn.check(bf)?;
        let kk = scn.num_links();
        let mut out = Self {
            f: Vec::with_capacity(kk),
            f_inv: Vec::with_capacity(kk),
            x: Vec::with_capacity(kk),
            gamma: Vec::with_capacity(kk),
            rate: Vec::with_capacity(kk),
        };
        for k in 0..kk {
            let f = interference_plus_noise_unchecked(scn, bf, k);
            let f_inv = hpd_inverse(&f).ok_or_else(|| WsrError::Singular(format!("F_{k}")))?;
            let x = scn.channel(k, k) * &bf.w[k];
            let gamma = crate::linalg::hermitian_part(&(x.adjoint() * &f_inv * &x));
            let ms = scn.dims(k).streams;
            let rate = hpd_logdet(&(identity(ms) + &gamma)).ok_or_else(|| WsrError::Singular(format!("I + Γ_{k}")))?;
            out.f.push(f);
            out.f_inv.push(f_inv);
            out.x.push(x);
            out.gamma.push(gamma);
            out.rate.push(rate);
        }
        Ok(out)
    }

    pub fn wsr(&self, scn: &MimoScenario) -> f64 {
        self.rate.iter().enumerate().map(|(k, r)| scn.weight(k) * r).sum()
    }
}

/// `Σ_k ω_k ln det(I + W_k^H H_{k,k}^H F_k^{-1} H_{k,k} W_k)` in nats.
pub fn wsr_mimo(scn: &MimoScenario, bf: &MimoBeamformers) -> f64 {
    MimoLinkStats::new(scn, bf)
        .expect("F_k is positive definite whenever σ² > 0")
        .wsr(scn)
}

/// MSE matrix of link `k` with receive filter `L` (`Mʳ × Mˢ`).
pub fn mse_mimo(scn: &MimoScenario, bf: &MimoBeamformers, l: &CMat, k: usize) -> Result<CMat> {
    scn.check(bf)?;
    if k >= scn.num_links() {
        return Err(WsrError::IndexOutOfRange { index: k, len: scn.num_links() });
    }
    let d = scn.dims(k);
    if l.shape() != (d.rx, d.streams) {
        return Err(WsrError::Dimension(format!("L must be {} × {}", d.rx, d.streams)));
    }
    let lh = l.adjoint();
    let e0 = &lh * scn.channel(k, k) * &bf.w[k] - identity(d.streams);
    let mut e = &e0 * e0.adjoint();
    for j in 0..scn.num_links() {
        if j == k {
            continue;
        }
        let t = &lh * scn.channel(k, j) * &bf.w[j];
        e += &t * t.adjoint();
    }
    e += &lh * l * c(scn.noise(k), 0.0);
    Ok(e)
}

pub fn per_link_power(bf: &MimoBeamformers, k: usize) -> f64 {
    fro_norm_sq(&bf.w[k])
}

pub fn total_power_mimo(bf: &MimoBeamformers) -> f64 {
    bf.w.iter().map(fro_norm_sq).sum()
}
