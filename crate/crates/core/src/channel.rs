//! Wireless world model: array geometry, steering vectors, multipath
//! channels, BS analog beams and the received SINR.
//!
//! Angle convention. `elev` is measured from the array's z-axis and `azim`
//! from its x-axis (the array lies in the y-z plane). The spatial signatures
//! are
//!
//! ```text
//! a_y = exp(-j 2pi (d_y / lambda) sin(elev) sin(azim))
//! a_z = exp(-j 2pi (d_z / lambda) cos(azim))
//! ```
//!
//! Note that `a_z` depends on the azimuth only. This is the model the
//! optimizers were designed against and is kept as is.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dma::PhaseConfig;
use crate::error::{Error, Result};
use crate::to_db;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_y: usize,
    pub n_z: usize,
    pub d_y: f64,
    pub d_z: f64,
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(n_y: usize, n_z: usize, d_y: f64, d_z: f64, wavelength: f64) -> Result<Self> {
        let geom = Self {
            n_y,
            n_z,
            d_y,
            d_z,
            wavelength,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Array with lambda/2 spacing on both axes.
    pub fn half_wavelength(n_y: usize, n_z: usize, wavelength: f64) -> Self {
        Self {
            n_y,
            n_z,
            d_y: wavelength / 2.0,
            d_z: wavelength / 2.0,
            wavelength,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y == 0 || self.n_z == 0 {
            return Err(Error::config("array dimensions must be at least 1x1"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.d_y) || !positive(self.d_z) || !positive(self.wavelength) {
            return Err(Error::config("element spacing and wavelength must be positive"));
        }
        Ok(())
    }

    /// Total element count `n_y * n_z`.
    pub fn len(&self) -> usize {
        self.n_y * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(y, z)` coordinates of flat element `n`.
    pub fn coords(&self, n: usize) -> (usize, usize) {
        (n / self.n_z, n % self.n_z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub gain: Complex64,
    pub elev_rx: f64,
    pub azim_rx: f64,
    pub elev_tx: f64,
    pub azim_tx: f64,
}

/// Steering vector `[a_y^0 .. a_y^{n_y-1}] (x) [a_z^0 .. a_z^{n_z-1}]`.
pub fn steering_vector(geom: &ArrayGeometry, elev: f64, azim: f64) -> Vec<Complex64> {
    let phase_y = -2.0 * PI * geom.d_y / geom.wavelength * elev.sin() * azim.sin();
    let phase_z = -2.0 * PI * geom.d_z / geom.wavelength * azim.cos();
    let mut out = Vec::with_capacity(geom.len());
    for y in 0..geom.n_y {
        for z in 0..geom.n_z {
            out.push(Complex64::from_polar(1.0, phase_y * y as f64 + phase_z * z as f64));
        }
    }
    out
}

/// Dense `rows x cols` complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl Channel {
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::dim(format!(
                "{} entries cannot form a {rows}x{cols} channel",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `H w`.
    pub fn apply(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        if w.len() != self.cols {
            return Err(Error::dim(format!(
                "beam has {} entries, channel has {} columns",
                w.len(),
                self.cols
            )));
        }
        Ok(self
            .entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(w).map(|(h, x)| h * x).sum())
            .collect())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// `sum_l beta_l * a_r(l) a_bs(l)^T` as an `N x M` matrix.
pub fn build_channel(paths: &[PathParams], dma: &ArrayGeometry, bs: &ArrayGeometry) -> Result<Channel> {
    if paths.is_empty() {
        return Err(Error::DegenerateChannel);
    }
    let (rows, cols) = (dma.len(), bs.len());
    let mut entries = vec![Complex64::new(0.0, 0.0); rows * cols];
    for path in paths {
        let a_r = steering_vector(dma, path.elev_rx, path.azim_rx);
        let a_bs = steering_vector(bs, path.elev_tx, path.azim_tx);
        for (i, ar) in a_r.iter().enumerate() {
            let scaled = path.gain * ar;
            for (j, ab) in a_bs.iter().enumerate() {
                entries[i * cols + j] += scaled * ab;
            }
        }
    }
    Channel::from_rows(rows, cols, entries)
}

/// `B`-beam DFT codebook over the BS array's y-axis: beam `i` has entries
/// `exp(j 2pi i y / B) / sqrt(M)`.
pub fn dft_codebook(bs: &ArrayGeometry, beams: usize) -> Vec<Vec<Complex64>> {
    let norm = 1.0 / (bs.len() as f64).sqrt();
    (0..beams)
        .map(|i| {
            (0..bs.len())
                .map(|n| {
                    let (y, _) = bs.coords(n);
                    Complex64::from_polar(norm, 2.0 * PI * (i * y) as f64 / beams as f64)
                })
                .collect()
        })
        .collect()
}

/// The codebook beam maximising `||H w||^2`; ties go to the lowest index.
pub fn select_bs_beam(codebook: &[Vec<Complex64>], channel: &Channel) -> Result<Vec<Complex64>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, w) in codebook.iter().enumerate() {
        let power: f64 = channel.apply(w)?.iter().map(|x| x.norm_sqr()).sum();
        if best.is_none_or(|(_, p)| power > p) {
            best = Some((i, power));
        }
    }
    best.map(|(i, _)| codebook[i].clone())
        .ok_or_else(|| Error::config("BS beam codebook is empty"))
}

/// `|theta H w|^2`.
pub fn effective_gain(theta: &PhaseConfig, channel: &Channel, beam: &[Complex64]) -> Result<f64> {
    if theta.len() != channel.rows() {
        return Err(Error::dim(format!(
            "configuration has {} elements, channel has {} rows",
            theta.len(),
            channel.rows()
        )));
    }
    let hw = channel.apply(beam)?;
    Ok(combine(&theta.weights(), &hw).norm_sqr())
}

/// Single-path gain `|theta H w|^2` through the pairwise-cosine expansion
/// `N |eta|^2 + 2 sum_{i<j} |eta|^2 cos(rho_ij)`, where `eta` is the path gain
/// seen through the BS beam and `rho_ij` the residual phase between elements
/// `i` and `j`. Slower than [`effective_gain`]; kept as an independent check.
pub fn gain_by_expansion(
    theta: &PhaseConfig,
    geom: &ArrayGeometry,
    path: &PathParams,
    bs: &ArrayGeometry,
    w: &[Complex64],
) -> f64 {
    let a_bs = steering_vector(bs, path.elev_tx, path.azim_tx);
    let eta: Complex64 = path.gain * a_bs.iter().zip(w).map(|(a, x)| a * x).sum::<Complex64>();
    let eta2 = eta.norm_sqr();
    let n = geom.len();
    let ky = 2.0 * PI / geom.wavelength * geom.d_y * path.elev_rx.sin() * path.azim_rx.sin();
    let kz = 2.0 * PI / geom.wavelength * geom.d_z * path.azim_rx.cos();
    let mut total = n as f64 * eta2;
    for i in 0..n {
        for j in i + 1..n {
            let (yi, zi) = geom.coords(i);
            let (yj, zj) = geom.coords(j);
            let rho = -(ky * (yi as f64 - yj as f64) + kz * (zi as f64 - zj as f64)) + (theta.phase(i) - theta.phase(j));
            total += 2.0 * eta2 * rho.cos();
        }
    }
    total
}

fn combine(weights: &[Complex64], h: &[Complex64]) -> Complex64 {
    weights.iter().zip(h).map(|(w, x)| w * x).sum()
}

/// A fully instantiated multi-BS world. The effective channels `H_k w_k` are
/// cached at construction.
#[derive(Debug, Clone)]
pub struct Scenario {
    channels: Vec<Channel>,
    beams: Vec<Vec<Complex64>>,
    powers: Vec<f64>,
    noise_power: f64,
    target: usize,
    dma: ArrayGeometry,
    effective: Vec<Vec<Complex64>>,
}

impl Scenario {
    pub fn new(
        channels: Vec<Channel>,
        beams: Vec<Vec<Complex64>>,
        powers: Vec<f64>,
        noise_power: f64,
        target: usize,
        dma: ArrayGeometry,
    ) -> Result<Self> {
        let k = channels.len();
        if k == 0 || beams.len() != k || powers.len() != k {
            return Err(Error::config(format!(
                "scenario needs equal non-empty channel/beam/power lists, got {}/{}/{}",
                k,
                beams.len(),
                powers.len()
            )));
        }
        if target >= k {
            return Err(Error::config(format!("target index {target} out of range for {k} BSs")));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::config("noise power must be positive"));
        }
        if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("transmit powers must be non-negative"));
        }
        for w in &beams {
            let norm: f64 = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!("beam norm {norm} is not 1")));
            }
        }
        let effective = channels
            .iter()
            .zip(&beams)
            .map(|(h, w)| {
                if h.rows() != dma.len() {
                    return Err(Error::dim("channel rows do not match the DMA element count"));
                }
                h.apply(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            channels,
            beams,
            powers,
            noise_power,
            target,
            dma,
            effective,
        })
    }

    pub fn num_bs(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn beams(&self) -> &[Vec<Complex64>] {
        &self.beams
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn dma_geometry(&self) -> &ArrayGeometry {
        &self.dma
    }

    /// `H_k w_k` for every BS.
    pub fn effective_channels(&self) -> &[Vec<Complex64>] {
        &self.effective
    }

    /// Same world with a different receiver noise power.
    pub fn with_noise_power(&self, noise_power: f64) -> Result<Self> {
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::config("noise power must be positive"));
        }
        Ok(Self {
            noise_power,
            ..self.clone()
        })
    }

    /// Sub-scenario containing only the target BS.
    pub fn target_only(&self) -> Self {
        let t = self.target;
        Self {
            channels: vec![self.channels[t].clone()],
            beams: vec![self.beams[t].clone()],
            powers: vec![self.powers[t]],
            noise_power: self.noise_power,
            target: 0,
            dma: self.dma,
            effective: vec![self.effective[t].clone()],
        }
    }

    /// Received power `|theta H_t w_t|^2 p_t` of the desired signal with the all-zero configuration.
    pub fn allzero_signal_power(&self) -> f64 {
        let h = &self.effective[self.target];
        h.iter().sum::<Complex64>().norm_sqr() * self.powers[self.target]
    }

    /// Linear SINR for pre-computed element weights.
    pub fn sinr_linear_weights(&self, weights: &[Complex64]) -> f64 {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (k, h) in self.effective.iter().enumerate() {
            let p = combine(weights, h).norm_sqr() * self.powers[k];
            if k == self.target {
                signal = p;
            } else {
                interference += p;
            }
        }
        signal / (interference + self.noise_power)
    }

    pub fn sinr_linear(&self, theta: &PhaseConfig) -> Result<f64> {
        if !theta.matches(&self.dma) {
            return Err(Error::dim(format!(
                "configuration shape {:?} does not match the {}x{} DMA",
                theta.shape(),
                self.dma.n_y,
                self.dma.n_z
            )));
        }
        Ok(self.sinr_linear_weights(&theta.weights()))
    }
}

/// Received SINR in dB. A zero signal maps to [`crate::DB_FLOOR`].
pub fn received_sinr(scenario: &Scenario, theta: &PhaseConfig) -> Result<f64> {
    scenario.sinr_linear(theta).map(to_db)
}

/// SNR of the target signal with every phase set to zero.
pub fn allzero_snr(scenario: &Scenario) -> f64 {
    to_db(scenario.allzero_signal_power() / scenario.noise_power())
}

fn default_dma() -> ArraySpec {
    ArraySpec {
        n_y: 4,
        n_z: 4,
        spacing_wavelengths: 0.5,
    }
}

fn default_bs_array() -> ArraySpec {
    ArraySpec {
        n_y: 8,
        n_z: 1,
        spacing_wavelengths: 0.5,
    }
}

/// Array dimensions with spacing expressed in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    pub n_y: usize,
    pub n_z: usize,
    pub spacing_wavelengths: f64,
}

impl ArraySpec {
    pub fn geometry(&self, wavelength: f64) -> Result<ArrayGeometry> {
        let d = self.spacing_wavelengths * wavelength;
        ArrayGeometry::new(self.n_y, self.n_z, d, d, wavelength)
    }
}

/// Parameters of the random multi-BS world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dma: ArraySpec,
    pub bs_array: ArraySpec,
    pub bs_beams: usize,
    pub carrier_hz: f64,
    /// Horizontal distance range of the target BS (m).
    pub target_distance: [f64; 2],
    /// Horizontal distance range of the interfering BSs (m).
    pub interferer_distance: [f64; 2],
    pub interferers: usize,
    /// Azimuth range (radians) BSs are drawn from.
    pub azimuth_range: [f64; 2],
    pub bs_height: f64,
    pub relay_height: f64,
    pub target_power: f64,
    pub interferer_power: f64,
    /// Explicit noise power; when absent it is derived from `allzero_snr_db`
    /// against [`ScenarioConfig::reference_signal_power`].
    pub noise_power: Option<f64>,
    pub allzero_snr_db: f64,
    /// Extra non-line-of-sight paths per BS.
    pub nlos_paths: usize,
    /// LoS-to-NLoS power ratio (dB) when `nlos_paths > 0`.
    pub rician_k_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dma: default_dma(),
            bs_array: default_bs_array(),
            bs_beams: 8,
            carrier_hz: 2.6e9,
            target_distance: [100.0, 300.0],
            interferer_distance: [300.0, 900.0],
            interferers: 4,
            azimuth_range: [-PI, PI],
            bs_height: 25.0,
            relay_height: 1.5,
            target_power: 1.0,
            interferer_power: 1.0,
            noise_power: None,
            allzero_snr_db: 20.0,
            nlos_paths: 0,
            rician_k_db: 10.0,
        }
    }
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn dma_geometry(&self) -> Result<ArrayGeometry> {
        self.dma.geometry(self.wavelength())
    }

    pub fn bs_geometry(&self) -> Result<ArrayGeometry> {
        self.bs_array.geometry(self.wavelength())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::config("carrier frequency must be positive"));
        }
        self.dma_geometry()?;
        self.bs_geometry()?;
        if self.bs_beams == 0 {
            return Err(Error::config("BS codebook needs at least one beam"));
        }
        for (name, [lo, hi]) in [
            ("target_distance", self.target_distance),
            ("interferer_distance", self.interferer_distance),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
                return Err(Error::config(format!("invalid {name} range [{lo}, {hi}]")));
            }
        }
        let [a0, a1] = self.azimuth_range;
        if !(a0.is_finite() && a1.is_finite()) || a0 > a1 {
            return Err(Error::config("invalid azimuth range"));
        }
        if self.bs_height < 0.0 || self.relay_height < 0.0 {
            return Err(Error::config("heights must be non-negative"));
        }
        if self.target_power < 0.0 || self.interferer_power < 0.0 {
            return Err(Error::config("transmit powers must be non-negative"));
        }
        if let Some(n) = self.noise_power {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::config("noise power must be positive"));
            }
        }
        Ok(())
    }

    /// Nominal all-zero signal power used to label noise levels:
    /// free-space gain at the midpoint of the target distance range times the
    /// incoherent DMA gain `N` and the full BS beam gain `M`.
    pub fn reference_signal_power(&self) -> f64 {
        let [lo, hi] = self.target_distance;
        let dz = self.bs_height - self.relay_height;
        let d = (((lo + hi) / 2.0).powi(2) + dz * dz).sqrt();
        let beta = self.wavelength() / (4.0 * PI * d);
        self.target_power * beta * beta * (self.dma.n_y * self.dma.n_z * self.bs_array.n_y * self.bs_array.n_z) as f64
    }

    /// Noise power whose nominal all-zero SNR equals `snr_db`.
    pub fn noise_for_allzero_snr(&self, snr_db: f64) -> f64 {
        self.reference_signal_power() / crate::from_db(snr_db)
    }

    pub fn resolved_noise_power(&self) -> f64 {
        self.noise_power
            .unwrap_or_else(|| self.noise_for_allzero_snr(self.allzero_snr_db))
    }
}

/// Elevation (from the vertical axis) and azimuth of direction `v`.
fn direction_angles(v: [f64; 3]) -> (f64, f64) {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let elev = (v[2] / norm).clamp(-1.0, 1.0).acos();
    let azim = v[1].atan2(v[0]);
    (elev, azim)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Paths from a BS at horizontal distance `dist` and azimuth `azim` to the relay.
fn bs_paths<R: Rng + ?Sized>(config: &ScenarioConfig, dist: f64, azim: f64, rng: &mut R) -> Vec<PathParams> {
    let dz = config.bs_height - config.relay_height;
    let to_bs = [dist * azim.cos(), dist * azim.sin(), dz];
    let to_relay = [-to_bs[0], -to_bs[1], -to_bs[2]];
    let d3 = (dist * dist + dz * dz).sqrt();
    let los_amp = config.wavelength() / (4.0 * PI * d3.max(f64::MIN_POSITIVE));
    let (elev_rx, azim_rx) = direction_angles(to_bs);
    let (elev_tx, azim_tx) = direction_angles(to_relay);

    let (los_power, nlos_power) = if config.nlos_paths == 0 {
        (los_amp * los_amp, 0.0)
    } else {
        let k = crate::from_db(config.rician_k_db);
        let total = los_amp * los_amp;
        (total * k / (k + 1.0), total / (k + 1.0))
    };

    let mut paths = vec![PathParams {
        gain: Complex64::from_polar(los_power.sqrt(), rng.random_range(0.0..2.0 * PI)),
        elev_rx,
        azim_rx,
        elev_tx,
        azim_tx,
    }];
    for _ in 0..config.nlos_paths {
        paths.push(PathParams {
            gain: complex_gaussian(rng, nlos_power / config.nlos_paths as f64),
            elev_rx: rng.random_range(0.0..PI),
            azim_rx: rng.random_range(-PI..PI),
            elev_tx: rng.random_range(0.0..PI),
            azim_tx: rng.random_range(-PI..PI),
        });
    }
    paths
}

/// Draws a random world: the target BS (index 0) in its distance annulus and
/// `interferers` BSs in theirs, each with a uniform random azimuth. Each BS
/// picks the codebook beam delivering the most power to the relay.
pub fn generate_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    config.validate()?;
    let dma = config.dma_geometry()?;
    let bs = config.bs_geometry()?;
    let codebook = dft_codebook(&bs, config.bs_beams);

    let k = 1 + config.interferers;
    let mut channels = Vec::with_capacity(k);
    let mut beams = Vec::with_capacity(k);
    let mut powers = Vec::with_capacity(k);
    for i in 0..k {
        let (range, power) = if i == 0 {
            (config.target_distance, config.target_power)
        } else {
            (config.interferer_distance, config.interferer_power)
        };
        let dist = uniform(rng, range);
        let azim = uniform(rng, config.azimuth_range);
        let paths = bs_paths(config, dist, azim, rng);
        let h = build_channel(&paths, &dma, &bs)?;
        beams.push(select_bs_beam(&codebook, &h)?);
        channels.push(h);
        powers.push(power);
    }
    Scenario::new(channels, beams, powers, config.resolved_noise_power(), 0, dma)
}
