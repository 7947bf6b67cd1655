//! Network and channel model: tier parameters, PPP sampling, blockage, the
//! sectorial antenna pattern and single-snapshot SINR draws.

use crate::error::{invalid, Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use std::f64::consts::PI;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thermal noise at 290 K plus a 10 dB receiver noise figure.
pub fn default_noise_watts(bandwidth_hz: f64) -> f64 {
    dbm_to_watts(-174.0 + 10.0 * bandwidth_hz.log10() + 10.0)
}

/// Radio and geometry parameters of both tiers, in linear SI units.
///
/// A density of zero marks a tier as not deployed; its reliability is zero
/// and strategies that depend on it are dropped from the strategy table.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub lambda_mu: f64,
    pub lambda_m: f64,
    pub lambda_h: f64,
    pub p_mu: f64,
    pub p_m: f64,
    pub b_mu: f64,
    pub b_m: f64,
    pub alpha_mu: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub n_los: u32,
    pub n_nlos: u32,
    pub kappa: f64,
    pub theta: f64,
    pub gain_main: f64,
    pub gain_side: f64,
    pub sigma2_mu: f64,
    pub sigma2_m: f64,
    /// Half-width of the simulated square. `None` scales it with each tier's density.
    pub region_half_width: Option<f64>,
    /// Only LOS mmWave links can deliver; an NLOS serving link counts as an outage.
    pub los_only: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            lambda_mu: 1e-5,
            lambda_m: 3e-5,
            lambda_h: 1e-4,
            p_mu: dbm_to_watts(30.0),
            p_m: dbm_to_watts(30.0),
            b_mu: 100e6,
            b_m: 500e6,
            alpha_mu: 4.0,
            alpha_los: 2.5,
            alpha_nlos: 4.0,
            n_los: 3,
            n_nlos: 2,
            kappa: 6e-4,
            theta: PI / 6.0,
            gain_main: db_to_linear(10.0),
            gain_side: db_to_linear(-10.0),
            sigma2_mu: default_noise_watts(100e6),
            sigma2_m: default_noise_watts(500e6),
            region_half_width: None,
            los_only: false,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_mu", self.lambda_mu), ("lambda_m", self.lambda_m)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if self.lambda_mu == 0.0 && self.lambda_m == 0.0 {
            return Err(invalid("lambda_mu", "at least one tier must be deployed"));
        }
        positive("lambda_h", self.lambda_h)?;
        positive("p_mu", self.p_mu)?;
        positive("p_m", self.p_m)?;
        positive("b_mu", self.b_mu)?;
        positive("b_m", self.b_m)?;
        positive("sigma2_mu", self.sigma2_mu)?;
        positive("sigma2_m", self.sigma2_m)?;
        for (name, a) in [
            ("alpha_mu", self.alpha_mu),
            ("alpha_los", self.alpha_los),
            ("alpha_nlos", self.alpha_nlos),
        ] {
            if !(a > 2.0 && a.is_finite()) {
                return Err(invalid(name, format!("path-loss exponent must exceed 2, got {a}")));
            }
        }
        if self.n_los == 0 {
            return Err(invalid("n_los", "Nakagami shape must be at least 1"));
        }
        if self.n_nlos == 0 {
            return Err(invalid("n_nlos", "Nakagami shape must be at least 1"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be non-negative, got {}", self.kappa)));
        }
        if !(self.theta > 0.0 && self.theta < 2.0 * PI) {
            return Err(invalid("theta", "beamwidth must lie in (0, 2π)"));
        }
        positive("gain_side", self.gain_side)?;
        if !(self.gain_main > self.gain_side && self.gain_main.is_finite()) {
            return Err(invalid("gain_main", "mainlobe gain must exceed the sidelobe gain"));
        }
        if let Some(w) = self.region_half_width {
            positive("region_half_width", w)?;
        }
        Ok(())
    }

    pub fn has_sub6(&self) -> bool {
        self.lambda_mu > 0.0
    }

    pub fn has_mmwave(&self) -> bool {
        self.lambda_m > 0.0
    }

    /// Simulation half-width for a tier of the given density.
    pub fn half_width(&self, density: f64) -> f64 {
        self.region_half_width
            .unwrap_or_else(|| (20.0 / (PI * density).sqrt()).max(500.0))
    }

    pub fn gain_pattern(&self) -> GainPattern {
        gain_pattern(self.theta, self.gain_main, self.gain_side)
    }

    pub fn state(&self, s: LinkState) -> StateParams {
        match s {
            LinkState::Los => StateParams { alpha: self.alpha_los, shape: self.n_los },
            LinkState::Nlos => StateParams { alpha: self.alpha_nlos, shape: self.n_nlos },
        }
    }
}

/// Radio tier of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Sub6,
    Mmwave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];
}

/// Path-loss exponent and Nakagami shape of one mmWave link state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParams {
    pub alpha: f64,
    pub shape: u32,
}

/// Probability that a mmWave link of length `r` is LOS.
pub fn los_probability(r: f64, kappa: f64) -> f64 {
    (-kappa * r).exp()
}

pub fn state_probability(state: LinkState, r: f64, kappa: f64) -> f64 {
    match state {
        LinkState::Los => los_probability(r, kappa),
        LinkState::Nlos => -(-kappa * r).exp_m1(),
    }
}

/// The three (gain, probability) pairs of the random interferer antenna gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPattern {
    pub entries: [(f64, f64); 3],
}

impl GainPattern {
    /// Entries with non-zero probability.
    pub fn effective(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().copied().filter(|e| e.1 > 0.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let [(g0, p0), (g1, p1), (g2, _)] = self.entries;
        if u < p0 {
            g0
        } else if u < p0 + p1 {
            g1
        } else {
            g2
        }
    }
}

pub fn gain_pattern(theta: f64, gain_main: f64, gain_side: f64) -> GainPattern {
    let a = theta / (2.0 * PI);
    let b = 1.0 - a;
    GainPattern {
        entries: [
            (gain_main * gain_main, a * a),
            (gain_main * gain_side, 2.0 * a * b),
            (gain_side * gain_side, b * b),
        ],
    }
}

/// Homogeneous PPP on the square `[−w, w]²`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, half_width: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = density * 4.0 * half_width * half_width;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(0.0) as usize;
    (0..n)
        .map(|_| {
            [
                rng.random_range(-half_width..half_width),
                rng.random_range(-half_width..half_width),
            ]
        })
        .collect()
}

const MAX_EMPTY_DRAWS: usize = 100;

// Distances from the origin of one non-empty PPP realization.
fn sample_distances<R: Rng + ?Sized>(density: f64, half_width: f64, rng: &mut R) -> Result<Vec<f64>> {
    for _ in 0..MAX_EMPTY_DRAWS {
        let pts = sample_ppp(density, half_width, rng);
        if !pts.is_empty() {
            return Ok(pts.iter().map(|p| p[0].hypot(p[1])).collect());
        }
    }
    Err(Error::EmptyRegion { attempts: MAX_EMPTY_DRAWS })
}

fn nearest_first(d: &mut [f64]) {
    let i = d
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    d.swap(0, i);
}

/// One link in a snapshot: distance, power fade, antenna gain and blockage state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub distance: f64,
    pub fade: f64,
    pub gain: f64,
    pub state: LinkState,
}

impl Link {
    pub fn new(distance: f64, fade: f64) -> Self {
        Link { distance, fade, gain: 1.0, state: LinkState::Los }
    }
}

/// Sub-6 GHz SINR for a given serving link and interferer set.
pub fn sinr_sub6(cfg: &NetworkConfig, serving: &Link, interferers: &[Link]) -> f64 {
    let rx = |l: &Link| cfg.p_mu * l.fade * l.distance.powf(-cfg.alpha_mu);
    let interference: f64 = interferers.iter().map(rx).sum();
    rx(serving) / (interference + cfg.sigma2_mu)
}

/// mmWave SINR; gains and states are taken from the links themselves.
pub fn sinr_mmwave(cfg: &NetworkConfig, serving: &Link, interferers: &[Link]) -> f64 {
    let rx = |l: &Link| cfg.p_m * l.gain * l.fade * l.distance.powf(-cfg.state(l.state).alpha);
    let interference: f64 = interferers.iter().map(rx).sum();
    rx(serving) / (interference + cfg.sigma2_m)
}

/// Draws one sub-6 GHz snapshot and returns the SINR at the origin.
pub fn draw_sinr_sub6<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<f64> {
    let mut d = sample_distances(cfg.lambda_mu, cfg.half_width(cfg.lambda_mu), rng)?;
    nearest_first(&mut d);
    let mut interference = 0.0;
    for &t in &d[1..] {
        let h: f64 = Exp1.sample(rng);
        interference += cfg.p_mu * h * t.powf(-cfg.alpha_mu);
    }
    let h: f64 = Exp1.sample(rng);
    let signal = cfg.p_mu * h * d[0].powf(-cfg.alpha_mu);
    Ok(signal / (interference + cfg.sigma2_mu))
}

/// Unit-mean Gamma fades for both link states.
struct Fades {
    los: Gamma<f64>,
    nlos: Gamma<f64>,
}

impl Fades {
    fn new(cfg: &NetworkConfig) -> Self {
        let g = |n: u32| Gamma::new(n as f64, 1.0 / n as f64).expect("positive shape");
        Fades { los: g(cfg.n_los), nlos: g(cfg.n_nlos) }
    }

    fn sample<R: Rng + ?Sized>(&self, s: LinkState, rng: &mut R) -> f64 {
        match s {
            LinkState::Los => self.los.sample(rng),
            LinkState::Nlos => self.nlos.sample(rng),
        }
    }
}

fn draw_state<R: Rng + ?Sized>(r: f64, kappa: f64, rng: &mut R) -> LinkState {
    if rng.random::<f64>() < los_probability(r, kappa) {
        LinkState::Los
    } else {
        LinkState::Nlos
    }
}

fn mmwave_interference<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    distances: &[f64],
    fades: &Fades,
    pattern: &GainPattern,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for &t in distances {
        let state = draw_state(t, cfg.kappa, rng);
        let gain = pattern.sample(rng);
        let h = fades.sample(state, rng);
        total += cfg.p_m * gain * h * t.powf(-cfg.state(state).alpha);
    }
    total
}

/// Draws one mmWave snapshot and returns the SINR at the origin.
///
/// With `los_only` set, an NLOS serving link yields zero SINR.
pub fn draw_sinr_mmwave<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<f64> {
    let mut d = sample_distances(cfg.lambda_m, cfg.half_width(cfg.lambda_m), rng)?;
    nearest_first(&mut d);
    let fades = Fades::new(cfg);
    let pattern = cfg.gain_pattern();
    let interference = mmwave_interference(cfg, &d[1..], &fades, &pattern, rng);
    let r = d[0];
    let state = draw_state(r, cfg.kappa, rng);
    let h = fades.sample(state, rng);
    if cfg.los_only && state == LinkState::Nlos {
        return Ok(0.0);
    }
    let signal = cfg.p_m * cfg.gain_main * cfg.gain_main * h * r.powf(-cfg.state(state).alpha);
    Ok(signal / (interference + cfg.sigma2_m))
}

/// Aggregate mmWave interference at the origin from BSs farther than `r`.
pub fn draw_interference_mmwave<R: Rng + ?Sized>(cfg: &NetworkConfig, r: f64, rng: &mut R) -> f64 {
    let w = cfg.half_width(cfg.lambda_m).max(r * 20.0);
    let d: Vec<f64> = sample_ppp(cfg.lambda_m, w, rng)
        .iter()
        .map(|p| p[0].hypot(p[1]))
        .filter(|&t| t > r)
        .collect();
    mmwave_interference(cfg, &d, &Fades::new(cfg), &cfg.gain_pattern(), rng)
}
