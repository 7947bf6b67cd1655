//! Monte Carlo estimators used as ground truth for the closed forms.
//!
//! Trial `i` draws from its own ChaCha stream (`seed`, stream `i`), so an
//! estimate does not depend on how trials are spread over threads.

use crate::error::{invalid, Result};
use crate::netmodel::{draw_interference_mmwave, draw_sinr_mmwave, draw_sinr_sub6, NetworkConfig};
pub use crate::netmodel::Tier;
use crate::reliability::DeliveryCase;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const MIN_TRIALS: usize = 1000;
const MIN_RATE: f64 = 1e-9;

/// Sample mean with a normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        McEstimate {
            mean,
            half_width_95: 1.959_963_984_540_054 * (var / n).sqrt(),
            trials: samples.len(),
            seed,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        (v - self.mean).abs() <= self.half_width_95
    }
}

/// Random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(invalid("trials", format!("at least {MIN_TRIALS} trials are required")));
    }
    Ok(())
}

// Runs `f` on every trial index; samples are summed in index order.
fn run<F>(trials: usize, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| f(&mut trial_rng(seed, i)))
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, seed))
}

fn rate(bandwidth: f64, sinr: f64) -> f64 {
    (bandwidth * sinr.ln_1p() / std::f64::consts::LN_2).max(MIN_RATE)
}

fn draw_rate(tier: Tier, cfg: &NetworkConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    Ok(match tier {
        Tier::Sub6 => rate(cfg.b_mu, draw_sinr_sub6(cfg, rng)?),
        Tier::Mmwave => rate(cfg.b_m, draw_sinr_mmwave(cfg, rng)?),
    })
}

/// Fraction of snapshots whose rate exceeds `D/T`.
pub fn mc_reliability(
    tier: Tier,
    case: DeliveryCase,
    cfg: &NetworkConfig,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    cfg.validate()?;
    if case.latency_budget <= 0.0 {
        return Ok(McEstimate { mean: 0.0, half_width_95: 0.0, trials, seed });
    }
    let need = case.data_size / case.latency_budget;
    run(trials, seed, |rng| {
        let r = draw_rate(tier, cfg, rng)?;
        Ok(if r > need && r > MIN_RATE { 1.0 } else { 0.0 })
    })
}

/// Fraction of paired snapshots where mmWave delivers first, i.e.
/// `D^m/R^m < D^μ/R^μ − τ₀`. Ties go to sub-6 GHz.
pub fn mc_link_select(
    case_mu: DeliveryCase,
    case_m: DeliveryCase,
    tau0: f64,
    cfg: &NetworkConfig,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    cfg.validate()?;
    run(trials, seed, |rng| {
        let r_mu = draw_rate(Tier::Sub6, cfg, rng)?;
        let r_m = draw_rate(Tier::Mmwave, cfg, rng)?;
        if r_m <= MIN_RATE {
            return Ok(0.0);
        }
        let t_mu = if r_mu <= MIN_RATE { f64::INFINITY } else { case_mu.data_size / r_mu };
        let t_m = case_m.data_size / r_m;
        Ok(if t_m < t_mu - tau0 { 1.0 } else { 0.0 })
    })
}

/// Empirical `E[e^{−sI}]` of mmWave interference from BSs beyond `r`.
pub fn mc_laplace_mmwave(r: f64, s: f64, cfg: &NetworkConfig, trials: usize, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    cfg.validate()?;
    run(trials, seed, |rng| Ok((-s * draw_interference_mmwave(cfg, r, rng)).exp()))
}
