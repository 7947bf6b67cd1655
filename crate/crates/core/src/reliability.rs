//! Closed-form delivery reliability for the sub-6 GHz and mmWave tiers, their
//! dual-connectivity combination, and the mmWave link-selection probability.
//!
//! Serving-distance integrals use Gauss–Laguerre quadrature after the change of
//! variables `u = πλr²`, which turns the nearest-BS density into `e^{−u}`.

use crate::netmodel::{state_probability, LinkState, NetworkConfig};
use crate::specfun::{hyp_h, integrate_adaptive, QuadratureRule};
use rayon::prelude::*;
use std::f64::consts::{LN_2, PI};

/// A payload and the time left for transmitting it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryCase {
    /// Bits to deliver.
    pub data_size: f64,
    /// Seconds available for transmission; non-positive budgets are infeasible.
    pub latency_budget: f64,
}

impl DeliveryCase {
    pub fn new(data_size: f64, latency_budget: f64) -> Self {
        DeliveryCase { data_size, latency_budget }
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct ReliabilityValue(f64);

impl ReliabilityValue {
    pub const ZERO: ReliabilityValue = ReliabilityValue(0.0);
    pub const ONE: ReliabilityValue = ReliabilityValue(1.0);

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn new(v: f64) -> Self {
        if v.is_nan() {
            ReliabilityValue(0.0)
        } else {
            ReliabilityValue(v.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// SINR threshold `2^{D/(T·B)} − 1`; `+∞` when the budget is not positive.
pub fn sinr_threshold(case: DeliveryCase, bandwidth: f64) -> f64 {
    threshold(case.data_size, case.latency_budget, bandwidth)
}

fn threshold(data: f64, budget: f64, bandwidth: f64) -> f64 {
    if budget <= 0.0 {
        return f64::INFINITY;
    }
    (data / (budget * bandwidth) * LN_2).exp_m1()
}

/// Laplace transform `E[e^{−sI}]` of sub-6 GHz interference from BSs beyond `r`
/// under Rayleigh fading.
pub fn laplace_interference_sub6(r: f64, s: f64, cfg: &NetworkConfig) -> f64 {
    if s == 0.0 || !cfg.has_sub6() {
        return 1.0;
    }
    let x = s * cfg.p_mu * r.powf(-cfg.alpha_mu);
    (-PI * cfg.lambda_mu * r * r * sub6_interference_factor(x, cfg)).exp()
}

// 2x/(α−2) · H_{1−2/α}(x): interference exponent per unit πλr² at normalized argument x
fn sub6_interference_factor(x: f64, cfg: &NetworkConfig) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let delta = 2.0 / cfg.alpha_mu;
    2.0 * x / (cfg.alpha_mu - 2.0) * hyp_h(1.0 - delta, x).expect("valid exponent")
}

/// Sub-6 GHz success probability `P[SINR > ν]`.
pub fn rel_sub6_at(nu: f64, cfg: &NetworkConfig, rule: &QuadratureRule) -> f64 {
    if !cfg.has_sub6() || nu.is_infinite() || nu.is_nan() {
        return 0.0;
    }
    if nu <= 0.0 {
        return 1.0;
    }
    let rho = sub6_interference_factor(nu, cfg);
    let scale = PI * cfg.lambda_mu * (1.0 + rho);
    let noise = nu * cfg.sigma2_mu / cfg.p_mu;
    let half_alpha = cfg.alpha_mu / 2.0;
    let sum = rule.integrate(|u| (-noise * (u / scale).powf(half_alpha)).exp());
    ReliabilityValue::new(sum / (1.0 + rho)).value()
}

pub fn rel_sub6(case: DeliveryCase, cfg: &NetworkConfig, rule: &QuadratureRule) -> ReliabilityValue {
    ReliabilityValue::new(rel_sub6_at(sinr_threshold(case, cfg.b_mu), cfg, rule))
}

// ∫_r^∞ ρ_n(t) (1 − (1 + a t^{−α}/N)^{−N}) t dt, with t = r v^{−1/(α−2)}
fn interference_integral(cfg: &NetworkConfig, state: LinkState, r: f64, a: f64, tol_scale: f64) -> f64 {
    if state == LinkState::Nlos && cfg.kappa == 0.0 {
        return 0.0;
    }
    let sp = cfg.state(state);
    let n = sp.shape as f64;
    let e = 1.0 / (sp.alpha - 2.0);
    let p = sp.alpha * e;
    let b = a * r.powf(-sp.alpha) / n;
    let pre = r * r * e;
    let f = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let w = v.powf(p);
        let x = b * w;
        let bracket = if x < 1e-8 {
            n * b * (1.0 - 0.5 * (n + 1.0) * x)
        } else {
            -(-n * x.ln_1p()).exp_m1() / w
        };
        state_probability(state, r * v.powf(-e), cfg.kappa) * bracket
    };
    pre * integrate_adaptive(f, 0.0, 1.0, 1e-13 / (pre * tol_scale), 1e-8, 400).value
}

/// Laplace transform `E[e^{−sI}]` of mmWave interference from BSs beyond `r`,
/// with per-link LOS/NLOS thinning, Nakagami fading and random sector gains.
pub fn laplace_interference_mmwave(r: f64, s: f64, cfg: &NetworkConfig) -> f64 {
    if s == 0.0 || !cfg.has_mmwave() {
        return 1.0;
    }
    let mut exponent = 0.0;
    for (g, pg) in cfg.gain_pattern().effective() {
        let k = 2.0 * PI * cfg.lambda_m * pg;
        for state in LinkState::BOTH {
            exponent += k * interference_integral(cfg, state, r, s * cfg.p_m * g, k);
        }
    }
    (-exponent).exp()
}

fn binomial(n: u32, k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// Alzer constant `η = N (N!)^{−1/N}`.
pub fn alzer_eta(n: u32) -> f64 {
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    n as f64 * fact.powf(-1.0 / n as f64)
}

// Success probability conditioned on serving distance r.
fn mmwave_conditional(nu: f64, r: f64, cfg: &NetworkConfig) -> f64 {
    let m2 = cfg.gain_main * cfg.gain_main;
    let mut total = 0.0;
    for state in LinkState::BOTH {
        if cfg.los_only && state == LinkState::Nlos {
            continue;
        }
        let weight = state_probability(state, r, cfg.kappa);
        if weight == 0.0 {
            continue;
        }
        let sp = cfg.state(state);
        let eta = alzer_eta(sp.shape);
        let base = eta * nu * r.powf(sp.alpha) / (cfg.p_m * m2);
        let mut inner = 0.0;
        for k in 1..=sp.shape {
            let s = k as f64 * base;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            inner += sign
                * binomial(sp.shape, k)
                * (-s * cfg.sigma2_m).exp()
                * laplace_interference_mmwave(r, s, cfg);
        }
        total += weight * inner;
    }
    total
}

/// mmWave success probability `P[SINR > ν]` under the Alzer approximation.
pub fn rel_mmwave_at(nu: f64, cfg: &NetworkConfig, rule: &QuadratureRule) -> f64 {
    if !cfg.has_mmwave() || nu.is_infinite() || nu.is_nan() {
        return 0.0;
    }
    if nu <= 0.0 && !cfg.los_only {
        return 1.0;
    }
    let nu = nu.max(0.0);
    let c = PI * cfg.lambda_m;
    let sum = rule.integrate(|u| mmwave_conditional(nu, (u / c).sqrt(), cfg));
    ReliabilityValue::new(sum).value()
}

pub fn rel_mmwave(case: DeliveryCase, cfg: &NetworkConfig, rule: &QuadratureRule) -> ReliabilityValue {
    ReliabilityValue::new(rel_mmwave_at(sinr_threshold(case, cfg.b_m), cfg, rule))
}

/// Probability that at least one of two independent links succeeds.
pub fn rel_dc(r_mu: ReliabilityValue, r_m: ReliabilityValue) -> ReliabilityValue {
    let (a, b) = (r_mu.value(), r_m.value());
    ReliabilityValue::new(a + b - a * b)
}

/// `rel_mmwave_at` as a function of `ln ν`, tabulated on a uniform grid and
/// interpolated with a natural cubic spline; values outside the grid are
/// computed directly.
#[derive(Debug, Clone)]
pub struct MmwaveCurve {
    x0: f64,
    step: f64,
    y: Vec<f64>,
    m: Vec<f64>,
    cfg: NetworkConfig,
    rule: QuadratureRule,
}

impl MmwaveCurve {
    pub const LN_NU_MIN: f64 = -18.420_680_743_952_367; // ln 1e-8
    pub const LN_NU_MAX: f64 = 32.236_191_301_916_64; // ln 1e14
    pub const POINTS: usize = 401;

    pub fn new(cfg: &NetworkConfig, rule: &QuadratureRule) -> Self {
        let n = Self::POINTS;
        let step = (Self::LN_NU_MAX - Self::LN_NU_MIN) / (n - 1) as f64;
        let y: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| rel_mmwave_at((Self::LN_NU_MIN + i as f64 * step).exp(), cfg, rule))
            .collect();
        // natural spline: m[i-1] + 4 m[i] + m[i+1] = 6 Δ²y / h², m[0] = m[n-1] = 0
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (step * step);
            let denom = 4.0 - c[i - 1];
            c[i] = 1.0 / denom;
            d[i] = (rhs - d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        MmwaveCurve { x0: Self::LN_NU_MIN, step, y, m, cfg: cfg.clone(), rule: rule.clone() }
    }

    pub fn eval(&self, nu: f64) -> f64 {
        if !(nu > 0.0) || nu.is_infinite() {
            return rel_mmwave_at(nu, &self.cfg, &self.rule);
        }
        let x = nu.ln();
        let pos = (x - self.x0) / self.step;
        if pos >= (self.y.len() - 1) as f64 && self.y[self.y.len() - 1] == 0.0 {
            // non-increasing in ν
            return 0.0;
        }
        if pos < 0.0 || pos >= (self.y.len() - 1) as f64 {
            return rel_mmwave_at(nu, &self.cfg, &self.rule);
        }
        let i = pos as usize;
        let b = pos - i as f64;
        let a = 1.0 - b;
        let h2 = self.step * self.step / 6.0;
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2;
        v.clamp(0.0, 1.0)
    }
}

/// Evaluates the mmWave selection probability `A^m` for many strategy pairs
/// under one configuration.
#[derive(Debug, Clone)]
pub struct LinkSelector {
    cfg: NetworkConfig,
    rule: QuadratureRule,
    curve: Option<MmwaveCurve>,
}

const SIMPSON_INTERVALS: usize = 600;

impl LinkSelector {
    pub fn new(cfg: &NetworkConfig, rule: &QuadratureRule) -> Self {
        let curve = (cfg.has_mmwave() && cfg.has_sub6()).then(|| MmwaveCurve::new(cfg, rule));
        LinkSelector { cfg: cfg.clone(), rule: rule.clone(), curve }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `A^m = ∫ p_μ(t) R^m(D^m, (t − τ₀)⁺) dt`, where `p_μ` is the density of
    /// the sub-6 GHz transmission delay for a payload of `d_mu` bits.
    pub fn prob_mmwave(&self, d_mu: f64, d_m: f64, tau0: f64) -> f64 {
        let Some(curve) = &self.curve else {
            return if self.cfg.has_mmwave() { 1.0 } else { 0.0 };
        };
        let cfg = &self.cfg;
        let rmu = |t: f64| rel_sub6_at(threshold(d_mu, t, cfg.b_mu), cfg, &self.rule);
        let rm = |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                curve.eval(threshold(d_m, t, cfg.b_m))
            }
        };

        let target = 1.0 - 1e-4;
        let mut hi = d_mu / cfg.b_mu;
        let mut lo = hi;
        for _ in 0..200 {
            if rmu(hi) >= target {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if lo == hi {
            lo = hi / 2.0;
            while rmu(lo) >= target && lo > 1e-12 {
                hi = lo;
                lo /= 2.0;
            }
        }
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            if rmu(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t_max = hi;
        let mut t_min = t_max;
        while rmu(t_min) > 1e-14 && t_min > 1e-12 {
            t_min /= 2.0;
        }

        let (y0, y1) = (t_min.ln(), t_max.ln());
        let hy = (y1 - y0) / SIMPSON_INTERVALS as f64;
        let mut acc = 0.0;
        for i in 0..=SIMPSON_INTERVALS {
            let t = (y0 + i as f64 * hy).exp();
            let h = t / 2000.0;
            let density = (rmu(t + h) - rmu(t - h)) / (2.0 * h);
            let w = if i == 0 || i == SIMPSON_INTERVALS {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * density * t * rm(t - tau0);
        }
        let a = acc * hy / 3.0 + (1.0 - rmu(t_max)) * rm(t_max - tau0);
        ReliabilityValue::new(a).value()
    }
}

/// `A^m` for one pair of payloads; `A^μ = 1 − A^m`.
///
/// Only the payload sizes of the two cases matter.
pub fn link_select_prob_mmwave(
    case_mu: DeliveryCase,
    case_m: DeliveryCase,
    tau0: f64,
    cfg: &NetworkConfig,
    rule: &QuadratureRule,
) -> f64 {
    LinkSelector::new(cfg, rule).prob_mmwave(case_mu.data_size, case_m.data_size, tau0)
}
