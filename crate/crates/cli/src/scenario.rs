//! Scenario files: flat `key = value` lines, `#` comments, dotted keys.
//!
//! Values use the units of the parameter table (dBm, dB, MHz, degrees, Mb,
//! ms) and are converted to SI when the scenario is built. Omitted keys keep
//! their defaults.

use dcvr_core::error::Error as CoreError;
use dcvr_core::netmodel::{db_to_linear, dbm_to_watts, default_noise_watts, NetworkConfig};
use dcvr_core::strategy::{zipf_popularity, Devices, ResourceBudget, ViewpointCatalog};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real,
    Count,
    Flag,
}

/// A scenario key, its unit as written in files, and its value type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key {
    pub name: &'static str,
    pub unit: &'static str,
    kind: Kind,
}

const fn key(name: &'static str, unit: &'static str, kind: Kind) -> Key {
    Key { name, unit, kind }
}

pub const KEYS: &[Key] = &[
    key("network.lambda_mu", "nodes/m^2", Kind::Real),
    key("network.lambda_m", "nodes/m^2", Kind::Real),
    key("network.lambda_h", "nodes/m^2", Kind::Real),
    key("network.p_mu", "dBm", Kind::Real),
    key("network.p_m", "dBm", Kind::Real),
    key("network.b_mu", "MHz", Kind::Real),
    key("network.b_m", "MHz", Kind::Real),
    key("network.alpha_mu", "", Kind::Real),
    key("network.alpha_los", "", Kind::Real),
    key("network.alpha_nlos", "", Kind::Real),
    key("network.n_los", "", Kind::Count),
    key("network.n_nlos", "", Kind::Count),
    key("network.kappa", "1/m", Kind::Real),
    key("network.theta", "deg", Kind::Real),
    key("network.gain_main", "dB", Kind::Real),
    key("network.gain_side", "dB", Kind::Real),
    key("network.noise_mu", "dBm", Kind::Real),
    key("network.noise_m", "dBm", Kind::Real),
    key("network.region_half_width", "m", Kind::Real),
    key("network.los_only", "", Kind::Flag),
    key("catalog.count", "", Kind::Count),
    key("catalog.mv_size", "Mb", Kind::Real),
    key("catalog.sv_size", "Mb", Kind::Real),
    key("catalog.skew", "", Kind::Real),
    key("catalog.threshold", "ms", Kind::Real),
    key("catalog.sensor_delay", "ms", Kind::Real),
    key("catalog.display_delay", "ms", Kind::Real),
    key("budget.cache_hmd", "Mb", Kind::Real),
    key("budget.cache_mu", "Mb", Kind::Real),
    key("budget.cache_mm", "Mb", Kind::Real),
    key("budget.energy_hmd", "J", Kind::Real),
    key("budget.energy_mu", "J", Kind::Real),
    key("budget.energy_mm", "J", Kind::Real),
    key("budget.cpu_hmd", "cycles/s", Kind::Real),
    key("budget.cpu_mu", "cycles/s", Kind::Real),
    key("budget.cpu_mm", "cycles/s", Kind::Real),
    key("budget.eta_hmd", "", Kind::Real),
    key("budget.eta_mu", "", Kind::Real),
    key("budget.eta_mm", "", Kind::Real),
    key("budget.cycles_per_bit", "cycles/bit", Kind::Real),
    key("budget.backhaul_delay", "ms", Kind::Real),
    key("budget.backhaul_capacity", "Mb", Kind::Real),
    key("quadrature_order", "", Kind::Count),
    key("mc_trials", "", Kind::Count),
    key("seed", "", Kind::Count),
];

const SWEEP_PARAMETER: &str = "sweep.parameter";
const SWEEP_VALUES: &str = "sweep.values";

pub fn find_key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: &'static Key,
    /// In the key's file units.
    pub values: Vec<f64>,
}

/// Everything one run needs, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub catalog: ViewpointCatalog,
    pub budget: ResourceBudget,
    pub quadrature_order: usize,
    pub mc_trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    settings: Settings,
}

// Raw values in file units, keyed like `KEYS`.
#[derive(Debug, Clone, PartialEq)]
struct Settings {
    values: Vec<Option<f64>>,
}

impl Settings {
    fn get(&self, name: &str) -> Option<f64> {
        let i = KEYS.iter().position(|k| k.name == name).expect("known key");
        self.values[i]
    }

    fn or(&self, name: &str, default: f64) -> f64 {
        self.get(name).unwrap_or(default)
    }

    fn set(&mut self, key: &Key, v: f64) {
        let i = KEYS.iter().position(|k| k.name == key.name).expect("known key");
        self.values[i] = Some(v);
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::build(Settings { values: vec![None; KEYS.len()] }, None).expect("defaults are valid")
    }
}

fn parse_value(key: &Key, raw: &str) -> std::result::Result<f64, String> {
    match key.kind {
        Kind::Real => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{}` expects a number, got `{raw}`", key.name)),
        Kind::Count => raw
            .parse::<u64>()
            .map(|v| v as f64)
            .map_err(|_| format!("`{}` expects a non-negative integer, got `{raw}`", key.name)),
        Kind::Flag => match raw {
            "true" => Ok(1.0),
            "false" => Ok(0.0),
            _ => Err(format!("`{}` expects true or false, got `{raw}`", key.name)),
        },
    }
}

/// Parses a scenario document; an empty document gives the defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut settings = Settings { values: vec![None; KEYS.len()] };
    let mut sweep_parameter: Option<(usize, &'static Key)> = None;
    let mut sweep_values: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| ScenarioError::Parse { line, message };
        let (name, value) = body.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{body}`")))?;
        let (name, value) = (name.trim(), value.trim());
        if value.is_empty() {
            return Err(err(format!("`{name}` has no value")));
        }
        match name {
            SWEEP_PARAMETER => {
                let k = find_key(value).ok_or_else(|| err(format!("sweep parameter `{value}` is not a scenario key")))?;
                if k.kind == Kind::Flag || k.name == "seed" {
                    return Err(err(format!("`{value}` cannot be swept")));
                }
                sweep_parameter = Some((line, k));
            }
            SWEEP_VALUES => sweep_values = Some((line, value.to_string())),
            _ => {
                let k = find_key(name).ok_or_else(|| err(format!("unknown key `{name}`")))?;
                settings.set(k, parse_value(k, value).map_err(err)?);
            }
        }
    }
    let sweep = match (sweep_parameter, sweep_values) {
        (None, None) => None,
        (Some((line, _)), None) => {
            return Err(ScenarioError::Parse { line, message: format!("`{SWEEP_PARAMETER}` needs `{SWEEP_VALUES}`") })
        }
        (None, Some((line, _))) => {
            return Err(ScenarioError::Parse { line, message: format!("`{SWEEP_VALUES}` needs `{SWEEP_PARAMETER}`") })
        }
        (Some((_, k)), Some((line, list))) => {
            let values = list
                .split(',')
                .map(|v| parse_value(k, v.trim()))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|message| ScenarioError::Parse { line, message })?;
            Some(Sweep { parameter: k, values })
        }
    };
    Scenario::build(settings, sweep)
}

impl Scenario {
    fn build(settings: Settings, sweep: Option<Sweep>) -> Result<Scenario> {
        let s = &settings;
        let d = NetworkConfig::default();
        let b_mu = s.get("network.b_mu").map_or(d.b_mu, |v| v * 1e6);
        let b_m = s.get("network.b_m").map_or(d.b_m, |v| v * 1e6);
        let network = NetworkConfig {
            lambda_mu: s.or("network.lambda_mu", d.lambda_mu),
            lambda_m: s.or("network.lambda_m", d.lambda_m),
            lambda_h: s.or("network.lambda_h", d.lambda_h),
            p_mu: s.get("network.p_mu").map_or(d.p_mu, dbm_to_watts),
            p_m: s.get("network.p_m").map_or(d.p_m, dbm_to_watts),
            b_mu,
            b_m,
            alpha_mu: s.or("network.alpha_mu", d.alpha_mu),
            alpha_los: s.or("network.alpha_los", d.alpha_los),
            alpha_nlos: s.or("network.alpha_nlos", d.alpha_nlos),
            n_los: s.get("network.n_los").map_or(d.n_los, |v| v as u32),
            n_nlos: s.get("network.n_nlos").map_or(d.n_nlos, |v| v as u32),
            kappa: s.or("network.kappa", d.kappa),
            theta: s.get("network.theta").map_or(d.theta, f64::to_radians),
            gain_main: s.get("network.gain_main").map_or(d.gain_main, db_to_linear),
            gain_side: s.get("network.gain_side").map_or(d.gain_side, db_to_linear),
            // noise follows the bandwidth unless set explicitly
            sigma2_mu: s.get("network.noise_mu").map_or(default_noise_watts(b_mu), dbm_to_watts),
            sigma2_m: s.get("network.noise_m").map_or(default_noise_watts(b_m), dbm_to_watts),
            region_half_width: s.get("network.region_half_width"),
            los_only: s.get("network.los_only").is_some_and(|v| v != 0.0),
        };
        network.validate().map_err(|e| core_invalid("network", e))?;

        let count = s.or("catalog.count", 20.0) as usize;
        if count == 0 {
            return Err(invalid("catalog.count", "at least one viewpoint is required"));
        }
        let skew = s.or("catalog.skew", 0.8);
        let popularity = zipf_popularity(count, skew).map_err(|e| core_invalid("catalog", e))?;
        let catalog = ViewpointCatalog {
            mv_size: vec![s.or("catalog.mv_size", 1.0) * 1e6; count],
            sv_size: vec![s.or("catalog.sv_size", 3.0) * 1e6; count],
            popularity,
            delay_threshold: vec![s.or("catalog.threshold", 20.0) * 1e-3; count],
            sensor_delay: s.or("catalog.sensor_delay", 0.0) * 1e-3,
            display_delay: s.or("catalog.display_delay", 0.0) * 1e-3,
        };
        catalog.validate().map_err(|e| core_invalid("catalog", e))?;

        let db = ResourceBudget::default();
        let devices = |prefix: &str, scale: f64, d: Devices<f64>| {
            Devices::new(
                s.get(&format!("{prefix}_hmd")).map_or(d.hmd, |v| v * scale),
                s.get(&format!("{prefix}_mu")).map_or(d.mu, |v| v * scale),
                s.get(&format!("{prefix}_mm")).map_or(d.mm, |v| v * scale),
            )
        };
        let budget = ResourceBudget {
            cache: devices("budget.cache", 1e6, db.cache),
            energy: devices("budget.energy", 1.0, db.energy),
            cpu_freq: devices("budget.cpu", 1.0, db.cpu_freq),
            energy_coeff: devices("budget.eta", 1.0, db.energy_coeff),
            cycles_per_bit: s.or("budget.cycles_per_bit", db.cycles_per_bit),
            backhaul_delay: s.get("budget.backhaul_delay").map_or(db.backhaul_delay, |v| v * 1e-3),
            backhaul_capacity: s.get("budget.backhaul_capacity").map_or(db.backhaul_capacity, |v| v * 1e6),
        };
        budget.validate().map_err(|e| core_invalid("budget", e))?;

        let quadrature_order = s.or("quadrature_order", 32.0) as usize;
        if !(1..=dcvr_core::specfun::MAX_LAGUERRE_ORDER).contains(&quadrature_order) {
            return Err(invalid("quadrature_order", format!("must be in 1..={}", dcvr_core::specfun::MAX_LAGUERRE_ORDER)));
        }
        let mc_trials = s.or("mc_trials", 100_000.0) as usize;
        if mc_trials < dcvr_core::montecarlo::MIN_TRIALS {
            return Err(invalid("mc_trials", format!("at least {} trials are required", dcvr_core::montecarlo::MIN_TRIALS)));
        }
        let seed = s.get("seed").map_or(1, |v| v as u64);
        Ok(Scenario { network, catalog, budget, quadrature_order, mc_trials, seed, sweep, settings })
    }

    /// The same scenario with one key replaced, value in file units.
    pub fn with(&self, key: &Key, value: f64) -> Result<Scenario> {
        let mut settings = self.settings.clone();
        settings.set(key, value);
        Scenario::build(settings, self.sweep.clone())
    }

    /// Applies command-line overrides.
    pub fn override_run(&self, seed: Option<u64>, trials: Option<usize>, quadrature: Option<usize>) -> Result<Scenario> {
        let mut settings = self.settings.clone();
        for (name, v) in [
            ("seed", seed.map(|v| v as f64)),
            ("mc_trials", trials.map(|v| v as f64)),
            ("quadrature_order", quadrature.map(|v| v as f64)),
        ] {
            if let Some(v) = v {
                settings.set(find_key(name).expect("known key"), v);
            }
        }
        Scenario::build(settings, self.sweep.clone())
    }
}

fn core_invalid(section: &str, e: CoreError) -> ScenarioError {
    match e {
        CoreError::InvalidParameter { field, reason } => {
            ScenarioError::Invalid { field: format!("{section}.{field}"), message: reason }
        }
        other => invalid(section, other.to_string()),
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unit.is_empty() {
            f.write_str(self.name)
        } else {
            write!(f, "{} [{}]", self.name, self.unit)
        }
    }
}
