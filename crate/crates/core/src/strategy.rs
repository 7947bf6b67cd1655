//! Viewpoint catalog, edge resources and the 18 joint caching/computing
//! strategies a viewpoint can be served with.

use crate::error::{invalid, Error, Result};
use crate::netmodel::{NetworkConfig, Tier};
use crate::reliability::{rel_dc, rel_mmwave, rel_sub6, DeliveryCase, LinkSelector, ReliabilityValue};
use crate::specfun::QuadratureRule;
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub const STRATEGY_COUNT: usize = 18;
pub const CONSTRAINT_COUNT: usize = 7;

/// Names of the seven budget rows, in the order used by `capacity` and
/// consumption vectors.
pub const CONSTRAINT_NAMES: [&str; CONSTRAINT_COUNT] = [
    "cache_hmd",
    "cache_mu",
    "cache_mm",
    "energy_hmd",
    "energy_mu",
    "energy_mm",
    "backhaul",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Device {
    Hmd,
    Mu,
    Mm,
}

impl Device {
    pub const ALL: [Device; 3] = [Device::Hmd, Device::Mu, Device::Mm];
}

/// One value per device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Devices<T> {
    pub hmd: T,
    pub mu: T,
    pub mm: T,
}

impl<T: Copy> Devices<T> {
    pub const fn new(hmd: T, mu: T, mm: T) -> Self {
        Devices { hmd, mu, mm }
    }

    pub fn get(&self, d: Device) -> T {
        match d {
            Device::Hmd => self.hmd,
            Device::Mu => self.mu,
            Device::Mm => self.mm,
        }
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(Device, T) -> U) -> Devices<U> {
        Devices {
            hmd: f(Device::Hmd, self.hmd),
            mu: f(Device::Mu, self.mu),
            mm: f(Device::Mm, self.mm),
        }
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.hmd, self.mu, self.mm]
    }
}

/// Zipf request probabilities `p_j ∝ j^{−skew}`.
pub fn zipf_popularity(count: usize, skew: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(invalid("count", "at least one viewpoint is required"));
    }
    if !(skew >= 0.0 && skew.is_finite()) {
        return Err(invalid("skew", format!("must be non-negative, got {skew}")));
    }
    let raw: Vec<f64> = (1..=count).map(|j| (j as f64).powf(-skew)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Viewpoints with their MV/SV sizes (bits), request probabilities and
/// end-to-end delay thresholds (s).
#[derive(Debug, Clone, PartialEq)]
pub struct ViewpointCatalog {
    pub mv_size: Vec<f64>,
    pub sv_size: Vec<f64>,
    pub popularity: Vec<f64>,
    pub delay_threshold: Vec<f64>,
    pub sensor_delay: f64,
    pub display_delay: f64,
}

impl ViewpointCatalog {
    /// Identical sizes and thresholds for every viewpoint, Zipf popularity.
    pub fn uniform(count: usize, mv_size: f64, sv_size: f64, skew: f64, threshold: f64) -> Result<Self> {
        let cat = ViewpointCatalog {
            mv_size: vec![mv_size; count],
            sv_size: vec![sv_size; count],
            popularity: zipf_popularity(count, skew)?,
            delay_threshold: vec![threshold; count],
            sensor_delay: 0.0,
            display_delay: 0.0,
        };
        cat.validate()?;
        Ok(cat)
    }

    pub fn count(&self) -> usize {
        self.popularity.len()
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.count();
        if j == 0 {
            return Err(invalid("count", "at least one viewpoint is required"));
        }
        for (name, len) in [
            ("mv_size", self.mv_size.len()),
            ("sv_size", self.sv_size.len()),
            ("delay_threshold", self.delay_threshold.len()),
        ] {
            if len != j {
                return Err(invalid(name, format!("expected {j} entries, got {len}")));
            }
        }
        if self.popularity.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("popularity", "probabilities must be non-negative"));
        }
        let total: f64 = self.popularity.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("popularity", format!("must sum to 1, got {total}")));
        }
        for d in [self.sensor_delay, self.display_delay] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(invalid("sensor_delay", "fixed delays must be non-negative"));
            }
        }
        for i in 0..j {
            if !(self.mv_size[i] > 0.0 && self.mv_size[i].is_finite()) {
                return Err(invalid("mv_size", format!("viewpoint {}: must be positive", i + 1)));
            }
            if !(self.sv_size[i] >= 2.0 * self.mv_size[i] && self.sv_size[i].is_finite()) {
                return Err(invalid("sv_size", format!("viewpoint {}: must be at least twice the MV size", i + 1)));
            }
            if !(self.delay_threshold[i] > self.sensor_delay + self.display_delay) {
                return Err(invalid(
                    "delay_threshold",
                    format!("viewpoint {}: must exceed sensor + display delay", i + 1),
                ));
            }
        }
        Ok(())
    }

    /// Time left after sensor sampling and display refresh.
    pub fn budget(&self, j: usize) -> f64 {
        self.delay_threshold[j] - self.sensor_delay - self.display_delay
    }
}

impl Default for ViewpointCatalog {
    fn default() -> Self {
        ViewpointCatalog::uniform(20, 1e6, 3e6, 0.8, 0.02).expect("valid defaults")
    }
}

/// Cache (bits), energy (J) and CPU resources of the three device types plus
/// the shared backhaul.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceBudget {
    pub cache: Devices<f64>,
    pub energy: Devices<f64>,
    /// CPU cycles per second.
    pub cpu_freq: Devices<f64>,
    pub energy_coeff: Devices<f64>,
    pub cycles_per_bit: f64,
    pub backhaul_delay: f64,
    /// Bits the backhaul can carry for one request round.
    pub backhaul_capacity: f64,
}

impl Default for ResourceBudget {
    fn default() -> Self {
        ResourceBudget {
            cache: Devices::new(10e6, 30e6, 30e6),
            energy: Devices::new(0.3, 0.5, 0.5),
            cpu_freq: Devices::new(1e9, 3e9, 3e9),
            energy_coeff: Devices::new(1e-25, 1e-26, 1e-26),
            cycles_per_bit: 10.0,
            backhaul_delay: 0.01,
            backhaul_capacity: 60e6,
        }
    }
}

impl ResourceBudget {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        for d in Device::ALL {
            check("cache", self.cache.get(d))?;
            check("energy", self.energy.get(d))?;
            check("cpu_freq", self.cpu_freq.get(d))?;
            check("energy_coeff", self.energy_coeff.get(d))?;
        }
        check("cycles_per_bit", self.cycles_per_bit)?;
        check("backhaul_delay", self.backhaul_delay)?;
        check("backhaul_capacity", self.backhaul_capacity)
    }

    /// Energy of one CPU cycle, `η f²`.
    pub fn cycle_energy(&self, d: Device) -> f64 {
        self.energy_coeff.get(d) * self.cpu_freq.get(d) * self.cpu_freq.get(d)
    }

    /// Seconds needed to project `bits` of MV at device `d`.
    pub fn compute_delay(&self, d: Device, bits: f64) -> f64 {
        self.cycles_per_bit * bits / self.cpu_freq.get(d)
    }

    pub fn capacity(&self) -> [f64; CONSTRAINT_COUNT] {
        [
            self.cache.hmd,
            self.cache.mu,
            self.cache.mm,
            self.energy.hmd,
            self.energy.mu,
            self.energy.mm,
            self.backhaul_capacity,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    Mv,
    Sv,
}

/// Non-transmission delay added on a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtraDelay {
    None,
    /// MV projection at the given device.
    Compute(Device),
    Backhaul,
}

/// What a link transmits and what delays it on the way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkPlan {
    pub payload: Payload,
    pub extra: ExtraDelay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupancy {
    Zero,
    Mv,
    Sv,
}

/// Projection-energy or backhaul template: nothing, always, or only when the
/// given tier delivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Zero,
    Full,
    Selected(Tier),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyType {
    Local,
    BothBs,
    SingleBs,
    Backhaul,
}

impl StrategyType {
    pub fn name(self) -> &'static str {
        match self {
            StrategyType::Local => "local",
            StrategyType::BothBs => "both_bs",
            StrategyType::SingleBs => "single_bs",
            StrategyType::Backhaul => "backhaul",
        }
    }
}

/// One row of the strategy schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyDef {
    pub index: usize,
    pub kind: StrategyType,
    /// `[y^{H,M} y^{H,S} (z^{H(H)} z^{H(μ)} z^{H(m)}), y^{μ,M} y^{μ,S} z^μ, y^{m,M} y^{m,S} z^m]`
    pub tuple: &'static str,
    /// Sub-6 GHz and mmWave plans; `None` when served from the HMD cache.
    pub links: Option<(LinkPlan, LinkPlan)>,
    pub cache: Devices<Occupancy>,
    pub energy: Devices<Weight>,
    pub backhaul: Weight,
}

impl StrategyDef {
    pub fn link(&self, tier: Tier) -> Option<LinkPlan> {
        self.links.map(|(mu, mm)| match tier {
            Tier::Sub6 => mu,
            Tier::Mmwave => mm,
        })
    }

    pub fn decision(&self) -> DecisionTuple {
        self.tuple.parse().expect("schedule tuples are well formed")
    }

    /// Whether the strategy caches or computes at a base station of `tier`.
    pub fn uses_bs(&self, tier: Tier) -> bool {
        let d = match tier {
            Tier::Sub6 => Device::Mu,
            Tier::Mmwave => Device::Mm,
        };
        self.cache.get(d) != Occupancy::Zero || self.energy.get(d) != Weight::Zero
    }
}

const fn plan(payload: Payload, extra: ExtraDelay) -> LinkPlan {
    LinkPlan { payload, extra }
}

const fn occ(hmd: Occupancy, mu: Occupancy, mm: Occupancy) -> Devices<Occupancy> {
    Devices { hmd, mu, mm }
}

const fn energy(hmd: Weight, mu: Weight, mm: Weight) -> Devices<Weight> {
    Devices { hmd, mu, mm }
}

use ExtraDelay::{Backhaul as Bh, Compute as Cp, None as Free};
use Occupancy::{Mv as CMv, Sv as CSv, Zero as C0};
use Payload::{Mv, Sv};
use Weight::{Full, Selected as A, Zero as W0};
const HMD: Device = Device::Hmd;
const MU: Device = Device::Mu;
const MM: Device = Device::Mm;
const SUB6: Tier = Tier::Sub6;
const MMW: Tier = Tier::Mmwave;

/// The 18 strategies, transcribed row by row.
pub static SCHEDULE: [StrategyDef; STRATEGY_COUNT] = [
    StrategyDef {
        index: 1,
        kind: StrategyType::Local,
        tuple: "[10(100),000,000]",
        links: None,
        cache: occ(CMv, C0, C0),
        energy: energy(Full, W0, W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 2,
        kind: StrategyType::Local,
        tuple: "[01(000),000,000]",
        links: None,
        cache: occ(CSv, C0, C0),
        energy: energy(W0, W0, W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 3,
        kind: StrategyType::BothBs,
        tuple: "[00(000),101,101]",
        links: Some((plan(Sv, Cp(MU)), plan(Sv, Cp(MM)))),
        cache: occ(C0, CMv, CMv),
        energy: energy(W0, A(SUB6), A(MMW)),
        backhaul: W0,
    },
    StrategyDef {
        index: 4,
        kind: StrategyType::BothBs,
        tuple: "[00(001),101,100]",
        links: Some((plan(Sv, Cp(MU)), plan(Mv, Cp(HMD)))),
        cache: occ(C0, CMv, CMv),
        energy: energy(A(MMW), A(SUB6), W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 5,
        kind: StrategyType::BothBs,
        tuple: "[00(010),100,101]",
        links: Some((plan(Mv, Cp(HMD)), plan(Sv, Cp(MM)))),
        cache: occ(C0, CMv, CMv),
        energy: energy(A(SUB6), W0, A(MMW)),
        backhaul: W0,
    },
    StrategyDef {
        index: 6,
        kind: StrategyType::BothBs,
        tuple: "[00(011),100,100]",
        links: Some((plan(Mv, Cp(HMD)), plan(Mv, Cp(HMD)))),
        cache: occ(C0, CMv, CMv),
        energy: energy(Full, W0, W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 7,
        kind: StrategyType::BothBs,
        tuple: "[00(000),101,010]",
        links: Some((plan(Sv, Cp(MU)), plan(Sv, Free))),
        cache: occ(C0, CMv, CSv),
        energy: energy(W0, A(SUB6), W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 8,
        kind: StrategyType::BothBs,
        tuple: "[00(010),100,010]",
        links: Some((plan(Mv, Cp(HMD)), plan(Sv, Free))),
        cache: occ(C0, CMv, CSv),
        energy: energy(A(SUB6), W0, W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 9,
        kind: StrategyType::BothBs,
        tuple: "[00(000),010,101]",
        links: Some((plan(Sv, Free), plan(Sv, Cp(MM)))),
        cache: occ(C0, CSv, CMv),
        energy: energy(W0, W0, A(MMW)),
        backhaul: W0,
    },
    StrategyDef {
        index: 10,
        kind: StrategyType::BothBs,
        tuple: "[00(001),010,100]",
        links: Some((plan(Sv, Free), plan(Mv, Cp(HMD)))),
        cache: occ(C0, CSv, CMv),
        energy: energy(A(MMW), W0, W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 11,
        kind: StrategyType::BothBs,
        tuple: "[00(000),010,010]",
        links: Some((plan(Sv, Free), plan(Sv, Free))),
        cache: occ(C0, CSv, CSv),
        energy: energy(W0, W0, W0),
        backhaul: W0,
    },
    StrategyDef {
        index: 12,
        kind: StrategyType::SingleBs,
        tuple: "[00(000),101,000]",
        links: Some((plan(Sv, Cp(MU)), plan(Sv, Bh))),
        cache: occ(C0, CMv, C0),
        energy: energy(W0, A(SUB6), W0),
        backhaul: A(MMW),
    },
    StrategyDef {
        index: 13,
        kind: StrategyType::SingleBs,
        tuple: "[00(010),100,000]",
        links: Some((plan(Mv, Cp(HMD)), plan(Sv, Bh))),
        cache: occ(C0, CMv, C0),
        energy: energy(A(SUB6), W0, W0),
        backhaul: A(MMW),
    },
    StrategyDef {
        index: 14,
        kind: StrategyType::SingleBs,
        tuple: "[00(000),010,000]",
        links: Some((plan(Sv, Free), plan(Sv, Bh))),
        cache: occ(C0, CSv, C0),
        energy: energy(W0, W0, W0),
        backhaul: A(MMW),
    },
    StrategyDef {
        index: 15,
        kind: StrategyType::SingleBs,
        tuple: "[00(001),000,100]",
        links: Some((plan(Sv, Bh), plan(Mv, Cp(HMD)))),
        cache: occ(C0, C0, CMv),
        energy: energy(A(MMW), W0, W0),
        backhaul: A(SUB6),
    },
    StrategyDef {
        index: 16,
        kind: StrategyType::SingleBs,
        tuple: "[00(000),000,101]",
        links: Some((plan(Sv, Bh), plan(Sv, Cp(MM)))),
        cache: occ(C0, C0, CMv),
        energy: energy(W0, W0, A(MMW)),
        backhaul: A(SUB6),
    },
    StrategyDef {
        index: 17,
        kind: StrategyType::SingleBs,
        tuple: "[00(000),000,010]",
        links: Some((plan(Sv, Bh), plan(Sv, Free))),
        cache: occ(C0, C0, CSv),
        energy: energy(W0, W0, W0),
        backhaul: A(SUB6),
    },
    StrategyDef {
        index: 18,
        kind: StrategyType::Backhaul,
        tuple: "[00(000),000,000]",
        links: Some((plan(Sv, Bh), plan(Sv, Bh))),
        cache: occ(C0, C0, C0),
        energy: energy(W0, W0, W0),
        backhaul: Full,
    },
];

/// Schedule row of strategy `k` (1-based).
pub fn strategy_def(k: usize) -> &'static StrategyDef {
    &SCHEDULE[k - 1]
}

/// Caching and computing decision of one viewpoint with the HMD computing
/// flag split by where the projected MV was cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DecisionTuple {
    pub cache_mv: Devices<bool>,
    pub cache_sv: Devices<bool>,
    /// `z^{H(q)}`: the HMD projects an MV cached at `q`.
    pub hmd_computes: Devices<bool>,
    pub mu_computes: bool,
    pub mm_computes: bool,
}

impl DecisionTuple {
    pub const BITS: u32 = 11;

    /// `z^H`, the HMD computing flag of the unsplit 9-tuple.
    pub fn z_hmd(&self) -> bool {
        self.hmd_computes.hmd || self.hmd_computes.mu || self.hmd_computes.mm
    }

    /// Decodes the 11 flags in tuple order, first flag in the highest bit.
    pub fn from_bits(bits: u16) -> Self {
        let b = |i: u32| bits >> (Self::BITS - 1 - i) & 1 == 1;
        DecisionTuple {
            cache_mv: Devices::new(b(0), b(5), b(8)),
            cache_sv: Devices::new(b(1), b(6), b(9)),
            hmd_computes: Devices::new(b(2), b(3), b(4)),
            mu_computes: b(7),
            mm_computes: b(10),
        }
    }

    pub fn to_bits(&self) -> u16 {
        self.flags().iter().fold(0, |acc, &f| acc << 1 | f as u16)
    }

    fn flags(&self) -> [bool; 11] {
        [
            self.cache_mv.hmd,
            self.cache_sv.hmd,
            self.hmd_computes.hmd,
            self.hmd_computes.mu,
            self.hmd_computes.mm,
            self.cache_mv.mu,
            self.cache_sv.mu,
            self.mu_computes,
            self.cache_mv.mm,
            self.cache_sv.mm,
            self.mm_computes,
        ]
    }
}

impl fmt::Display for DecisionTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<char> = self.flags().iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(
            f,
            "[{}{}({}{}{}),{}{}{},{}{}{}]",
            c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8], c[9], c[10]
        )
    }
}

impl FromStr for DecisionTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid("tuple", format!("`{s}` is not of the form [ab(cde),fgh,ijk]"));
        let shape = "[##(###),###,###]";
        if s.len() != shape.len() {
            return Err(bad());
        }
        let mut bits = 0u16;
        for (c, p) in s.chars().zip(shape.chars()) {
            match (p, c) {
                ('#', '0') => bits <<= 1,
                ('#', '1') => bits = bits << 1 | 1,
                (p, c) if p == c => {}
                _ => return Err(bad()),
            }
        }
        Ok(DecisionTuple::from_bits(bits))
    }
}

/// The three structural rules every decision must satisfy: no viewpoint is
/// cached at the HMD and a base station at once, no device holds both the MV
/// and the SV, and an MV cached at a base station is projected at exactly one
/// place (that base station or the HMD) for that link.
pub fn check_lemma1(t: &DecisionTuple) -> bool {
    let local = t.cache_mv.hmd || t.cache_sv.hmd;
    let edge = t.cache_mv.mu || t.cache_sv.mu || t.cache_mv.mm || t.cache_sv.mm;
    if local && edge {
        return false;
    }
    if Device::ALL.iter().any(|&d| t.cache_mv.get(d) && t.cache_sv.get(d)) {
        return false;
    }
    let one_site = |cached: bool, bs: bool, hmd: bool| !cached || (bs as u8 + hmd as u8 == 1);
    one_site(t.cache_mv.mu, t.mu_computes, t.hmd_computes.mu) && one_site(t.cache_mv.mm, t.mm_computes, t.hmd_computes.mm)
}

/// Costs and reliability of serving viewpoint `viewpoint` with strategy
/// `strategy` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyEntry {
    pub viewpoint: usize,
    pub strategy: usize,
    pub reliability: f64,
    pub rel_sub6: f64,
    pub rel_mmwave: f64,
    /// Bits occupied per device.
    pub cache_cost: Devices<f64>,
    /// Joules per request at each device, before weighting by popularity.
    pub energy_cost: Devices<f64>,
    /// Bits fetched over the backhaul.
    pub backhaul_cost: f64,
    /// mmWave selection probability; `None` for HMD-cached strategies.
    pub a_m: Option<f64>,
    /// mmWave minus sub-6 GHz non-transmission delay.
    pub tau0: Option<f64>,
    /// Transmission budgets per link (s).
    pub budgets: Option<(f64, f64)>,
    /// Relies on a base station of a tier that is not deployed.
    pub excluded: bool,
}

impl StrategyEntry {
    pub fn def(&self) -> &'static StrategyDef {
        strategy_def(self.strategy)
    }

    /// Resource use in `CONSTRAINT_NAMES` order; energies weighted by `p`.
    pub fn consumption(&self, p: f64) -> [f64; CONSTRAINT_COUNT] {
        [
            self.cache_cost.hmd,
            self.cache_cost.mu,
            self.cache_cost.mm,
            p * self.energy_cost.hmd,
            p * self.energy_cost.mu,
            p * self.energy_cost.mm,
            self.backhaul_cost,
        ]
    }
}

/// One strategy per viewpoint with its objective and remaining budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// 1-based strategy index per viewpoint.
    pub choice: Vec<usize>,
    pub objective: f64,
    pub feasible: bool,
    pub slack: [f64; CONSTRAINT_COUNT],
}

/// All `J × 18` entries with the popularity and budgets they are judged by.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTable {
    pub popularity: Vec<f64>,
    /// Viewpoint-major, 18 entries per viewpoint.
    pub entries: Vec<StrategyEntry>,
    pub capacity: [f64; CONSTRAINT_COUNT],
    /// Strategies whose extra delay leaves a link no transmission time.
    pub warnings: Vec<String>,
}

impl StrategyTable {
    pub fn count(&self) -> usize {
        self.popularity.len()
    }

    pub fn entry(&self, j: usize, k: usize) -> &StrategyEntry {
        &self.entries[j * STRATEGY_COUNT + k - 1]
    }

    pub fn viewpoint(&self, j: usize) -> &[StrategyEntry] {
        &self.entries[j * STRATEGY_COUNT..(j + 1) * STRATEGY_COUNT]
    }

    /// `p_j R_jk`.
    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.popularity[j] * self.entry(j, k).reliability
    }

    pub fn consumption(&self, j: usize, k: usize) -> [f64; CONSTRAINT_COUNT] {
        self.entry(j, k).consumption(self.popularity[j])
    }

    pub fn allowed(&self, j: usize, k: usize) -> bool {
        !self.entry(j, k).excluded
    }

    /// Strategies usable for viewpoint `j`, ascending.
    pub fn allowed_strategies(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=STRATEGY_COUNT).filter(move |&k| self.allowed(j, k))
    }

    /// Restricts every viewpoint to the listed strategies.
    pub fn restrict(&mut self, keep: &[usize]) {
        for e in &mut self.entries {
            if !keep.contains(&e.strategy) {
                e.excluded = true;
            }
        }
    }

    pub fn objective(&self, choice: &[usize]) -> f64 {
        choice.iter().enumerate().map(|(j, &k)| self.value(j, k)).sum()
    }

    /// Objective, feasibility and slack of a choice vector. Consumption is
    /// summed in viewpoint order.
    pub fn evaluate(&self, choice: &[usize]) -> Assignment {
        assert_eq!(choice.len(), self.count(), "one strategy per viewpoint");
        let mut used = [0.0; CONSTRAINT_COUNT];
        let mut allowed = true;
        for (j, &k) in choice.iter().enumerate() {
            assert!((1..=STRATEGY_COUNT).contains(&k), "strategy index {k} out of range");
            allowed &= self.allowed(j, k);
            for (u, c) in used.iter_mut().zip(self.consumption(j, k)) {
                *u += c;
            }
        }
        let mut slack = [0.0; CONSTRAINT_COUNT];
        for i in 0..CONSTRAINT_COUNT {
            slack[i] = self.capacity[i] - used[i];
        }
        Assignment {
            choice: choice.to_vec(),
            objective: self.objective(choice),
            feasible: allowed && slack.iter().all(|&s| s >= 0.0),
            slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct LinkKey([u64; 5]);

#[derive(Debug, Clone, Copy)]
struct LinkValues {
    rel_sub6: f64,
    rel_mmwave: f64,
    a_m: f64,
}

fn payload_bits(p: Payload, cat: &ViewpointCatalog, j: usize) -> f64 {
    match p {
        Payload::Mv => cat.mv_size[j],
        Payload::Sv => cat.sv_size[j],
    }
}

fn extra_delay(e: ExtraDelay, budget: &ResourceBudget, cat: &ViewpointCatalog, j: usize) -> f64 {
    match e {
        ExtraDelay::None => 0.0,
        ExtraDelay::Compute(d) => budget.compute_delay(d, cat.mv_size[j]),
        ExtraDelay::Backhaul => budget.backhaul_delay,
    }
}

fn weight_factor(w: Weight, a_m: f64) -> f64 {
    match w {
        Weight::Zero => 0.0,
        Weight::Full => 1.0,
        Weight::Selected(Tier::Sub6) => 1.0 - a_m,
        Weight::Selected(Tier::Mmwave) => a_m,
    }
}

pub fn build_strategy_table(
    catalog: &ViewpointCatalog,
    budget: &ResourceBudget,
    config: &NetworkConfig,
    rule: &QuadratureRule,
) -> Result<StrategyTable> {
    config.validate()?;
    build_strategy_table_with(catalog, budget, &LinkSelector::new(config, rule))
}

/// Same as [`build_strategy_table`] but reuses a link selector, which is the
/// expensive part and depends only on the network configuration.
pub fn build_strategy_table_with(
    catalog: &ViewpointCatalog,
    budget: &ResourceBudget,
    selector: &LinkSelector,
) -> Result<StrategyTable> {
    catalog.validate()?;
    budget.validate()?;
    let cfg = selector.config();
    cfg.validate()?;
    let rule = selector.rule();

    // Distinct (D^μ, T^μ, D^m, T^m, τ₀) combinations; uniform catalogs share them.
    let mut keys: Vec<(LinkKey, [f64; 5])> = Vec::new();
    let mut index: HashMap<LinkKey, usize> = HashMap::new();
    let mut cell_key = vec![None; catalog.count() * STRATEGY_COUNT];
    let mut warnings = Vec::new();
    for j in 0..catalog.count() {
        for def in &SCHEDULE {
            let Some((mu, mm)) = def.links else { continue };
            let (x_mu, x_mm) = (extra_delay(mu.extra, budget, catalog, j), extra_delay(mm.extra, budget, catalog, j));
            let t = catalog.budget(j);
            let v = [
                payload_bits(mu.payload, catalog, j),
                t - x_mu,
                payload_bits(mm.payload, catalog, j),
                t - x_mm,
                x_mm - x_mu,
            ];
            for (tier, x) in [("sub-6 GHz", x_mu), ("mmWave", x_mm)] {
                if x >= t {
                    warnings.push(format!(
                        "viewpoint {} strategy {}: {tier} extra delay {x:.3e} s leaves no transmission time",
                        j + 1,
                        def.index
                    ));
                }
            }
            let key = LinkKey(v.map(f64::to_bits));
            let id = *index.entry(key).or_insert_with(|| {
                keys.push((key, v));
                keys.len() - 1
            });
            cell_key[j * STRATEGY_COUNT + def.index - 1] = Some(id);
        }
    }

    let values: Vec<LinkValues> = keys
        .par_iter()
        .map(|(_, v)| {
            let r_mu = rel_sub6(DeliveryCase::new(v[0], v[1]), cfg, rule);
            let r_mm = rel_mmwave(DeliveryCase::new(v[2], v[3]), cfg, rule);
            LinkValues {
                rel_sub6: r_mu.value(),
                rel_mmwave: r_mm.value(),
                a_m: selector.prob_mmwave(v[0], v[2], v[4]),
            }
        })
        .collect();

    let mut entries = Vec::with_capacity(cell_key.len());
    for j in 0..catalog.count() {
        let (dm, ds) = (catalog.mv_size[j], catalog.sv_size[j]);
        for def in &SCHEDULE {
            let id = cell_key[j * STRATEGY_COUNT + def.index - 1];
            let link = id.map(|i| (values[i], keys[i].1));
            let a_m = link.map(|(lv, _)| lv.a_m);
            let (reliability, r_mu, r_mm) = match link {
                None => (1.0, 1.0, 1.0),
                Some((lv, _)) => (
                    rel_dc(ReliabilityValue::new(lv.rel_sub6), ReliabilityValue::new(lv.rel_mmwave)).value(),
                    lv.rel_sub6,
                    lv.rel_mmwave,
                ),
            };
            let a = a_m.unwrap_or(0.0);
            let cache_cost = def.cache.map(|_, o| match o {
                Occupancy::Zero => 0.0,
                Occupancy::Mv => dm,
                Occupancy::Sv => ds,
            });
            let energy_cost =
                def.energy.map(|d, w| weight_factor(w, a) * budget.cycle_energy(d) * dm * budget.cycles_per_bit);
            let excluded = (!cfg.has_sub6() && def.uses_bs(Tier::Sub6)) || (!cfg.has_mmwave() && def.uses_bs(Tier::Mmwave));
            entries.push(StrategyEntry {
                viewpoint: j,
                strategy: def.index,
                reliability,
                rel_sub6: r_mu,
                rel_mmwave: r_mm,
                cache_cost,
                energy_cost,
                backhaul_cost: weight_factor(def.backhaul, a) * ds,
                a_m,
                tau0: link.map(|(_, v)| v[4]),
                budgets: link.map(|(_, v)| (v[1], v[3])),
                excluded,
            });
        }
    }

    Ok(StrategyTable {
        popularity: catalog.popularity.clone(),
        entries,
        capacity: budget.capacity(),
        warnings,
    })
}
