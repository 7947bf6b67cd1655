//! Special functions and quadrature rules used by the closed-form reliability
//! expressions.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive real arguments (Lanczos, g = 7).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { name: "x", value: x });
    }
    Ok(gamma_pos(x))
}

fn gamma_pos(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 171.0 {
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_pos(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `H_δ(x) = ₂F₁(1, δ; 1 + δ; −x)`.
///
/// For `x ≤ 1` the Pfaff transform gives a series in `z = x/(1+x) ≤ 1/2`;
/// larger arguments are folded back with the `x → 1/x` connection formula.
pub fn hyp_h(delta: f64, x: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain { name: "delta", value: delta });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain { name: "x", value: x });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 1.0 {
        return Ok(pfaff_series(delta, x));
    }
    let reflect = PI * delta / (PI * delta).sin();
    let tail = delta / (1.0 - delta) / x * pfaff_series(1.0 - delta, 1.0 / x);
    Ok(reflect * x.powf(-delta) - tail)
}

// (1+x)^{-1} Σ n!/(1+δ)_n z^n with z = x/(1+x)
fn pfaff_series(delta: f64, x: f64) -> f64 {
    let z = x / (1.0 + x);
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut n = 0.0;
    while term > 1e-17 * sum || n < 1.0 {
        sum += term;
        n += 1.0;
        term *= z * n / (n + delta);
        if n > 500.0 {
            break;
        }
    }
    sum / (1.0 + x)
}

/// Gauss–Laguerre rule for `∫₀^∞ e^{−r} g(r) dr ≈ Σ w_i g(r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Applies the rule to `g`, i.e. approximates `∫₀^∞ e^{−r} g(r) dr`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * g(r))
            .sum()
    }
}

pub const MAX_LAGUERRE_ORDER: usize = 128;

// Returns (L_n(x), L_{n-1}(x)).
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - x) * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, p2)
}

/// Nodes and weights of the `q`-point Gauss–Laguerre rule.
pub fn gauss_laguerre(q: usize) -> Result<QuadratureRule> {
    if q == 0 || q > MAX_LAGUERRE_ORDER {
        return Err(Error::Domain { name: "q", value: q as f64 });
    }
    let n = q as f64;
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let mut z = 0.0;
    for i in 0..q {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * n),
            1 => z + 15.0 / (1.0 + 2.5 * n),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut dp = 1.0;
        let mut polish = 2;
        for _ in 0..100 {
            let (p, pm1) = laguerre_pair(q, z);
            dp = n * (p - pm1) / z;
            let step = p / dp;
            z -= step;
            if step.abs() <= 1e-14 * z.abs() {
                polish -= 1;
                if polish == 0 {
                    break;
                }
            }
        }
        nodes[i] = z;
        weights[i] = 1.0 / (z * dp * dp);
    }
    Ok(QuadratureRule { order: q, nodes, weights })
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration over a finite interval.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let (v, e) = kronrod15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut value = v;
    let mut error = e;
    while error > abs_tol.max(rel_tol * value.abs()) && parts.len() < max_intervals {
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, v0, e0) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        value += v1 + v2 - v0;
        error += e1 + e2 - e0;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // re-sum to shed the drift of the running updates
    let value = parts.iter().map(|p| p.2).sum();
    let error = parts.iter().map(|p| p.3).sum();
    Integral { value, error, intervals: parts.len() }
}

/// Adaptive integral over `[a, b]` to the given relative tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    integrate_adaptive(f, a, b, 1e-300, rel_tol, 2000).value
}

/// Adaptive integral over `[a, ∞)` using the map `t = a + u/(1−u)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, rel_tol: f64) -> f64 {
    integrate(
        |u| {
            let v = 1.0 - u;
            if v <= 0.0 {
                return 0.0;
            }
            let y = f(a + u / v);
            if y == 0.0 {
                0.0
            } else {
                y / (v * v)
            }
        },
        0.0,
        1.0,
        rel_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-13);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-13);
        assert!(rel(gamma_fn(0.1).unwrap(), 9.513_507_698_668_732) < 1e-12);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_matches_integral() {
        // Γ(1.8) = ∫ t^0.8 e^{-t} dt, split at 1 to keep the integrand smooth
        let head = integrate(|t| t.powf(0.8) * (-t).exp(), 0.0, 1.0, 1e-14);
        let tail = integrate_to_infinity(|t| t.powf(0.8) * (-t).exp(), 1.0, 1e-14);
        let oracle = head + tail;
        assert!(rel(oracle, 0.931_383_770_980_242_9) < 1e-12);
        assert!(rel(gamma_fn(1.8).unwrap(), oracle) < 1e-12);
    }

    #[test]
    fn reflection_identity() {
        for i in 1..10 {
            let d = i as f64 / 10.0;
            let lhs = gamma_fn(1.0 + d).unwrap() * gamma_fn(1.0 - d).unwrap();
            let rhs = PI * d / (PI * d).sin();
            assert!(rel(lhs, rhs) < 1e-10, "delta {d}");
        }
    }

    #[test]
    fn hyp_h_examples() {
        assert_eq!(hyp_h(0.8, 0.0).unwrap(), 1.0);
        assert!(rel(hyp_h(0.5, 1.0).unwrap(), PI / 4.0) < 1e-13);
        assert!(hyp_h(0.0, 1.0).is_err());
        assert!(hyp_h(1.0, 1.0).is_err());
        assert!(hyp_h(0.5, -1.0).is_err());
    }

    // δ ∫₀¹ u^{δ−1}/(1+xu) du, with u = v^{1/δ} to remove the endpoint singularity
    fn hyp_h_oracle(delta: f64, x: f64) -> f64 {
        integrate_adaptive(
            |v: f64| 1.0 / (1.0 + x * v.powf(1.0 / delta)),
            0.0,
            1.0,
            1e-300,
            1e-14,
            5000,
        )
        .value
    }

    #[test]
    fn hyp_h_matches_defining_integral() {
        assert!(rel(hyp_h(0.8, 10.0).unwrap(), hyp_h_oracle(0.8, 10.0)) < 1e-10);
        for &d in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            for &x in &[0.01, 0.5, 1.0, 1.01, 3.0, 47.0, 1e3, 1e5] {
                let h = hyp_h(d, x).unwrap();
                assert!(rel(h, hyp_h_oracle(d, x)) < 1e-10, "delta {d} x {x}");
            }
        }
    }

    #[test]
    fn hyp_h_frozen() {
        // frozen from the defining integral
        assert!(rel(hyp_h(0.8, 10.0).unwrap(), 0.284_000_814_900_694_55) < 1e-10);
    }

    #[test]
    fn laguerre_small_orders() {
        let r1 = gauss_laguerre(1).unwrap();
        assert!((r1.nodes[0] - 1.0).abs() < 1e-15);
        assert!((r1.weights[0] - 1.0).abs() < 1e-15);

        let r2 = gauss_laguerre(2).unwrap();
        let s = 2f64.sqrt();
        assert!((r2.nodes[0] - (2.0 - s)).abs() < 1e-14);
        assert!((r2.nodes[1] - (2.0 + s)).abs() < 1e-14);
        assert!((r2.weights[0] - (2.0 + s) / 4.0).abs() < 1e-14);
        assert!((r2.weights[1] - (2.0 - s) / 4.0).abs() < 1e-14);

        let r16 = gauss_laguerre(16).unwrap();
        assert!((r16.integrate(|r| r * r * r) - 6.0).abs() < 1e-10);
        assert!(gauss_laguerre(0).is_err());
        assert!(gauss_laguerre(129).is_err());
    }

    #[test]
    fn laguerre_exactness() {
        for &q in &[2usize, 4, 8, 16] {
            let rule = gauss_laguerre(q).unwrap();
            let mut fact = 1.0;
            for k in 0..2 * q {
                if k > 0 {
                    fact *= k as f64;
                }
                let v = rule.integrate(|r| r.powi(k as i32));
                assert!(rel(v, fact) < 1e-9, "q {q} k {k}");
            }
        }
    }

    #[test]
    fn laguerre_structure_all_orders() {
        for q in 1..=MAX_LAGUERRE_ORDER {
            let rule = gauss_laguerre(q).unwrap();
            assert!(rule.nodes[0] > 0.0);
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]), "order {q}");
            assert!(rule.weights.iter().all(|&w| w > 0.0), "order {q}");
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "order {q}: {total}");
        }
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(64);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (x * 3.0).cos()).sum();
        assert!((v - 2.0 * 3f64.sin() / 3.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!(rel(v, exact) < 1e-11);
        let v = integrate_to_infinity(|x| (-x).exp(), 0.0, 1e-13);
        assert!(rel(v, 1.0) < 1e-12);
    }
}
