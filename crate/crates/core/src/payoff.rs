//! Put payoff coefficients `V_{m,k}`.
//!
//! In forward-centered form, with `y = ln(F_T / F)`, `x = ln(F / K)` and the
//! put payoff `F (e^{-x} - e^y)^+`,
//! `V_{m,k} = 2^{m/2} F int_{-c}^{-x} (e^{-x} - e^y) sinc(2^m y - k) dy`
//! where `c = kappa / 2^m`. The variants differ in how the sinc is handled.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{CoefficientVector, SwiftGrid};
use crate::error::{invalid, Result, SwiftError};
use crate::exec::Execution;
use crate::models::VanillaContract;
use crate::numerics::special::{phi1, phi2, sinc};
use crate::numerics::{fft_forward, integrate_adaptive, pairwise_sum};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    /// Strike-centered Vieta expansion on `[-c, 0]`; pairs with the density
    /// of `ln(F_T / K)`.
    VietaStrike,
    /// Mid-point cosine expansion plus the second Euler-Maclaurin term.
    #[default]
    Sem0,
    /// Trapezoidal cosine expansion.
    Fem0,
    /// Trapezoidal cosine expansion plus its first-derivative term.
    Fem1,
    DirectMidpoint,
    DirectTrapezoid,
    DirectSimpson,
    DirectBoole,
}

impl PayoffKind {
    pub const ALL: [PayoffKind; 8] = [
        PayoffKind::VietaStrike,
        PayoffKind::Sem0,
        PayoffKind::Fem0,
        PayoffKind::Fem1,
        PayoffKind::DirectMidpoint,
        PayoffKind::DirectTrapezoid,
        PayoffKind::DirectSimpson,
        PayoffKind::DirectBoole,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PayoffKind::VietaStrike => "vieta_strike",
            PayoffKind::Sem0 => "sem0",
            PayoffKind::Fem0 => "fem0",
            PayoffKind::Fem1 => "fem1",
            PayoffKind::DirectMidpoint => "direct_midpoint",
            PayoffKind::DirectTrapezoid => "direct_trapezoid",
            PayoffKind::DirectSimpson => "direct_simpson",
            PayoffKind::DirectBoole => "direct_boole",
        }
    }

    pub fn is_direct(self) -> bool {
        matches!(
            self,
            PayoffKind::DirectMidpoint
                | PayoffKind::DirectTrapezoid
                | PayoffKind::DirectSimpson
                | PayoffKind::DirectBoole
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PayoffVariant {
    pub kind: PayoffKind,
    /// Node count of the direct rules; `None` picks `2J` mid-points or
    /// `2J + 1` nodes for the closed rules.
    pub n_direct: Option<usize>,
}

impl PayoffVariant {
    pub fn new(kind: PayoffKind) -> Self {
        Self { kind, n_direct: None }
    }

    pub fn with_nodes(kind: PayoffKind, n: usize) -> Self {
        Self { kind, n_direct: Some(n) }
    }

    /// Node count of a direct rule at `J`.
    pub fn direct_nodes(&self, j: usize) -> Result<usize> {
        let n = match (self.n_direct, self.kind) {
            (Some(n), _) => n,
            (None, PayoffKind::DirectMidpoint) => 2 * j,
            (None, _) => 2 * j + 1,
        };
        let ok = match self.kind {
            PayoffKind::DirectMidpoint => n >= 1,
            PayoffKind::DirectTrapezoid => n >= 2,
            PayoffKind::DirectSimpson => n >= 3 && n % 2 == 1,
            PayoffKind::DirectBoole => n >= 5 && n % 4 == 1,
            _ => true,
        };
        if !ok {
            return Err(invalid("n_direct", format!("{n} nodes do not fit {:?}", self.kind)));
        }
        Ok(n)
    }
}

/// `(int e^{b y} dy, int y e^{b y} dy)` over `[lo, hi]`.
fn exp_moments(b: Complex64, lo: f64, hi: f64) -> (Complex64, Complex64) {
    let d = hi - lo;
    let z = b * d;
    if z.norm() < 0.5 {
        let e = (b * lo).exp();
        let p1 = phi1(z);
        (e * d * p1, e * (p1 * (lo * d) + z.exp() * phi2(-z) * (d * d)))
    } else {
        let (ehi, elo) = ((b * hi).exp(), (b * lo).exp());
        let inv = 1.0 / b;
        (
            (ehi - elo) * inv,
            ehi * (inv * hi - inv * inv) - elo * (inv * lo - inv * inv),
        )
    }
}

/// `int_lo^hi (e^{-x} - e^y) e^{i p y} dy`.
fn payoff_transform(p: f64, lo: f64, hi: f64, x: f64) -> Complex64 {
    let ex = (-x).exp();
    exp_moments(Complex64::new(0.0, p), lo, hi).0 * ex
        - exp_moments(Complex64::new(1.0, p), lo, hi).0
}

/// `int_lo^hi y (e^{-x} - e^y) e^{i p y} dy`.
fn payoff_moment_transform(p: f64, lo: f64, hi: f64, x: f64) -> Complex64 {
    let ex = (-x).exp();
    exp_moments(Complex64::new(0.0, p), lo, hi).1 * ex
        - exp_moments(Complex64::new(1.0, p), lo, hi).1
}

/// `(int (e^{-x} - e^y) cos(a y + shift) dy, int (e^{-x} - e^y) sin(a y + shift) dy)`
/// over `[y_lo, y_hi]`, in closed form.
pub fn payoff_primitive(a: f64, shift: f64, y_lo: f64, y_hi: f64, x: f64) -> (f64, f64) {
    let v = Complex64::from_polar(1.0, shift) * payoff_transform(a, y_lo, y_hi, x);
    (v.re, v.im)
}

/// Same as [`payoff_primitive`] with the extra weight `y` in the integrand.
pub fn payoff_moment_primitive(a: f64, shift: f64, y_lo: f64, y_hi: f64, x: f64) -> (f64, f64) {
    let v = Complex64::from_polar(1.0, shift) * payoff_moment_transform(a, y_lo, y_hi, x);
    (v.re, v.im)
}

/// Integration range `[-c, min(-x, c)]` of the forward-centered put, or
/// `None` when it is empty.
pub fn forward_range(g: &SwiftGrid, x: f64) -> Option<(f64, f64)> {
    let c = g.support();
    let hi = (-x).min(c);
    (hi > -c).then_some((-c, hi))
}

/// `int (2^m y - k)(e^{-x} - e^y) sin(pi (2^m y - k)) dy` for every k.
fn sine_terms(g: &SwiftGrid, lo: f64, hi: f64, x: f64) -> Vec<f64> {
    let s = g.scale();
    let p = PI * s;
    let i0 = payoff_transform(p, lo, hi, x);
    let i1 = payoff_moment_transform(p, lo, hi, x);
    g.indices()
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (i1 * s - i0 * k as f64).im
        })
        .collect()
}

fn index_mod(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// `sum_j w_j Re{e^{-i w_j k} G_j}` for every k via one FFT, on mid-point
/// or trapezoid nodes.
fn cosine_sums(
    g: &SwiftGrid,
    midpoint: bool,
    exec: Execution,
    transform: impl Fn(f64) -> Complex64 + Sync + Send,
) -> Result<Vec<f64>> {
    let j = g.j_payoff;
    let n = 2 * j;
    let jf = j as f64;
    let s = g.scale();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    if midpoint {
        let vals = exec.map_range(1..j + 1, |i| transform(s * PI * (i as f64 - 0.5) / jf));
        buf[1..=j].copy_from_slice(&vals);
    } else {
        let vals = exec.map_range(0..j + 1, |i| transform(s * PI * i as f64 / jf));
        buf[..=j].copy_from_slice(&vals);
        buf[0] *= 0.5;
        buf[j] *= 0.5;
    }
    let spec = fft_forward(&buf)?;
    Ok(g.indices()
        .map(|k| {
            let v = spec[index_mod(k, n)];
            if midpoint {
                (Complex64::from_polar(1.0, PI * k as f64 / n as f64) * v).re
            } else {
                v.re
            }
        })
        .collect())
}

/// Nodes and weights of a composite rule on `[lo, hi]`.
fn composite_rule(kind: PayoffKind, n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let d = hi - lo;
    match kind {
        PayoffKind::DirectMidpoint => {
            let h = d / n as f64;
            ((0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(), vec![h; n])
        }
        PayoffKind::DirectTrapezoid => {
            let h = d / (n - 1) as f64;
            let w = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
            ((0..n).map(|i| lo + i as f64 * h).collect(), w)
        }
        PayoffKind::DirectSimpson => {
            let h = d / (n - 1) as f64;
            let w = (0..n)
                .map(|i| {
                    let base = if i == 0 || i == n - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    base * h / 3.0
                })
                .collect();
            ((0..n).map(|i| lo + i as f64 * h).collect(), w)
        }
        PayoffKind::DirectBoole => {
            let h = d / (n - 1) as f64;
            let w = (0..n)
                .map(|i| {
                    let base = if i == 0 || i == n - 1 {
                        7.0
                    } else {
                        match i % 4 {
                            0 => 14.0,
                            2 => 12.0,
                            _ => 32.0,
                        }
                    };
                    base * 2.0 * h / 45.0
                })
                .collect();
            ((0..n).map(|i| lo + i as f64 * h).collect(), w)
        }
        _ => unreachable!("not a direct rule"),
    }
}

pub fn payoff_coeffs(
    contract: &VanillaContract,
    g: &SwiftGrid,
    v: PayoffVariant,
) -> Result<CoefficientVector> {
    payoff_coeffs_with(contract, g, v, Execution::default())
}

/// Put coefficients `V_{m,k}`, `k = 1 - kappa ..= kappa`.
pub fn payoff_coeffs_with(
    contract: &VanillaContract,
    g: &SwiftGrid,
    v: PayoffVariant,
    exec: Execution,
) -> Result<CoefficientVector> {
    contract.validate()?;
    g.validate()?;
    let f = contract.forward;
    let x = contract.log_moneyness();
    let root = 2f64.powf(g.m as f64 / 2.0);
    let jf = g.j_payoff as f64;
    let zeros = || CoefficientVector::new(g.m, g.kappa, vec![0.0; 2 * g.kappa]);

    let values = match v.kind {
        PayoffKind::VietaStrike => {
            let c = g.support();
            let sums = cosine_sums(g, true, exec, |p| payoff_transform(p, -c, 0.0, 0.0))?;
            let norm = contract.strike * root / jf;
            sums.into_iter().map(|s| norm * s).collect()
        }
        PayoffKind::Sem0 | PayoffKind::Fem0 | PayoffKind::Fem1 => {
            let Some((lo, hi)) = forward_range(g, x) else {
                return zeros();
            };
            let midpoint = v.kind == PayoffKind::Sem0;
            let sums = cosine_sums(g, midpoint, exec, |p| payoff_transform(p, lo, hi, x))?;
            let norm = f * root / jf;
            let correction = match v.kind {
                PayoffKind::Sem0 => -PI * f * root / (24.0 * jf * jf),
                PayoffKind::Fem1 => PI * f * root / (12.0 * jf * jf),
                _ => 0.0,
            };
            if correction == 0.0 {
                sums.into_iter().map(|s| norm * s).collect()
            } else {
                let sine = sine_terms(g, lo, hi, x);
                sums.iter().zip(&sine).map(|(s, t)| norm * s + correction * t).collect()
            }
        }
        kind => {
            let Some((lo, hi)) = forward_range(g, x) else {
                return zeros();
            };
            let n = v.direct_nodes(g.j_payoff)?;
            let (nodes, weights) = composite_rule(kind, n, lo, hi);
            let ex = (-x).exp();
            let weighted: Vec<f64> =
                nodes.iter().zip(&weights).map(|(y, w)| w * (ex - y.exp())).collect();
            let s = g.scale();
            let ks: Vec<i64> = g.indices().collect();
            exec.map_slice(&ks, |&k| {
                let terms: Vec<f64> = nodes
                    .iter()
                    .zip(&weighted)
                    .map(|(y, w)| w * sinc(s * y - k as f64))
                    .collect();
                f * root * pairwise_sum(&terms)
            })
        }
    };
    CoefficientVector::new(g.m, g.kappa, values)
}

/// `V_{m,k}` by adaptive quadrature of the truncated sinc integral, split at
/// the zeros of the sinc; absolute tolerance `1e-13` in units of `F`.
pub fn payoff_oracle(contract: &VanillaContract, g: &SwiftGrid, k: i64) -> Result<f64> {
    payoff_oracle_tol(contract, g, k, 1e-13)
}

pub fn payoff_oracle_tol(
    contract: &VanillaContract,
    g: &SwiftGrid,
    k: i64,
    abs_tol: f64,
) -> Result<f64> {
    contract.validate()?;
    g.validate()?;
    let x = contract.log_moneyness();
    let Some((lo, hi)) = forward_range(g, x) else {
        return Ok(0.0);
    };
    let s = g.scale();
    let ex = (-x).exp();
    let integrand = |y: f64| (ex - y.exp()) * sinc(s * y - k as f64);
    let mut edges = vec![lo];
    let first = (s * lo - k as f64).floor() as i64 + 1;
    let last = (s * hi - k as f64).ceil() as i64 - 1;
    for n in first..=last {
        edges.push((n + k) as f64 / s);
    }
    edges.push(hi);
    let root = 2f64.powf(g.m as f64 / 2.0);
    let scale = contract.forward * root;
    let tol = abs_tol / scale / (edges.len() - 1) as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in edges.windows(2) {
        let r = integrate_adaptive(integrand, w[0], w[1], tol, 0.0, 400);
        total += r.value;
        err += r.abs_error;
    }
    if err * scale > abs_tol {
        return Err(SwiftError::QuadratureNotConverged {
            achieved: err * scale,
            requested: abs_tol,
        });
    }
    Ok(scale * total)
}
