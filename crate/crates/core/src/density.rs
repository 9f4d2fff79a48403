//! Density coefficients `c_{m,k}` from the characteristic function.
//!
//! Every rule discretizes
//! `c_{m,k} = (2^{m/2} / pi) int_0^pi Re{fhat(2^m s) e^{i s k}} ds`
//! and is assembled with one FFT of length `2J`; bins are read modulo `2J`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SwiftError};
use crate::exec::Execution;
use crate::models::CharacteristicFunction;
use crate::numerics::{fft_forward, integrate_adaptive, pairwise_sum};

/// Discretization of the wavelet expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwiftGrid {
    pub m: u32,
    pub kappa: usize,
    pub j_density: usize,
    pub j_payoff: usize,
    /// Truncation half-width the grid was derived from.
    pub c: f64,
}

impl SwiftGrid {
    pub fn new(m: u32, kappa: usize, j_density: usize, j_payoff: usize, c: f64) -> Result<Self> {
        let g = Self { m, kappa, j_density, j_payoff, c };
        g.validate()?;
        Ok(g)
    }

    /// Grid with both `J` equal and `c = kappa / 2^m`.
    pub fn uniform(m: u32, kappa: usize, j: usize) -> Result<Self> {
        Self::new(m, kappa, j, j, kappa as f64 / 2f64.powi(m as i32))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 {
            return Err(invalid("kappa", "must be positive"));
        }
        for j in [self.j_density, self.j_payoff] {
            if j == 0 || !j.is_power_of_two() {
                return Err(SwiftError::NotPowerOfTwo(j));
            }
        }
        if self.m > 60 {
            return Err(invalid("m", format!("{} is out of range", self.m)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(invalid("c", format!("{} must be positive and finite", self.c)));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        2f64.powi(self.m as i32)
    }

    /// Right end `kappa / 2^m` of the wavelet support.
    pub fn support(&self) -> f64 {
        self.kappa as f64 / self.scale()
    }

    pub fn log2_j_density(&self) -> u32 {
        self.j_density.trailing_zeros()
    }

    pub fn log2_j_payoff(&self) -> u32 {
        self.j_payoff.trailing_zeros()
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        (1 - self.kappa as i64)..=(self.kappa as i64)
    }
}

/// Same grid with the density `J` doubled. Under the trapezoidal family the
/// next [`density_coeffs`] call samples only the `J` new odd-index nodes.
pub fn double_j(g: &SwiftGrid) -> SwiftGrid {
    SwiftGrid { j_density: 2 * g.j_density, ..*g }
}

/// Coefficients for `k = 1 - kappa ..= kappa`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    pub m: u32,
    pub kappa: usize,
    pub values: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(m: u32, kappa: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * kappa {
            return Err(SwiftError::LengthMismatch { left: values.len(), right: 2 * kappa });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("coefficients", "non-finite value"));
        }
        Ok(Self { m, kappa, values })
    }

    pub fn get(&self, k: i64) -> f64 {
        self.values[(k + self.kappa as i64 - 1) as usize]
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        (1 - self.kappa as i64)..=(self.kappa as i64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.indices().zip(self.values.iter().copied())
    }

    pub fn dot(&self, other: &CoefficientVector) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(SwiftError::LengthMismatch {
                left: self.values.len(),
                right: other.values.len(),
            });
        }
        let terms: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(pairwise_sum(&terms))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityVariant {
    /// Mid-point rule; identical to the Vieta cosine expansion.
    MidpointVieta,
    /// Trapezoidal rule with half weights at both ends.
    #[default]
    Trapezoid,
    /// Trapezoid plus the first-derivative Euler-Maclaurin term.
    TrapezoidD1,
    /// `2/3` mid-point plus `1/3` trapezoid.
    Simpson,
}

impl DensityVariant {
    pub const ALL: [DensityVariant; 4] = [
        DensityVariant::MidpointVieta,
        DensityVariant::Trapezoid,
        DensityVariant::TrapezoidD1,
        DensityVariant::Simpson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DensityVariant::MidpointVieta => "midpoint_vieta",
            DensityVariant::Trapezoid => "trapezoid",
            DensityVariant::TrapezoidD1 => "trapezoid_d1",
            DensityVariant::Simpson => "simpson",
        }
    }
}

/// A sampling frequency `pi * num * 2^exp` with `num` odd (or the origin).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    num: u64,
    exp: i32,
}

impl NodeKey {
    pub const ORIGIN: NodeKey = NodeKey { num: 0, exp: 0 };

    /// `pi * num * 2^exp`, normalized.
    pub fn new(num: u64, exp: i32) -> Self {
        if num == 0 {
            return Self::ORIGIN;
        }
        let t = num.trailing_zeros();
        Self { num: num >> t, exp: exp + t as i32 }
    }

    /// Mid-point node `2^m pi (j - 1/2) / J`, `j = 1..=J`.
    pub fn midpoint(m: u32, j: usize, big_j: usize) -> Self {
        Self::new(2 * j as u64 - 1, m as i32 - (2 * big_j).trailing_zeros() as i32)
    }

    /// Trapezoid node `2^m pi j / J`, `j = 0..=J`.
    pub fn trapezoid(m: u32, j: usize, big_j: usize) -> Self {
        Self::new(j as u64, m as i32 - big_j.trailing_zeros() as i32)
    }

    pub fn frequency(&self) -> f64 {
        PI * self.num as f64 * 2f64.powi(self.exp)
    }
}

/// Memo of `fhat` samples for one characteristic function.
///
/// Single-owner: a cache must only ever be used with the characteristic
/// function it was first filled from.
#[derive(Debug, Default)]
pub struct CfEvaluationCache {
    values: HashMap<NodeKey, Complex64>,
    evaluations: usize,
    exec: Execution,
}

impl CfEvaluationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_execution(exec: Execution) -> Self {
        Self { exec, ..Self::default() }
    }

    /// Characteristic-function evaluations so far, the origin excluded.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn clear(&mut self) {
        self.values.clear();
        self.evaluations = 0;
    }

    pub fn sample(&mut self, cf: &dyn CharacteristicFunction, keys: &[NodeKey]) -> Vec<Complex64> {
        let mut missing: Vec<NodeKey> =
            keys.iter().copied().filter(|k| !self.values.contains_key(k)).collect();
        missing.sort_unstable();
        missing.dedup();
        let fresh = self.exec.map_slice(&missing, |k| cf.eval(k.frequency()));
        self.evaluations += missing.iter().filter(|k| **k != NodeKey::ORIGIN).count();
        self.values.extend(missing.into_iter().zip(fresh));
        keys.iter().map(|k| self.values[k]).collect()
    }
}

fn index_mod(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// `e^{-i w shift}` applied to the samples, for a density of `X + shift`.
fn shifted(samples: &mut [Complex64], keys: &[NodeKey], shift: f64) {
    if shift == 0.0 {
        return;
    }
    for (s, k) in samples.iter_mut().zip(keys) {
        *s *= Complex64::from_polar(1.0, -k.frequency() * shift);
    }
}

fn midpoint_coeffs(
    cf: &dyn CharacteristicFunction,
    g: &SwiftGrid,
    cache: &mut CfEvaluationCache,
    shift: f64,
) -> Result<Vec<f64>> {
    let j = g.j_density;
    let n = 2 * j;
    let keys: Vec<NodeKey> = (1..=j).map(|i| NodeKey::midpoint(g.m, i, j)).collect();
    let mut samples = cache.sample(cf, &keys);
    shifted(&mut samples, &keys, shift);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[1..=j].copy_from_slice(&samples);
    let spec = fft_forward(&buf)?;
    let norm = 2f64.powf(g.m as f64 / 2.0) / j as f64;
    Ok(g.indices()
        .map(|k| {
            let twist = Complex64::from_polar(1.0, -PI * (k as f64) / n as f64);
            norm * (twist * spec[index_mod(-k, n)]).re
        })
        .collect())
}

fn trapezoid_coeffs(
    cf: &dyn CharacteristicFunction,
    g: &SwiftGrid,
    cache: &mut CfEvaluationCache,
    shift: f64,
) -> Result<Vec<f64>> {
    let j = g.j_density;
    let n = 2 * j;
    let keys: Vec<NodeKey> = (0..=j).map(|i| NodeKey::trapezoid(g.m, i, j)).collect();
    let mut samples = cache.sample(cf, &keys);
    shifted(&mut samples, &keys, shift);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..=j].copy_from_slice(&samples);
    buf[0] *= 0.5;
    buf[j] *= 0.5;
    let spec = fft_forward(&buf)?;
    let norm = 2f64.powf(g.m as f64 / 2.0) / j as f64;
    Ok(g.indices().map(|k| norm * spec[index_mod(-k, n)].re).collect())
}

/// First-derivative Euler-Maclaurin term of the trapezoidal rule.
fn trapezoid_d1_term(cf: &dyn CharacteristicFunction, g: &SwiftGrid, shift: f64) -> Vec<f64> {
    let s = g.scale();
    let top = s * PI;
    let shift_factor = |w: f64| Complex64::from_polar(1.0, -w * shift);
    let f = |w: f64| cf.eval(w) * shift_factor(w);
    let df = |w: f64| (cf.derivative(w) - Complex64::new(0.0, shift) * cf.eval(w)) * shift_factor(w);
    let (f_top, f_0, df_top, df_0) = (f(top), f(0.0), df(top), df(0.0));
    let jf = g.j_density as f64;
    let norm = PI * 2f64.powf(g.m as f64 / 2.0) / (12.0 * jf * jf);
    g.indices()
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let kf = k as f64;
            let z = (df_top * sign - df_0) * s + Complex64::new(0.0, kf) * (f_top * sign - f_0);
            -norm * z.re
        })
        .collect()
}

fn coeffs_impl(
    cf: &dyn CharacteristicFunction,
    g: &SwiftGrid,
    v: DensityVariant,
    cache: &mut CfEvaluationCache,
    shift: f64,
) -> Result<CoefficientVector> {
    g.validate()?;
    if g.kappa > g.j_density {
        log::warn!(
            "kappa = {} exceeds J = {}: coefficients near k = kappa lose accuracy",
            g.kappa,
            g.j_density
        );
    }
    let values = match v {
        DensityVariant::MidpointVieta => midpoint_coeffs(cf, g, cache, shift)?,
        DensityVariant::Trapezoid => trapezoid_coeffs(cf, g, cache, shift)?,
        DensityVariant::TrapezoidD1 => {
            let mut t = trapezoid_coeffs(cf, g, cache, shift)?;
            for (a, b) in t.iter_mut().zip(trapezoid_d1_term(cf, g, shift)) {
                *a += b;
            }
            t
        }
        DensityVariant::Simpson => {
            let mid = midpoint_coeffs(cf, g, cache, shift)?;
            let trap = trapezoid_coeffs(cf, g, cache, shift)?;
            mid.iter().zip(&trap).map(|(a, b)| (2.0 * a + b) / 3.0).collect()
        }
    };
    CoefficientVector::new(g.m, g.kappa, values)
}

/// `c_{m,k}` of the density of `X` for `k = 1 - kappa ..= kappa`.
pub fn density_coeffs(
    cf: &dyn CharacteristicFunction,
    g: &SwiftGrid,
    v: DensityVariant,
    cache: &mut CfEvaluationCache,
) -> Result<CoefficientVector> {
    coeffs_impl(cf, g, v, cache, 0.0)
}

/// `c_{m,k}` of the density of `X + shift`, reusing the samples of `X`.
pub fn density_coeffs_shifted(
    cf: &dyn CharacteristicFunction,
    g: &SwiftGrid,
    v: DensityVariant,
    cache: &mut CfEvaluationCache,
    shift: f64,
) -> Result<CoefficientVector> {
    coeffs_impl(cf, g, v, cache, shift)
}

/// How the coefficients are summed in the density-sum residual.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSum {
    /// `sum_{k=1-kappa}^{kappa} c_{m,k}`.
    Plain,
    /// Trapezoidal sum over the support: the end coefficients
    /// `k = 1 - kappa` and `k = kappa` count half.
    #[default]
    EndpointHalved,
}

/// `|1 - 2^{-m/2} sum_k c_{m,k}|`.
pub fn density_sum_residual(coeffs: &CoefficientVector) -> f64 {
    density_sum_residual_with(coeffs, ResidualSum::Plain)
}

pub fn density_sum_residual_with(coeffs: &CoefficientVector, rule: ResidualSum) -> f64 {
    let mut terms = coeffs.values.clone();
    if rule == ResidualSum::EndpointHalved {
        let last = terms.len() - 1;
        terms[0] *= 0.5;
        terms[last] *= 0.5;
    }
    (1.0 - pairwise_sum(&terms) / 2f64.powf(coeffs.m as f64 / 2.0)).abs()
}

/// `c_{m,k}` by adaptive quadrature of the Parseval integral; the reference
/// for coefficient error dumps.
pub fn density_coeff_oracle(
    cf: &dyn CharacteristicFunction,
    m: u32,
    k: i64,
    abs_tol: f64,
) -> Result<f64> {
    let s = 2f64.powi(m as i32);
    let kf = k as f64;
    let integrand = |t: f64| (cf.eval(s * t) * Complex64::from_polar(1.0, t * kf)).re;
    // one panel per half period of e^{i t k}
    let panels = (kf.abs().ceil() as usize).clamp(1, 4096);
    let h = PI / panels as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for p in 0..panels {
        let r = integrate_adaptive(
            integrand,
            p as f64 * h,
            (p + 1) as f64 * h,
            abs_tol / panels as f64,
            0.0,
            200,
        );
        total += r.value;
        err += r.abs_error;
    }
    let norm = 2f64.powf(m as f64 / 2.0) / PI;
    if err * norm > abs_tol {
        return Err(SwiftError::QuadratureNotConverged { achieved: err * norm, requested: abs_tol });
    }
    Ok(norm * total)
}
