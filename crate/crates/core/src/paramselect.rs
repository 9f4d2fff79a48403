//! Choice of the scale `m`, the truncation `c`, `kappa` and `J`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::{
    density_coeffs, density_sum_residual_with, CfEvaluationCache, DensityVariant, ResidualSum,
    SwiftGrid,
};
use crate::error::{invalid, Result, SwiftError};
use crate::models::CharacteristicFunction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleRule {
    /// `(2^m pi)^{1-nu} / (2 pi nu T) (|fhat(-2^m pi)| + |fhat(2^m pi)|)`.
    #[default]
    Maree,
    /// `(|fhat(-2^m pi)| + |fhat(2^m pi)|) / (2 pi)`, free of the maturity.
    Leitao,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JRule {
    /// `log2 J = ceil(log2(pi kappa))`.
    #[default]
    PiKappa,
    /// `log2 J = ceil(log2 kappa)`.
    Kappa,
    /// `log2 J = ceil(log2 kappa) + 1`.
    KappaPlus1,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineRule {
    /// Increase `m` with `c` fixed.
    Romo,
    /// Grow `c` at fixed `m`.
    #[default]
    Leitao,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub eps_m: f64,
    pub eps_f: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub scale_rule: ScaleRule,
    pub j_rule: JRule,
    pub refine_rule: RefineRule,
    /// Quadrature used for the density-sum residual during refinement.
    pub residual_density: DensityVariant,
    pub residual_sum: ResidualSum,
    /// Factor applied to `c` per Leitao step.
    pub growth: f64,
    pub max_m: u32,
    pub max_kappa: usize,
    pub max_iterations: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_m: 1e-8,
            eps_f: 1e-8,
            l: 8.0,
            scale_rule: ScaleRule::Maree,
            j_rule: JRule::PiKappa,
            refine_rule: RefineRule::Leitao,
            residual_density: DensityVariant::Trapezoid,
            residual_sum: ResidualSum::EndpointHalved,
            growth: 2f64.powf(0.25),
            max_m: 25,
            max_kappa: 1 << 20,
            max_iterations: 200,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_m", self.eps_m), ("eps_f", self.eps_f)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.l >= 0.0 && self.l.is_finite()) {
            return Err(invalid("L", format!("must be nonnegative, got {}", self.l)));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(invalid("growth", format!("must exceed 1, got {}", self.growth)));
        }
        if self.max_kappa == 0 || self.max_iterations == 0 {
            return Err(invalid("max_kappa", "caps must be positive"));
        }
        Ok(())
    }
}

/// One refinement step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub iter: usize,
    pub m: u32,
    pub kappa: usize,
    pub log2_j: u32,
    pub c: f64,
    pub eps_f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
}

impl SelectionTrace {
    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("trace is never empty")
    }
}

/// Scale residual at `m`.
pub fn scale_residual(cf: &dyn CharacteristicFunction, m: u32, rule: ScaleRule) -> f64 {
    let w = 2f64.powi(m as i32) * PI;
    let ends = cf.eval(-w).norm() + cf.eval(w).norm();
    match rule {
        ScaleRule::Leitao => ends / (2.0 * PI),
        ScaleRule::Maree => {
            let nu = cf.decay_order();
            w.powf(1.0 - nu) / (2.0 * PI * nu * cf.maturity()) * ends
        }
    }
}

/// Smallest `m >= m_start` whose scale residual is within `eps_m`.
pub fn select_scale(cf: &dyn CharacteristicFunction, cfg: &ToleranceConfig, m_start: u32) -> Result<u32> {
    cfg.validate()?;
    if cfg.scale_rule == ScaleRule::Maree && !cf.decay_known() {
        return Err(invalid("scale_rule", "decay order unknown for this model"));
    }
    let mut last = f64::NAN;
    for m in m_start..=cfg.max_m {
        last = scale_residual(cf, m, cfg.scale_rule);
        if last <= cfg.eps_m {
            return Ok(m);
        }
    }
    Err(SwiftError::ScaleNotFound { m: cfg.max_m, eps_m: last, tolerance: cfg.eps_m })
}

/// `c = |c1| + L sqrt(|c2| + sqrt(|c4|))`.
pub fn initial_halfwidth(cf: &dyn CharacteristicFunction, cfg: &ToleranceConfig) -> f64 {
    cf.cumulants().halfwidth(cfg.l)
}

/// `log2 J` for a given `kappa`.
pub fn log2_j(kappa: usize, rule: JRule) -> u32 {
    let ceil_log2 = kappa.next_power_of_two().trailing_zeros();
    match rule {
        JRule::Kappa => ceil_log2,
        JRule::KappaPlus1 => ceil_log2 + 1,
        JRule::PiKappa => {
            let target = PI * kappa as f64;
            (0..usize::BITS).find(|&p| (1u64 << p) as f64 >= target).expect("kappa fits")
        }
    }
}

/// `kappa = ceil(2^m c)` and `J` by the configured rule.
pub fn grid_from_halfwidth(c: f64, m: u32, cfg: &ToleranceConfig) -> Result<SwiftGrid> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("c", format!("must be positive, got {c}")));
    }
    let kappa = (2f64.powi(m as i32) * c).ceil().max(1.0);
    if kappa > usize::MAX as f64 / 8.0 {
        return Err(invalid("c", format!("kappa {kappa} is out of range")));
    }
    let kappa = kappa as usize;
    let j = 1usize << log2_j(kappa, cfg.j_rule);
    SwiftGrid::new(m, kappa, j, j, c)
}

/// Density-sum residual of a grid under the configured rule.
pub fn residual(
    cf: &dyn CharacteristicFunction,
    g: &SwiftGrid,
    cfg: &ToleranceConfig,
    cache: &mut CfEvaluationCache,
) -> Result<f64> {
    let coeffs = density_coeffs(cf, g, cfg.residual_density, cache)?;
    Ok(density_sum_residual_with(&coeffs, cfg.residual_sum))
}

/// Iterates the configured rule until `eps_f` is met or a cap is hit. On
/// failure the grid with the smallest residual is returned and the trace is
/// flagged as not converged.
pub fn refine(
    cf: &dyn CharacteristicFunction,
    g0: &SwiftGrid,
    cfg: &ToleranceConfig,
    cache: &mut CfEvaluationCache,
) -> Result<(SwiftGrid, SelectionTrace)> {
    cfg.validate()?;
    g0.validate()?;
    let mut g = *g0;
    let mut steps = Vec::new();
    let mut best = (f64::INFINITY, g);
    for iter in 0..cfg.max_iterations {
        let eps = residual(cf, &g, cfg, cache)?;
        log::debug!("refine step {iter}: m={} kappa={} J={} eps_f={eps:e}", g.m, g.kappa, g.j_density);
        steps.push(TraceStep {
            iter,
            m: g.m,
            kappa: g.kappa,
            log2_j: g.log2_j_density(),
            c: g.c,
            eps_f: eps,
        });
        if eps < best.0 {
            best = (eps, g);
        }
        if eps <= cfg.eps_f {
            return Ok((g, SelectionTrace { steps, converged: true }));
        }
        let next = match cfg.refine_rule {
            RefineRule::None => None,
            RefineRule::Romo => (g.m < cfg.max_m)
                .then(|| grid_from_halfwidth(g.c, g.m + 1, cfg))
                .transpose()?,
            RefineRule::Leitao => Some(grid_from_halfwidth(g.c * cfg.growth, g.m, cfg)?),
        };
        match next {
            Some(n) if n.kappa <= cfg.max_kappa => g = n,
            _ => break,
        }
    }
    Ok((best.1, SelectionTrace { steps, converged: false }))
}

/// Full selection: scale, initial width, grid, refinement.
pub fn select_grid(
    cf: &dyn CharacteristicFunction,
    cfg: &ToleranceConfig,
    cache: &mut CfEvaluationCache,
) -> Result<(SwiftGrid, SelectionTrace)> {
    let m = select_scale(cf, cfg, 0)?;
    let g0 = grid_from_halfwidth(initial_halfwidth(cf, cfg), m, cfg)?;
    refine(cf, &g0, cfg, cache)
}
