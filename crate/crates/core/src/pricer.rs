//! Option prices from coefficient vectors, the COS baseline, an
//! independent reference pricer and error statistics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::density::{
    density_coeffs, density_coeffs_shifted, density_sum_residual_with, CfEvaluationCache,
    CoefficientVector, DensityVariant, ResidualSum, SwiftGrid,
};
use crate::error::{invalid, Result, SwiftError};
use crate::exec::Execution;
use crate::models::{CharacteristicFunction, OptionStyle, VanillaContract};
use crate::numerics::{integrate_adaptive, pairwise_sum};
use crate::payoff::{payoff_coeffs_with, PayoffKind, PayoffVariant};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PriceResult {
    /// Price of the requested style.
    pub price: f64,
    pub put_price: f64,
    pub style: OptionStyle,
    pub grid: SwiftGrid,
    #[serde(skip)]
    pub density: DensityVariant,
    #[serde(skip)]
    pub payoff: PayoffVariant,
    /// Density-sum residual of the coefficients used.
    pub eps_f: f64,
    /// Characteristic-function evaluations held by the session cache.
    pub evaluations: usize,
    /// Set when the price fell below `-1e-8 F`, a sign of truncation failure.
    pub negative: bool,
}

fn finish(
    contract: &VanillaContract,
    put_sum: f64,
    g: &SwiftGrid,
    dv: DensityVariant,
    pv: PayoffVariant,
    eps_f: f64,
    evaluations: usize,
) -> PriceResult {
    let put_price = contract.discount * put_sum;
    let price = match contract.style {
        OptionStyle::Put => put_price,
        OptionStyle::Call => put_price + contract.parity_offset(),
    };
    let negative = price < -1e-8 * contract.forward;
    if negative {
        log::warn!("negative price {price:e} at strike {}", contract.strike);
    }
    PriceResult {
        price,
        put_price,
        style: contract.style,
        grid: *g,
        density: dv,
        payoff: pv,
        eps_f,
        evaluations,
        negative,
    }
}

/// `B sum_k c_{m,k} V_{m,k}` with a fresh evaluation cache.
pub fn swift_price(
    cf: &dyn CharacteristicFunction,
    contract: &VanillaContract,
    g: &SwiftGrid,
    dv: DensityVariant,
    pv: PayoffVariant,
) -> Result<PriceResult> {
    let mut cache = CfEvaluationCache::new();
    let mut out = swift_prices(cf, std::slice::from_ref(contract), g, dv, pv, &mut cache, Execution::default())?;
    Ok(out.remove(0))
}

/// Prices a strike grid. Forward-centered payoffs share one density vector
/// computed at `x = 0`; the strike-centered variant shifts the density per
/// strike.
pub fn swift_prices(
    cf: &dyn CharacteristicFunction,
    contracts: &[VanillaContract],
    g: &SwiftGrid,
    dv: DensityVariant,
    pv: PayoffVariant,
    cache: &mut CfEvaluationCache,
    exec: Execution,
) -> Result<Vec<PriceResult>> {
    g.validate()?;
    for c in contracts {
        c.validate()?;
    }
    if pv.kind == PayoffKind::VietaStrike {
        let mut out = Vec::with_capacity(contracts.len());
        for c in contracts {
            let density = density_coeffs_shifted(cf, g, dv, cache, c.log_moneyness())?;
            let eps_f = density_sum_residual_with(&density, ResidualSum::default());
            let payoff = payoff_coeffs_with(c, g, pv, exec)?;
            let sum = density.dot(&payoff)?;
            out.push(finish(c, sum, g, dv, pv, eps_f, cache.evaluations()));
        }
        return Ok(out);
    }
    let density = density_coeffs(cf, g, dv, cache)?;
    let eps_f = density_sum_residual_with(&density, ResidualSum::default());
    let evaluations = cache.evaluations();
    let sums: Vec<Result<f64>> = exec.map_slice(contracts, |c| {
        // strikes already fan out, so each payoff runs sequentially
        let payoff = payoff_coeffs_with(c, g, pv, Execution::Sequential)?;
        density.dot(&payoff)
    });
    contracts
        .iter()
        .zip(sums)
        .map(|(c, s)| Ok(finish(c, s?, g, dv, pv, eps_f, evaluations)))
        .collect()
}

/// Price from precomputed coefficient vectors.
pub fn assemble_price(
    contract: &VanillaContract,
    density: &CoefficientVector,
    payoff: &CoefficientVector,
) -> Result<f64> {
    let put = contract.discount * density.dot(payoff)?;
    Ok(match contract.style {
        OptionStyle::Put => put,
        OptionStyle::Call => put + contract.parity_offset(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosResult {
    pub price: f64,
    pub a: f64,
    pub b: f64,
    pub terms: usize,
}

/// COS method with `terms` cosines on `c1 + x +- L sqrt(c2 + sqrt(c4))` in
/// the variable `ln(F_T / K)`.
pub fn cos_price(
    cf: &dyn CharacteristicFunction,
    contract: &VanillaContract,
    terms: usize,
    l: f64,
) -> Result<CosResult> {
    contract.validate()?;
    if terms < 2 {
        return Err(invalid("M", format!("needs at least 2 terms, got {terms}")));
    }
    let cum = cf.cumulants();
    let x = contract.log_moneyness();
    let half = l * (cum.c2.abs() + cum.c4.abs().sqrt()).sqrt();
    let (a, b) = (cum.c1 + x - half, cum.c1 + x + half);
    let width = b - a;
    let k = contract.strike;
    let put_sum = if a >= 0.0 {
        0.0
    } else {
        let d = b.min(0.0);
        let terms_vec: Vec<f64> = (0..terms)
            .map(|n| {
                let u = n as f64 * PI / width;
                let chi = {
                    let (sd, cd) = ((u * (d - a)).sin(), (u * (d - a)).cos());
                    (cd * d.exp() - a.exp() + u * sd * d.exp()) / (1.0 + u * u)
                };
                let psi = if n == 0 { d - a } else { (u * (d - a)).sin() / u };
                let v = 2.0 / width * k * (psi - chi);
                // phi_y(u) = E[e^{i u (X + x)}]
                let phi = cf.eval(-u) * Complex64::from_polar(1.0, u * x);
                let term = (phi * Complex64::from_polar(1.0, -u * a)).re * v;
                if n == 0 {
                    0.5 * term
                } else {
                    term
                }
            })
            .collect();
        pairwise_sum(&terms_vec)
    };
    let put = contract.discount * put_sum;
    let price = match contract.style {
        OptionStyle::Put => put,
        OptionStyle::Call => put + contract.parity_offset(),
    };
    Ok(CosResult { price, a, b, terms })
}

/// Reference price from the one-dimensional inversion
/// `C = F - sqrt(F K) / pi int_0^inf Re{e^{i u k} phi(u - i/2)} / (u^2 + 1/4) du`,
/// `k = ln(F / K)`, integrated adaptively to `1e-10`.
pub fn reference_price(cf: &dyn CharacteristicFunction, contract: &VanillaContract) -> Result<f64> {
    reference_price_tol(cf, contract, 1e-10)
}

pub fn reference_price_tol(
    cf: &dyn CharacteristicFunction,
    contract: &VanillaContract,
    abs_tol: f64,
) -> Result<f64> {
    contract.validate()?;
    let (f, strike) = (contract.forward, contract.strike);
    let k = contract.log_moneyness();
    let scale = (f * strike).sqrt() / PI;
    let integrand = |u: f64| {
        let v = cf.phi(Complex64::new(u, -0.5)) * Complex64::from_polar(1.0, u * k);
        v.re / (u * u + 0.25)
    };
    let tol = abs_tol / scale;
    let panel_tol = tol / 256.0;
    let mut lo = 0.0;
    let mut width = 0.25;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut quiet = 0;
    loop {
        let hi = lo + width;
        let r = integrate_adaptive(integrand, lo, hi, panel_tol, 0.0, 200);
        total += r.value;
        err += r.abs_error;
        let envelope = cf.phi(Complex64::new(hi, -0.5)).norm() / (hi * hi + 0.25);
        quiet = if r.value.abs() < 1e-3 * panel_tol && envelope * hi < 1e-3 * panel_tol {
            quiet + 1
        } else {
            0
        };
        if quiet >= 3 {
            break;
        }
        if hi > 1e8 {
            return Err(SwiftError::QuadratureNotConverged { achieved: envelope * hi * scale, requested: abs_tol });
        }
        lo = hi;
        width = (2.0 * width).min(16.0);
    }
    if err > tol {
        return Err(SwiftError::QuadratureNotConverged { achieved: err * scale, requested: abs_tol });
    }
    let call = contract.discount * (f - scale * total);
    Ok(match contract.style {
        OptionStyle::Call => call,
        OptionStyle::Put => call - contract.parity_offset(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `computed - reference` per strike.
    pub errors: Vec<f64>,
    pub rmse: f64,
    /// Largest absolute error.
    pub mae: f64,
}

pub fn error_metrics(computed: &[f64], reference: &[f64]) -> Result<ErrorReport> {
    if computed.len() != reference.len() {
        return Err(SwiftError::LengthMismatch { left: computed.len(), right: reference.len() });
    }
    if computed.is_empty() {
        return Err(SwiftError::EmptyInput);
    }
    let errors: Vec<f64> = computed.iter().zip(reference).map(|(a, b)| a - b).collect();
    let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let rmse = (pairwise_sum(&squares) / errors.len() as f64).sqrt();
    let mae = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(ErrorReport { errors, rmse, mae })
}
