use swift_core::density::{CfEvaluationCache, DensityVariant};
use swift_core::models::{heston_cf, HestonParams, VanillaContract};
use swift_core::paramselect::{select_grid, ToleranceConfig};
use swift_core::payoff::PayoffVariant;
use swift_core::pricer::{reference_price, swift_prices};
use swift_core::Execution;

fn main() -> swift_core::Result<()> {
    let cf = heston_cf(HestonParams::new(1.5, 0.04, 0.5, -0.7, 0.04)?, 1.0)?;
    let cfg = ToleranceConfig::default();
    let mut cache = CfEvaluationCache::new();
    let (grid, trace) = select_grid(&cf, &cfg, &mut cache)?;
    println!(
        "m={} kappa={} log2J={} after {} refinement steps",
        grid.m,
        grid.kappa,
        grid.log2_j_payoff(),
        trace.steps.len()
    );
    let contracts: Vec<VanillaContract> = [80.0, 90.0, 100.0, 110.0, 120.0]
        .iter()
        .map(|&k| VanillaContract::call(100.0, k, 1.0))
        .collect::<swift_core::Result<_>>()?;
    let prices = swift_prices(
        &cf,
        &contracts,
        &grid,
        DensityVariant::MidpointVieta,
        PayoffVariant::default(),
        &mut cache,
        Execution::Parallel,
    )?;
    for (c, p) in contracts.iter().zip(&prices) {
        let r = reference_price(&cf, c)?;
        println!("K={:>5} call={:.10} error={:+.2e}", c.strike, p.price, p.price - r);
    }
    Ok(())
}
