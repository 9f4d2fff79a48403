//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use swift_core::density::{
    density_coeff_oracle, density_coeffs, density_sum_residual_with, CfEvaluationCache,
    DensityVariant, ResidualSum, SwiftGrid,
};
use swift_core::models::{CharacteristicFunction, OptionStyle, VanillaContract};
use swift_core::paramselect::{
    grid_from_halfwidth, initial_halfwidth, refine, residual, select_scale, RefineRule,
    SelectionTrace, ToleranceConfig, TraceStep,
};
use swift_core::payoff::{payoff_coeffs, payoff_oracle_tol, PayoffKind, PayoffVariant};
use swift_core::pricer::{error_metrics, reference_price, swift_prices, PriceResult};
use swift_core::Execution;

use crate::config::{ModelSpec, Overrides, ParameterSet, RunConfig, StyleChoice};
use crate::csv::{float, Table};

/// Refinement stopped above `eps_f`; maps to exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("selection did not reach eps_f = {eps_f:e} (best {best:e}); trace written to {}", trace.display())]
pub struct SelectionFailed {
    pub eps_f: f64,
    pub best: f64,
    pub trace: PathBuf,
}

/// Table of the external parameter sets was requested without them.
#[derive(Debug, thiserror::Error)]
#[error("external parameters required: table 2 needs a config with a non-empty `sets` list")]
pub struct MissingParameters;

pub const CORNER_STRIKES: [f64; 6] = [100.0001, 101.0, 110.0, 200.0, 1000.0, 10000.0];

/// `(m, eps_f)` settings of the wide-density error table, `L = 8`.
pub const CORNER_ROWS: [(u32, f64); 9] = [
    (9, 1e-8),
    (9, 1e-4),
    (8, 1e-4),
    (8, 1e-6),
    (8, 1e-8),
    (7, 1e-8),
    (7, 1e-6),
    (6, 1e-6),
    (5, 1e-6),
];

pub fn trace_table(trace: &SelectionTrace) -> Table {
    let mut t = Table::new(&["iter", "m", "kappa", "log2J", "eps_f"]);
    for s in &trace.steps {
        t.push(vec![
            s.iter.to_string(),
            s.m.to_string(),
            s.kappa.to_string(),
            s.log2_j.to_string(),
            float(s.eps_f),
        ]);
    }
    t
}

fn model_of(cfg: &RunConfig) -> Result<ModelSpec> {
    cfg.model
        .context("no model configured: pass --model <path> or set `model` in the config")
}

fn contracts(cfg: &RunConfig) -> Result<Vec<VanillaContract>> {
    cfg.strikes
        .iter()
        .map(|&k| {
            let style = cfg.style.style_for(cfg.forward, k);
            Ok(VanillaContract::new(cfg.forward, k, cfg.maturity, cfg.discount, style)?)
        })
        .collect()
}

/// Scale, truncation and refinement as configured. A fixed `log2_j` skips
/// refinement and evaluates the residual once.
pub fn select(
    cf: &dyn CharacteristicFunction,
    cfg: &RunConfig,
    cache: &mut CfEvaluationCache,
) -> Result<(SwiftGrid, SelectionTrace)> {
    let tol = &cfg.tolerances;
    let m = match cfg.m {
        Some(m) => m,
        None => select_scale(cf, tol, 0)?,
    };
    let g0 = grid_from_halfwidth(initial_halfwidth(cf, tol), m, tol)?;
    let (mut g, trace) = match cfg.log2_j {
        Some(p) => {
            let g = SwiftGrid::new(m, g0.kappa, 1 << p, 1 << p, g0.c)?;
            let eps = residual(cf, &g, tol, cache)?;
            let step = TraceStep { iter: 0, m, kappa: g.kappa, log2_j: p, c: g.c, eps_f: eps };
            (g, SelectionTrace { steps: vec![step], converged: true })
        }
        None => refine(cf, &g0, tol, cache)?,
    };
    if let Some(p) = cfg.log2_j_density {
        g.j_density = 1 << p;
    }
    Ok((g, trace))
}

fn default_trace_path(cfg: &RunConfig) -> PathBuf {
    if let Some(t) = &cfg.trace {
        return t.clone();
    }
    match &cfg.out {
        Some(out) => out.with_extension("trace.csv"),
        None => PathBuf::from("selection_trace.csv"),
    }
}

fn fail_with_trace(cfg: &RunConfig, trace: &SelectionTrace) -> Result<()> {
    let path = default_trace_path(cfg);
    trace_table(trace).write(&path)?;
    let best = trace.steps.iter().map(|s| s.eps_f).fold(f64::INFINITY, f64::min);
    Err(SelectionFailed { eps_f: cfg.tolerances.eps_f, best, trace: path }.into())
}

pub fn price_line(r: &PriceResult, strike: f64) -> String {
    format!(
        "strike={strike} style={} price={} put={} m={} kappa={} log2J={} log2J_density={} eps_f={:e} evaluations={}{}",
        style_name(r.style),
        float(r.price),
        float(r.put_price),
        r.grid.m,
        r.grid.kappa,
        r.grid.log2_j_payoff(),
        r.grid.log2_j_density(),
        r.eps_f,
        r.evaluations,
        if r.negative { " negative=true" } else { "" },
    )
}

fn style_name(s: OptionStyle) -> &'static str {
    match s {
        OptionStyle::Put => "put",
        OptionStyle::Call => "call",
    }
}

pub fn cmd_price(cfg: &RunConfig) -> Result<Vec<String>> {
    let cf = model_of(cfg)?.build(cfg.maturity)?;
    let mut cache = CfEvaluationCache::new();
    let (g, trace) = select(cf.as_ref(), cfg, &mut cache)?;
    if !trace.converged {
        fail_with_trace(cfg, &trace)?;
    }
    let contracts = contracts(cfg)?;
    let results = swift_prices(
        cf.as_ref(),
        &contracts,
        &g,
        cfg.density,
        cfg.payoff_variant(),
        &mut cache,
        Execution::Parallel,
    )?;
    let mut lines = Vec::with_capacity(results.len());
    let mut t = Table::new(&[
        "strike", "style", "price", "put_price", "m", "kappa", "log2J", "eps_f", "evaluations",
    ]);
    for (c, r) in contracts.iter().zip(&results) {
        lines.push(price_line(r, c.strike));
        t.push(vec![
            float(c.strike),
            style_name(r.style).to_string(),
            float(r.price),
            float(r.put_price),
            r.grid.m.to_string(),
            r.grid.kappa.to_string(),
            r.grid.log2_j_payoff().to_string(),
            float(r.eps_f),
            r.evaluations.to_string(),
        ]);
    }
    if let Some(out) = &cfg.out {
        t.write(out)?;
    }
    Ok(lines)
}

pub fn cmd_select(cfg: &RunConfig) -> Result<Vec<String>> {
    let cf = model_of(cfg)?.build(cfg.maturity)?;
    let mut cache = CfEvaluationCache::new();
    let (g, trace) = select(cf.as_ref(), cfg, &mut cache)?;
    if !trace.converged {
        fail_with_trace(cfg, &trace)?;
    }
    if let Some(out) = &cfg.out {
        trace_table(&trace).write(out)?;
    }
    let mut lines: Vec<String> = trace
        .steps
        .iter()
        .map(|s| format!("iter={} m={} kappa={} log2J={} eps_f={:e}", s.iter, s.m, s.kappa, s.log2_j, s.eps_f))
        .collect();
    lines.push(format!(
        "selected m={} kappa={} log2J={} c={} evaluations={}",
        g.m,
        g.kappa,
        g.log2_j_payoff(),
        float(g.c),
        cache.evaluations()
    ));
    Ok(lines)
}

/// Both refinement rules from a deliberately narrow start (`m = 8`, `L = 4`
/// unless overridden) on the refinement example.
pub fn refinement_table(cfg: &RunConfig, ov: &Overrides) -> Result<Table> {
    let (model, maturity) = match cfg.model {
        Some(m) => (m, cfg.maturity),
        None => (ModelSpec::refinement_example(), 0.01),
    };
    let cf = model.build(maturity)?;
    let m = ov.m.or(cfg.m).unwrap_or(8);
    let base = ToleranceConfig { l: ov.l.unwrap_or(4.0), max_m: 22, ..cfg.tolerances };
    let mut t = Table::new(&["rule", "iter", "m", "kappa", "log2J", "eps_f"]);
    for rule in [RefineRule::Romo, RefineRule::Leitao] {
        let tol = ToleranceConfig { refine_rule: rule, ..base };
        let g0 = grid_from_halfwidth(initial_halfwidth(cf.as_ref(), &tol), m, &tol)?;
        let mut cache = CfEvaluationCache::new();
        let (_, trace) = refine(cf.as_ref(), &g0, &tol, &mut cache)?;
        let name = serde_json::to_value(rule)?.as_str().unwrap_or_default().to_string();
        for s in &trace.steps {
            t.push(vec![
                name.clone(),
                s.iter.to_string(),
                s.m.to_string(),
                s.kappa.to_string(),
                s.log2_j.to_string(),
                float(s.eps_f),
            ]);
        }
    }
    Ok(t)
}

/// Out-of-the-money error statistics for every density and payoff
/// combination on each configured parameter set.
pub fn otm_error_table(cfg: &RunConfig) -> Result<Table> {
    if cfg.sets.is_empty() {
        return Err(MissingParameters.into());
    }
    let densities = [DensityVariant::MidpointVieta, DensityVariant::Trapezoid, DensityVariant::TrapezoidD1];
    let payoffs = [PayoffKind::Sem0, PayoffKind::Fem0, PayoffKind::Fem1];
    let mut t = Table::new(&["set", "density", "payoff", "m", "kappa", "log2J", "rmse", "mae"]);
    for set in &cfg.sets {
        let cf = set.model.build(set.maturity)?;
        let contracts = set_contracts(set)?;
        let refs = contracts
            .iter()
            .map(|c| Ok(reference_price(cf.as_ref(), c)?))
            .collect::<Result<Vec<f64>>>()?;
        let tol = ToleranceConfig { l: set.l, ..cfg.tolerances };
        let g0 = grid_from_halfwidth(initial_halfwidth(cf.as_ref(), &tol), set.m, &tol)?;
        let j = 1usize << set.log2_j;
        let g = SwiftGrid::new(set.m, g0.kappa, j, j, g0.c)?;
        let mut cache = CfEvaluationCache::new();
        for dv in densities {
            for pk in payoffs {
                let res = swift_prices(
                    cf.as_ref(),
                    &contracts,
                    &g,
                    dv,
                    PayoffVariant::new(pk),
                    &mut cache,
                    Execution::Parallel,
                )?;
                let prices: Vec<f64> = res.iter().map(|r| r.price).collect();
                let rep = error_metrics(&prices, &refs)?;
                t.push(vec![
                    set.label.clone(),
                    dv.name().to_string(),
                    pk.name().to_string(),
                    g.m.to_string(),
                    g.kappa.to_string(),
                    set.log2_j.to_string(),
                    float(rep.rmse),
                    float(rep.mae),
                ]);
            }
        }
    }
    Ok(t)
}

fn set_contracts(set: &ParameterSet) -> Result<Vec<VanillaContract>> {
    set.strikes()
        .into_iter()
        .map(|k| {
            let style = StyleChoice::Otm.style_for(set.forward, k);
            Ok(VanillaContract::new(set.forward, k, set.maturity, 1.0, style)?)
        })
        .collect()
}

/// Signed call-price errors on the wide-density corner case. `--m` and
/// `--eps-f` restrict the rows computed.
pub fn corner_error_table(cfg: &RunConfig, ov: &Overrides) -> Result<(Table, Table)> {
    let (model, maturity, forward) = match cfg.model {
        Some(m) => (m, cfg.maturity, cfg.forward),
        None => (ModelSpec::wide_corner(), 10.0, 100.0),
    };
    let cf = model.build(maturity)?;
    let contracts = CORNER_STRIKES
        .iter()
        .map(|&k| Ok(VanillaContract::call(forward, k, maturity)?))
        .collect::<Result<Vec<_>>>()?;
    let refs = contracts
        .iter()
        .map(|c| Ok(reference_price(cf.as_ref(), c)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut reference = Table::new(&["strike", "call", "put"]);
    for (c, r) in contracts.iter().zip(&refs) {
        reference.push(vec![float(c.strike), float(*r), float(r - c.parity_offset())]);
    }

    let l = ov.l.unwrap_or(8.0);
    let mut t = Table::new(&[
        "m", "L", "eps_f", "log2J", "err_100.0001", "err_101", "err_110", "err_200", "err_1000",
        "err_10000",
    ]);
    let rows = CORNER_ROWS
        .iter()
        .filter(|(m, e)| ov.m.map_or(true, |x| x == *m) && ov.eps_f.map_or(true, |x| x == *e))
        .copied()
        .collect::<Vec<_>>();
    if rows.is_empty() {
        let known: Vec<String> = CORNER_ROWS.iter().map(|(m, e)| format!("m={m} eps_f={e:e}")).collect();
        anyhow::bail!("no corner row matches; rows are {}", known.join(", "));
    }
    for (m, eps_f) in rows {
        let tol = ToleranceConfig { l, eps_f, ..cfg.tolerances };
        let g0 = grid_from_halfwidth(initial_halfwidth(cf.as_ref(), &tol), m, &tol)?;
        let mut cache = CfEvaluationCache::new();
        let (g, trace) = refine(cf.as_ref(), &g0, &tol, &mut cache)?;
        if !trace.converged {
            log::warn!("row m={m} eps_f={eps_f:e} stopped at eps_f={:e}", trace.last().eps_f);
        }
        let res = swift_prices(
            cf.as_ref(),
            &contracts,
            &g,
            cfg.density,
            cfg.payoff_variant(),
            &mut cache,
            Execution::Parallel,
        )?;
        let mut cells = vec![m.to_string(), float(l), float(eps_f), g.log2_j_payoff().to_string()];
        cells.extend(res.iter().zip(&refs).map(|(r, x)| float(r.price - x)));
        t.push(cells);
    }
    Ok((t, reference))
}

/// Coefficient values and errors against the quadrature oracles, plus
/// per-strike prices for every payoff variant. Files go to `dir`.
pub fn cmd_dump(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let cf = model_of(cfg)?.build(cfg.maturity)?;
    let mut cache = CfEvaluationCache::new();
    let (g, _) = select(cf.as_ref(), cfg, &mut cache)?;
    let contracts = contracts(cfg)?;
    let mut written = Vec::new();
    let mut save = |t: &Table, name: &str| -> Result<()> {
        let p = dir.join(name);
        t.write(&p)?;
        written.push(p);
        Ok(())
    };

    let oracle: Vec<f64> = g
        .indices()
        .map(|k| Ok(density_coeff_oracle(cf.as_ref(), g.m, k, 1e-12)?))
        .collect::<Result<_>>()?;
    for dv in DensityVariant::ALL {
        let c = density_coeffs(cf.as_ref(), &g, dv, &mut cache)?;
        let mut t = Table::new(&["k", "value", "error_vs_oracle"]);
        for ((k, v), o) in c.iter().zip(&oracle) {
            t.push(vec![k.to_string(), float(v), float(v - o)]);
        }
        save(&t, &format!("density_{}.csv", dv.name()))?;
        if dv == cfg.density {
            let mut t = Table::new(&["k", "c_mk"]);
            for (k, v) in c.iter() {
                t.push(vec![k.to_string(), float(v)]);
            }
            save(&t, "density.csv")?;
            let eps = density_sum_residual_with(&c, ResidualSum::default());
            log::info!("density {} eps_f={eps:e}", dv.name());
        }
    }

    let first = contracts.first().context("no strikes configured")?.with_style(OptionStyle::Put);
    let tol = 1e-11 * first.forward;
    let fwd_oracle: Vec<f64> = g
        .indices()
        .map(|k| Ok(payoff_oracle_tol(&first, &g, k, tol)?))
        .collect::<Result<_>>()?;
    // the strike-centered payoff is the forward-centered one with F = K
    let at_strike = VanillaContract { forward: first.strike, ..first };
    let strike_oracle: Vec<f64> = g
        .indices()
        .map(|k| Ok(payoff_oracle_tol(&at_strike, &g, k, tol)?))
        .collect::<Result<_>>()?;
    let mut all = Table::new(&["k", "V_mk", "variant"]);
    for kind in PayoffKind::ALL {
        let v = payoff_coeffs(&first, &g, variant_for(cfg, kind))?;
        let oracle = if kind == PayoffKind::VietaStrike { &strike_oracle } else { &fwd_oracle };
        let mut t = Table::new(&["k", "value", "error_vs_oracle"]);
        for ((k, x), o) in v.iter().zip(oracle) {
            t.push(vec![k.to_string(), float(x), float(x - o)]);
            all.push(vec![k.to_string(), float(x), kind.name().to_string()]);
        }
        save(&t, &format!("payoff_{}.csv", kind.name()))?;
    }
    save(&all, "payoff.csv")?;

    let refs = contracts
        .iter()
        .map(|c| Ok(reference_price(cf.as_ref(), c)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut prices = Table::new(&["strike", "variant", "price", "reference", "error"]);
    for kind in PayoffKind::ALL {
        let res = swift_prices(
            cf.as_ref(),
            &contracts,
            &g,
            cfg.density,
            variant_for(cfg, kind),
            &mut cache,
            Execution::Parallel,
        )?;
        for ((c, r), x) in contracts.iter().zip(&res).zip(&refs) {
            prices.push(vec![
                float(c.strike),
                kind.name().to_string(),
                float(r.price),
                float(*x),
                float(r.price - x),
            ]);
        }
    }
    save(&prices, "prices.csv")?;
    Ok(written)
}

fn variant_for(cfg: &RunConfig, kind: PayoffKind) -> PayoffVariant {
    match cfg.n_direct {
        Some(n) if kind.is_direct() => PayoffVariant::with_nodes(kind, n),
        _ => PayoffVariant::new(kind),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use swift_core::paramselect::RefineRule;

    fn example_cfg() -> RunConfig {
        RunConfig {
            model: Some(ModelSpec::refinement_example()),
            maturity: 0.01,
            ..Default::default()
        }
    }

    #[test]
    fn refinement_table_first_rows() {
        let t = refinement_table(&example_cfg(), &Overrides { m: None, ..Default::default() }).unwrap();
        let csv = t.render();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "rule,iter,m,kappa,log2J,eps_f");
        assert!(lines[1].starts_with("romo,0,8,18,6,7.1309202"), "{}", lines[1]);
        assert!(lines[2].starts_with("romo,1,9,35,7,6.9612990"), "{}", lines[2]);
        let leitao: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with("leitao")).collect();
        assert!(leitao[1].starts_with("leitao,1,8,21,7,1.0255976"), "{}", leitao[1]);
        assert!(leitao.last().unwrap().starts_with("leitao,4,8,35,7,8.96804"));
    }

    #[test]
    fn otm_table_demands_parameters() {
        let err = otm_error_table(&RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("external parameters required"));
    }

    #[test]
    fn otm_table_runs_on_supplied_set() {
        let set = ParameterSet {
            label: "bs".into(),
            model: ModelSpec::Bs { vol: 0.2 },
            forward: 1.0,
            maturity: 1.0,
            strike_min: 0.9,
            strike_max: 1.1,
            n_strikes: 5,
            m: 5,
            log2_j: 6,
            l: 8.0,
        };
        let cfg = RunConfig { sets: vec![set], ..Default::default() };
        let t = otm_error_table(&cfg).unwrap();
        assert_eq!(t.len(), 9);
    }

    #[test]
    fn fixed_j_skips_refinement() {
        let cfg = RunConfig { m: Some(6), log2_j: Some(5), log2_j_density: Some(8), ..example_cfg() };
        let cf = cfg.model.unwrap().build(cfg.maturity).unwrap();
        let mut cache = CfEvaluationCache::new();
        let (g, trace) = select(cf.as_ref(), &cfg, &mut cache).unwrap();
        assert_eq!((g.j_payoff, g.j_density), (32, 256));
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn unreachable_tolerance_reports_trace() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = example_cfg();
        cfg.m = Some(8);
        cfg.tolerances.l = 4.0;
        cfg.tolerances.refine_rule = RefineRule::Romo;
        cfg.tolerances.max_m = 11;
        cfg.trace = Some(dir.path().join("t.csv"));
        let err = cmd_price(&cfg).unwrap_err();
        let failed = err.downcast_ref::<SelectionFailed>().expect("selection failure");
        assert!(failed.best > 5e-5);
        let text = std::fs::read_to_string(&failed.trace).unwrap();
        assert!(text.starts_with("iter,m,kappa,log2J,eps_f\n0,8,18,6,"));
    }

    #[test]
    fn price_line_carries_grid() {
        let cfg = RunConfig { strikes: vec![110.0], model: Some(ModelSpec::Bs { vol: 0.2 }), ..Default::default() };
        let lines = cmd_price(&cfg).unwrap();
        assert_eq!(lines.len(), 1);
        for key in ["price=", "m=", "kappa=", "log2J=", "eps_f=", "evaluations="] {
            assert!(lines[0].contains(key), "{key} missing in {}", lines[0]);
        }
    }
}
