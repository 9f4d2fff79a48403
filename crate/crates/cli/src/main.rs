//! `swift`: price vanilla options with the Shannon-wavelet method and
//! regenerate the benchmark tables as CSV.

mod commands;
mod config;
mod csv;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::{SelectionFailed, CORNER_ROWS};
use config::{load_json, Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "swift", version, about = "Shannon-wavelet option pricing and benchmark tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Price a strike grid and print the grid diagnostics with each price.
    Price(Common),
    /// Run scale selection and refinement, printing the trace.
    Select(Common),
    /// Regenerate a benchmark table as CSV.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Dump density and payoff coefficients with their oracle errors.
    DumpCoeffs(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON model file.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long = "eps-m")]
    eps_m: Option<f64>,
    #[arg(long = "eps-f")]
    eps_f: Option<f64>,
    /// Truncation multiplier of the cumulant range.
    #[arg(long = "L")]
    l: Option<f64>,
    /// maree | leitao
    #[arg(long = "scale-rule")]
    scale_rule: Option<String>,
    /// pi_kappa | kappa | kappa_plus1
    #[arg(long = "j-rule")]
    j_rule: Option<String>,
    /// romo | leitao | none
    #[arg(long)]
    refine: Option<String>,
    /// midpoint_vieta | trapezoid | trapezoid_d1 | simpson
    #[arg(long)]
    density: Option<String>,
    /// vieta_strike | sem0 | fem0 | fem1 | direct_midpoint | direct_trapezoid | direct_simpson | direct_boole
    #[arg(long)]
    payoff: Option<String>,
    /// Comma-separated strikes.
    #[arg(long)]
    strikes: Option<String>,
    /// Output file (directory for dump-coeffs).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed wavelet scale.
    #[arg(long)]
    m: Option<u32>,
    /// Fixed log2 J; skips refinement.
    #[arg(long = "log2-j")]
    log2_j: Option<u32>,
    #[arg(long)]
    forward: Option<f64>,
    #[arg(long)]
    maturity: Option<f64>,
    /// Where to write the selection trace on failure.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            eps_m: self.eps_m,
            eps_f: self.eps_f,
            l: self.l,
            scale_rule: self.scale_rule.clone(),
            j_rule: self.j_rule.clone(),
            refine: self.refine.clone(),
            density: self.density.clone(),
            payoff: self.payoff.clone(),
            strikes: self.strikes.clone(),
            out: self.out.clone(),
            m: self.m,
            log2_j: self.log2_j,
            forward: self.forward,
            maturity: self.maturity,
            trace: self.trace.clone(),
        }
    }

    fn resolve(&self) -> Result<(RunConfig, Overrides)> {
        let mut cfg: RunConfig = match &self.config {
            Some(p) => load_json(p)?,
            None => RunConfig::default(),
        };
        let ov = self.overrides();
        ov.apply(&mut cfg)?;
        Ok((cfg, ov))
    }
}

fn emit(table: &csv::Table, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => {
            table.write(p)?;
            println!("wrote {} rows to {}", table.len(), p.display());
        }
        None => print!("{}", table.render()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Price(c) => {
            let (cfg, _) = c.resolve()?;
            for line in commands::cmd_price(&cfg)? {
                println!("{line}");
            }
        }
        Command::Select(c) => {
            let (cfg, _) = c.resolve()?;
            for line in commands::cmd_select(&cfg)? {
                println!("{line}");
            }
        }
        Command::Table { which, common } => {
            let (cfg, ov) = common.resolve()?;
            match which {
                1 => emit(&commands::refinement_table(&cfg, &ov)?, cfg.out.as_ref())?,
                2 => emit(&commands::otm_error_table(&cfg)?, cfg.out.as_ref())?,
                _ => {
                    if ov.m.is_none() && ov.eps_f.is_none() {
                        log::info!("computing all {} rows", CORNER_ROWS.len());
                    }
                    let (t, reference) = commands::corner_error_table(&cfg, &ov)?;
                    emit(&t, cfg.out.as_ref())?;
                    if let Some(out) = &cfg.out {
                        reference.write(&out.with_extension("reference.csv"))?;
                    }
                }
            }
        }
        Command::DumpCoeffs(c) => {
            let (cfg, _) = c.resolve()?;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("coeffs"));
            for p in commands::cmd_dump(&cfg, &dir)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<SelectionFailed>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
