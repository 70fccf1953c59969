use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use perinull::quadrature::QuadratureConfig;
use perinull::sim::{run_simulation, Sampling, SimConfig, Variant};
use perinull::types::Design;

use crate::commands::bf::DesignArg;
use crate::output::{parse_grid, plot_script, to_json, write_file, RunManifest};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArg {
    Nested,
    Independent,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub kappa0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa1: f64,
    /// Sample sizes as nmin:nmax:step or a comma list.
    #[arg(long, default_value = "100:2000:100")]
    pub ngrid: String,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Defaults to $PERINULL_SEED, then 1.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma list of point, peri, interval, peripoint, shrinking.
    #[arg(long, default_value = "point,peri")]
    pub variants: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value = "one-sample")]
    pub design: DesignArg,
    #[arg(long, value_enum, default_value = "nested")]
    pub sampling: SamplingArg,
    /// Interval-null half-width.
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    /// Point-mass weight of the peri-point null.
    #[arg(long, default_value_t = 0.5)]
    pub xi: f64,
    /// Shrinking peri-null constant.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Also write curves.gp, a gnuplot script for curves.csv.
    #[arg(long)]
    pub emit_plotscript: bool,
    /// Print the run summary as JSON.
    #[arg(long)]
    pub json: bool,
}

fn seed_from_env() -> CliResult<Option<u64>> {
    match std::env::var("PERINULL_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("PERINULL_SEED must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

pub fn config_from_args(a: &SimulateArgs, seed: u64) -> CliResult<SimConfig> {
    let variants = a
        .variants
        .split(',')
        .map(Variant::parse)
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SimConfig {
        mu: a.mu,
        sigma: a.sigma,
        kappa0: a.kappa0,
        kappa1: a.kappa1,
        n_grid: parse_grid(&a.ngrid)?,
        replications: a.reps,
        seed,
        variants,
        quadrature: QuadratureConfig::default(),
        design: match a.design {
            DesignArg::OneSample => Design::OneSample,
            DesignArg::TwoSample => Design::TwoSample,
        },
        sampling: match a.sampling {
            SamplingArg::Nested => Sampling::Nested,
            SamplingArg::Independent => Sampling::Independent,
        },
        interval_a: a.a,
        xi: a.xi,
        shrink_c: a.c,
        workers: a.workers,
        keep_replicates: false,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    out: &'a std::path::Path,
    cells: usize,
    failed_replicates: usize,
    crossings: &'a [perinull::sim::Crossing],
}

pub fn run(a: SimulateArgs) -> CliResult<()> {
    let seed = match a.seed {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(1),
    };
    let cfg = config_from_args(&a, seed)?;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", a.out.display())))?;
    let result = run_simulation(&cfg)?;
    write_file(&a.out.join("curves.csv"), &result.to_csv())?;
    if a.emit_plotscript {
        let names: Vec<&str> = cfg.variants.iter().map(|v| v.name()).collect();
        write_file(&a.out.join("curves.gp"), &plot_script(&names))?;
    }
    RunManifest::new("simulate", &a, seed)?.write(&a.out.join("manifest.json"))?;

    let failed = result.cells.iter().map(|c| c.failed).sum();
    if a.json {
        let summary = RunSummary {
            out: &a.out,
            cells: result.cells.len(),
            failed_replicates: failed,
            crossings: &result.crossings,
        };
        println!("{}", to_json(&summary)?);
    } else {
        println!("wrote {} ({} cells, {failed} failed replicates)", a.out.join("curves.csv").display(), result.cells.len());
        for c in &result.crossings {
            println!("{} mean crosses {:.4} at n = {:.1}", c.variant.name(), c.bound, c.n);
        }
    }
    Ok(())
}
