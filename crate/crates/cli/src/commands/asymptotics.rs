use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use perinull::asymptotics::{
    bias_from_constants, c_constants, engine_c_constants, summarize, AsymptoticSummary, BiasTerm,
    CConstants, SamplingDistribution,
};
use perinull::types::ParamPoint;

use crate::output::{parse_grid, to_json, write_file, RunManifest};
use crate::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantsSource {
    /// The closed-form expressions.
    ClosedForm,
    /// The general Laplace expansion applied to the t-test models.
    Engine,
}

#[derive(Debug, Args, Serialize)]
pub struct AsymptoticsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    pub kappa0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa1: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    /// Per-n CSV over nmin:nmax:step.
    #[arg(long)]
    pub grid: Option<String>,
    /// Source of the Laplace constants in the bias term.
    #[arg(long, value_enum, default_value = "closed-form")]
    pub constants: ConstantsSource,
    /// Write the grid CSV here instead of stdout, plus a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn summary_for(a: &AsymptoticsArgs, n: u64) -> CliResult<AsymptoticSummary> {
    let theta = ParamPoint::new(a.mu, a.sigma)?;
    let mut s = summarize(theta, a.kappa0, a.kappa1, n)?;
    if a.constants == ConstantsSource::Engine {
        // rebuild the bias and distribution from the engine constants
        let c = engine_c_constants(a.mu, a.sigma, a.kappa0, a.kappa1)?;
        s = with_constants(s, c)?;
    }
    Ok(s)
}

fn with_constants(mut s: AsymptoticSummary, c: CConstants) -> CliResult<AsymptoticSummary> {
    s.constants = c;
    s.bias = bias_from_constants(&c, s.n)?;
    s.distribution = match (s.bias, s.distribution) {
        (BiasTerm::Invalid { min_valid_n, .. }, _) => SamplingDistribution::Unusable { min_valid_n },
        (BiasTerm::Valid { value }, SamplingDistribution::ShiftedChiSquare { scale, .. }) => {
            SamplingDistribution::ShiftedChiSquare { shift: s.limit_log_bf + value, scale }
        }
        (BiasTerm::Valid { value }, _) => SamplingDistribution::Normal {
            mean: s.limit_log_bf + value,
            sd: (s.variance_over_n / s.n as f64).sqrt(),
        },
    };
    Ok(s)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn grid_csv(a: &AsymptoticsArgs, grid: &[u64]) -> CliResult<String> {
    let mut out = String::from("n,limit,bias,mean,q025,q975,valid\n");
    for &n in grid {
        let s = summary_for(a, n)?;
        let d = s.distribution;
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{},{}",
            s.limit_log_bf,
            fmt_opt(s.bias.value()),
            fmt_opt(d.mean()),
            fmt_opt(d.quantile(0.025)?),
            fmt_opt(d.quantile(0.975)?),
            s.bias.is_valid()
        );
    }
    Ok(out)
}

fn print_summary(s: &AsymptoticSummary) -> CliResult<()> {
    let c = &s.constants;
    println!("theta           mu = {}, sigma = {} (delta = {})", s.theta.mu, s.theta.sigma, s.theta.delta);
    println!("kappa0, kappa1  {}, {}", s.kappa0, s.kappa1);
    println!("limit v(theta)  {:.6}", s.limit_log_bf);
    println!("gradient        ({:.6e}, {:.6e})", s.grad[0], s.grad[1]);
    println!("d2v/dmu2        {:.6}", s.hessian_mu_mu);
    println!("regime          {:?}", s.regime);
    println!("n               {}", s.n);
    println!("variance        {:.6e} (n * variance = {:.6})", s.variance_over_n / s.n as f64, s.variance_over_n);
    println!("C1 alt, C2 alt  {:.6}, {:.6}", c.c1_alt, c.c2_alt);
    println!("C1 peri, C2 peri {:.6}, {:.6}", c.c1_peri, c.c2_peri);
    match s.bias {
        BiasTerm::Valid { value } => println!("bias E(theta,n) {value:.6}"),
        BiasTerm::Invalid { failed, alt_bracket, peri_bracket, min_valid_n } => println!(
            "bias E(theta,n) invalid: {failed:?} bracket not positive (alt {alt_bracket:.6}, peri {peri_bracket:.6}); valid from n = {min_valid_n}"
        ),
    }
    let d = s.distribution;
    match d {
        SamplingDistribution::Normal { mean, sd } => println!("distribution    normal(mean {mean:.6}, sd {sd:.6})"),
        SamplingDistribution::ShiftedChiSquare { shift, scale } => {
            println!("distribution    {shift:.6} + {scale:.6} * chi2(1)")
        }
        SamplingDistribution::Unusable { min_valid_n } => {
            println!("distribution    unusable below n = {min_valid_n}")
        }
    }
    if let (Some(m), Some(lo), Some(hi)) = (d.mean(), d.quantile(0.025)?, d.quantile(0.975)?) {
        println!("mean [2.5%, 97.5%] {m:.6} [{lo:.6}, {hi:.6}]");
    }
    Ok(())
}

pub fn run(a: AsymptoticsArgs) -> CliResult<()> {
    // validate parameters once, whichever mode runs
    c_constants(a.mu, a.sigma, a.kappa0, a.kappa1)?;
    if let Some(spec) = &a.grid {
        let grid = parse_grid(spec)?;
        let csv = grid_csv(&a, &grid)?;
        match &a.out {
            Some(path) => {
                write_file(path, &csv)?;
                RunManifest::new("asymptotics", &a, 0)?.write(&path.with_extension("manifest.json"))?;
            }
            None => print!("{csv}"),
        }
        return Ok(());
    }
    let s = summary_for(&a, a.n)?;
    if a.json {
        println!("{}", to_json(&s)?);
    } else {
        print_summary(&s)?;
    }
    Ok(())
}
