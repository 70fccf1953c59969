use std::f64::consts::FRAC_1_SQRT_2;

use clap::{Args, ValueEnum};
use serde::Serialize;

use perinull::bf::{
    interval_null_bf, peri_null_bf, peri_point_bf, point_null_bf10, shrinking_peri_null_bf,
};
use perinull::ingest::{ingest_one_sample, ingest_two_sample};
use perinull::quadrature::QuadratureConfig;
use perinull::types::{BFResult, Design, SummaryStats};

use crate::output::to_json;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BfVariant {
    Point,
    Peri,
    Interval,
    Peripoint,
    Shrinking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignArg {
    OneSample,
    TwoSample,
}

#[derive(Debug, Args, Serialize)]
pub struct BfArgs {
    /// Observed t statistic. With --summary it replaces the pooled t.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Sample size of a one-sample design.
    #[arg(long)]
    pub n: Option<u64>,
    /// Group sizes of a two-sample design given with --t.
    #[arg(long)]
    pub n1: Option<u64>,
    #[arg(long)]
    pub n2: Option<u64>,
    /// Group summaries: mean1 sd1 n1 mean2 sd2 n2.
    #[arg(long, num_args = 6, value_names = ["M1", "SD1", "N1", "M2", "SD2", "N2"], allow_hyphen_values = true)]
    pub summary: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub design: Option<DesignArg>,
    #[arg(long, value_enum, default_value = "point")]
    pub variant: BfVariant,
    /// Cauchy scale of the alternative.
    #[arg(long, default_value_t = FRAC_1_SQRT_2)]
    pub kappa1: f64,
    /// Normal scale of the peri-null.
    #[arg(long, default_value_t = 0.05)]
    pub kappa0: f64,
    /// Cauchy scale of the encompassing interval prior; defaults to kappa1.
    #[arg(long)]
    pub kappa_e: Option<f64>,
    /// Interval-null half-width.
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    /// Point-mass weight of the peri-point mixture null.
    #[arg(long, default_value_t = 0.5)]
    pub xi: f64,
    /// Shrinking peri-null constant, kappa0 = c / sqrt(n).
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prior_odds: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long)]
    pub json: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn to_u64(x: f64, name: &str) -> CliResult<u64> {
    if x >= 0.0 && x.fract() == 0.0 {
        Ok(x as u64)
    } else {
        Err(usage(format!("{name} must be a whole number, got {x}")))
    }
}

/// Resolves the flag combination into summary statistics.
pub fn stats_from_args(a: &BfArgs) -> CliResult<SummaryStats> {
    if let Some(s) = &a.summary {
        if a.design == Some(DesignArg::OneSample) {
            return Err(usage("--summary describes two groups; it cannot be used with --design one-sample"));
        }
        if a.n.is_some() || a.n1.is_some() || a.n2.is_some() {
            return Err(usage("--summary already gives the group sizes"));
        }
        let stats = ingest_two_sample(s[0], s[1], to_u64(s[2], "n1")?, s[3], s[4], to_u64(s[5], "n2")?)?;
        return Ok(match a.t {
            Some(t) => stats.with_t(t),
            None => stats,
        });
    }
    let t = a.t.ok_or_else(|| usage("either --t or --summary is required"))?;
    let design = a.design.unwrap_or(if a.n1.is_some() || a.n2.is_some() {
        DesignArg::TwoSample
    } else {
        DesignArg::OneSample
    });
    match design {
        DesignArg::OneSample => {
            if a.n1.is_some() || a.n2.is_some() {
                return Err(usage("--n1/--n2 belong to the two-sample design"));
            }
            let n = a.n.ok_or_else(|| usage("--t with a one-sample design needs --n"))?;
            Ok(ingest_one_sample(t, n)?)
        }
        DesignArg::TwoSample => {
            if a.n.is_some() {
                return Err(usage("use --n1 and --n2 for the two-sample design"));
            }
            match (a.n1, a.n2) {
                (Some(n1), Some(n2)) => Ok(SummaryStats::two_sample(t, n1, n2)?),
                _ => Err(usage("--t with a two-sample design needs --n1 and --n2")),
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct BfOutput {
    variant: BfVariant,
    stats: SummaryStats,
    result: BFResult,
}

pub fn compute(a: &BfArgs, stats: &SummaryStats) -> CliResult<BFResult> {
    let cfg = QuadratureConfig {
        rel_tol: a.rel_tol,
        ..QuadratureConfig::default()
    };
    let result = match a.variant {
        BfVariant::Point => point_null_bf10(stats, a.kappa1, &cfg)?,
        BfVariant::Peri => peri_null_bf(stats, a.kappa0, a.kappa1, &cfg)?,
        BfVariant::Interval => interval_null_bf(stats, a.kappa_e.unwrap_or(a.kappa1), a.a, &cfg)?,
        BfVariant::Peripoint => peri_point_bf(stats, a.xi, a.kappa0, a.kappa1, &cfg)?,
        BfVariant::Shrinking => shrinking_peri_null_bf(stats, a.c, a.kappa1, &cfg)?,
    };
    Ok(result.with_prior_odds(a.prior_odds)?)
}

fn hypotheses(v: BfVariant) -> (&'static str, &'static str) {
    match v {
        BfVariant::Point => ("H1 (Cauchy alternative)", "H0 (point null)"),
        BfVariant::Peri => ("H1 (Cauchy alternative)", "H0~ (normal peri-null)"),
        BfVariant::Interval => ("|delta| > a", "|delta| <= a"),
        BfVariant::Peripoint => ("H1 (Cauchy alternative)", "H0' (point/peri mixture)"),
        BfVariant::Shrinking => ("H1 (Cauchy alternative)", "H0~ (kappa0 = c/sqrt(n))"),
    }
}

pub fn run(a: BfArgs) -> CliResult<()> {
    let stats = stats_from_args(&a)?;
    let result = compute(&a, &stats)?;
    if a.json {
        println!("{}", to_json(&BfOutput { variant: a.variant, stats, result })?);
        return Ok(());
    }
    let (num, den) = hypotheses(a.variant);
    let design = match stats.design {
        Design::OneSample => "one-sample",
        Design::TwoSample => "two-sample",
    };
    println!("design          {design} (t = {:.4}, nu = {}, n_eff = {:.4})", stats.t, stats.nu, stats.n_eff);
    println!("hypotheses      {num} vs {den}");
    println!("BF              {:.6}", result.bf);
    println!("log BF          {:.6}", result.log_bf);
    if let (Some(p), Some(c)) = (result.point_null_log_bf, result.correction_log_bf) {
        println!("BF10 (point)    {:.6}", p.exp());
        println!("BF00~ (corr.)   {:.6}", c.exp());
        println!("BF10 x BF00~    {:.6}", (p + c).exp());
    }
    println!("prior odds      {}", result.prior_odds);
    println!("P(numerator|y)  {:.6}", result.posterior_prob_numerator);
    println!("error bound     {:.3e} (log scale)", result.quad_error_bound);
    Ok(())
}
