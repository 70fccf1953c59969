use clap::{Args, ValueEnum};
use serde::Serialize;

use perinull::asymptotics::{c_constants, CConstants};
use perinull::laplace::models::{
    expand_model, BetaBernoulli, ConjugateGaussian, DerivativeSource, EffectPrior, GammaKernel,
    LaplaceModel, TTestModel,
};
use perinull::laplace::LaplaceMarginal;

use crate::output::to_json;
use crate::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    /// Normal mean with known sigma and a normal prior.
    ConjugateGaussian,
    /// Bernoulli trials with a Beta(a, b) prior.
    BetaBernoulli,
    /// t-test model with a normal prior on delta (scale kappa0).
    TtestPeri,
    /// t-test model with a Cauchy prior on delta (scale kappa1).
    TtestAlt,
    /// The Gamma-function kernel x^n e^{-(n+1)x}.
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivArg {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Args, Serialize)]
pub struct LaplaceArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    /// Sample mean (t-test: the MLE of mu).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub mean: f64,
    /// Known sigma (conjugate) or MLE of sigma (t-test).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Mean squared deviation of the conjugate data.
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub prior_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prior_sd: f64,
    /// Successes of the Beta-Bernoulli model.
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.05)]
    pub kappa0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa1: f64,
    #[arg(long, value_enum, default_value = "analytic")]
    pub derivatives: DerivArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
pub struct Level {
    pub name: &'static str,
    pub log_marginal: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LaplaceReport {
    pub model: ModelArg,
    pub n: u64,
    pub exact: f64,
    pub expansion: LaplaceMarginal,
    pub levels: Vec<Level>,
    /// Closed-form t-test constants, when the model is a t-test model.
    pub closed_form: Option<CConstants>,
}

fn build_model(a: &LaplaceArgs) -> CliResult<Box<dyn LaplaceModel>> {
    Ok(match a.model {
        ModelArg::ConjugateGaussian => Box::new(ConjugateGaussian::new(
            a.n,
            a.mean,
            a.spread,
            a.sigma,
            a.prior_mean,
            a.prior_sd,
        )?),
        ModelArg::BetaBernoulli => Box::new(BetaBernoulli::new(a.n, a.k.unwrap_or(a.n / 2), a.a, a.b)?),
        ModelArg::TtestPeri => Box::new(TTestModel::at_mle(
            a.n,
            a.mean,
            a.sigma,
            EffectPrior::Normal { kappa: a.kappa0 },
        )?),
        ModelArg::TtestAlt => Box::new(TTestModel::at_mle(
            a.n,
            a.mean,
            a.sigma,
            EffectPrior::Cauchy { kappa: a.kappa1 },
        )?),
        ModelArg::Gamma => Box::new(GammaKernel { n: a.n }),
    })
}

pub fn report(a: &LaplaceArgs) -> CliResult<LaplaceReport> {
    let model = build_model(a)?;
    let source = match a.derivatives {
        DerivArg::Analytic => DerivativeSource::Analytic,
        DerivArg::FiniteDifference => DerivativeSource::FiniteDifference,
    };
    let expansion = expand_model(model.as_ref(), source)?;
    let exact = model.exact_log_marginal()?;
    let level = |name, v: Option<f64>| Level {
        name,
        log_marginal: v,
        abs_error: v.map(|v| (v - exact).abs()),
    };
    let levels = vec![
        level("leading", Some(expansion.leading)),
        level("with C1", expansion.with_c1),
        level("with C1, C2", expansion.with_c2),
    ];
    let closed_form = match a.model {
        ModelArg::TtestPeri | ModelArg::TtestAlt => Some(c_constants(a.mean, a.sigma, a.kappa0, a.kappa1)?),
        _ => None,
    };
    Ok(LaplaceReport {
        model: a.model,
        n: a.n,
        exact,
        expansion,
        levels,
        closed_form,
    })
}

pub fn run(a: LaplaceArgs) -> CliResult<()> {
    let r = report(&a)?;
    if a.json {
        println!("{}", to_json(&r)?);
        return Ok(());
    }
    println!("exact log marginal  {:.10}", r.exact);
    for l in &r.levels {
        match (l.log_marginal, l.abs_error) {
            (Some(v), Some(e)) => println!("{:<19} {v:.10}  (error {e:.3e})", l.name),
            _ => println!("{:<19} undefined (bracket not positive)", l.name),
        }
    }
    println!("C1, C2              {:.6}, {:.6}", r.expansion.c1, r.expansion.c2);
    if let Some(c) = r.closed_form {
        let (c1, c2) = match a.model {
            ModelArg::TtestPeri => (c.c1_peri, c.c2_peri),
            _ => (c.c1_alt, c.c2_alt),
        };
        println!("closed-form C1, C2  {c1:.6}, {c2:.6}");
    }
    Ok(())
}
