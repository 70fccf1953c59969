//! Seeded Monte Carlo study of log Bayes factors across sample sizes.
//!
//! Every replication draws from its own ChaCha8 stream keyed by the seed and
//! the replication index (and the grid index in independent mode), so the
//! output does not depend on the number of worker threads.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{limit_log_bf, summarize};
use crate::bf::{interval_null_bf, marginal_loglik};
use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::special::log_sum_exp;
use crate::types::{Design, ParamPoint, PriorSpec, SummaryStats};

/// Which Bayes factor a simulation cell records. All are oriented so that
/// positive values favour the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PointNull,
    PeriNull,
    IntervalNull,
    PeriPoint,
    Shrinking,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::PointNull,
        Variant::PeriNull,
        Variant::IntervalNull,
        Variant::PeriPoint,
        Variant::Shrinking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::PointNull => "point-null",
            Variant::PeriNull => "peri-null",
            Variant::IntervalNull => "interval-null",
            Variant::PeriPoint => "peri-point",
            Variant::Shrinking => "shrinking",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Variant::ALL
            .into_iter()
            .find(|v| {
                let name = v.name();
                name == key
                    || name.trim_end_matches("-null") == key
                    || name.replace('-', "") == key.replace('-', "")
            })
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant {s:?}")))
    }
}

/// How samples at successive grid sizes relate within a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// The sample at each n extends the sample at the previous grid point.
    Nested,
    /// A fresh sample at every grid point.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mu: f64,
    pub sigma: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub n_grid: Vec<u64>,
    pub replications: usize,
    pub seed: u64,
    pub variants: Vec<Variant>,
    pub quadrature: QuadratureConfig,
    pub design: Design,
    pub sampling: Sampling,
    /// Half-width of the interval null.
    pub interval_a: f64,
    /// Point-mass weight of the peri-point mixture null.
    pub xi: f64,
    /// Shrinking peri-null constant: κ₀ = c/√n.
    pub shrink_c: f64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub keep_replicates: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mu: 0.0,
            sigma: 1.0,
            kappa0: 0.05,
            kappa1: 1.0,
            n_grid: (1..=20).map(|k| 100 * k).collect(),
            replications: 200,
            seed: 1,
            variants: vec![Variant::PointNull, Variant::PeriNull],
            quadrature: QuadratureConfig::default(),
            design: Design::OneSample,
            sampling: Sampling::Nested,
            interval_a: 0.1,
            xi: 0.5,
            shrink_c: 0.5,
            workers: None,
            keep_replicates: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        ParamPoint::new(self.mu, self.sigma)?;
        for (name, v) in [
            ("kappa0", self.kappa0),
            ("kappa1", self.kappa1),
            ("interval_a", self.interval_a),
            ("shrink_c", self.shrink_c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return invalid(format!("xi must lie in (0, 1), got {}", self.xi));
        }
        let min_n = match self.design {
            Design::OneSample => 2,
            Design::TwoSample => 4,
        };
        if self.n_grid.is_empty() || self.n_grid[0] < min_n {
            return invalid(format!("n grid must be non-empty with every n >= {min_n}"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n grid must be strictly ascending");
        }
        if self.replications == 0 {
            return invalid("replications must be at least 1");
        }
        if self.variants.is_empty() {
            return invalid("at least one variant is required");
        }
        if self.workers == Some(0) {
            return invalid("workers must be at least 1");
        }
        self.quadrature.validate()
    }

    fn has(&self, v: Variant) -> bool {
        self.variants.contains(&v)
    }
}

/// Summary of one (variant, n) cell over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub variant: Variant,
    pub n: u64,
    pub mean: f64,
    pub q025: f64,
    pub q975: f64,
    pub completed: usize,
    pub failed: usize,
}

/// Asymptotic mean and quantiles of the peri-null log Bayes factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayPoint {
    pub n: u64,
    pub mean: f64,
    pub q025: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub variant: Variant,
    pub bound: f64,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub cells: Vec<CellSummary>,
    pub overlay: Vec<OverlayPoint>,
    /// Point-null curve against the peri-null limit v(θ).
    pub crossings: Vec<Crossing>,
    /// `replicates[r][g][v]` for replication r, grid index g and the v-th
    /// configured variant; `None` marks a failed cell.
    pub replicates: Option<Vec<Vec<Vec<Option<f64>>>>>,
}

impl SimResult {
    pub fn cell(&self, variant: Variant, n: u64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.variant == variant && c.n == n)
    }

    /// (n, mean) pairs of one variant in grid order.
    pub fn mean_curve(&self, variant: Variant) -> Vec<(u64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.variant == variant)
            .map(|c| (c.n, c.mean))
            .collect()
    }

    /// CSV with columns variant,n,mean,q025,q975,source.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,n,mean,q025,q975,source\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},simulated",
                c.variant.name(),
                c.n,
                c.mean,
                c.q025,
                c.q975
            );
        }
        for o in &self.overlay {
            let _ = writeln!(
                out,
                "{},{},{},{},{},asymptotic",
                Variant::PeriNull.name(),
                o.n,
                o.mean,
                o.q025,
                o.q975
            );
        }
        out
    }
}

/// Running sums for one group, updated with Welford's recurrence.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn extend(&mut self, rng: &mut ChaCha8Rng, target: u64, mu: f64, sigma: f64) {
        while self.n < target {
            let z: f64 = StandardNormal.sample(rng);
            self.push(mu + sigma * z);
        }
    }
}

/// Draws data for one replication and yields summary statistics per grid n.
struct DataStream {
    rng: ChaCha8Rng,
    groups: [Moments; 2],
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl DataStream {
    fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: stream_rng(seed, stream),
            groups: [Moments::default(); 2],
        }
    }

    fn stats_at(&mut self, cfg: &SimConfig, n: u64) -> Result<SummaryStats> {
        match cfg.design {
            Design::OneSample => {
                let g = &mut self.groups[0];
                g.extend(&mut self.rng, n, cfg.mu, cfg.sigma);
                let s = (g.m2 / (n - 1) as f64).sqrt();
                let t = (n as f64).sqrt() * g.mean / s;
                SummaryStats::new(t, (n - 1) as f64, n as f64, Design::OneSample, n)
            }
            Design::TwoSample => {
                let n1 = n / 2;
                let n2 = n - n1;
                // group 1 is shifted by μ; both share σ
                self.groups[0].extend(&mut self.rng, n1, cfg.mu, cfg.sigma);
                self.groups[1].extend(&mut self.rng, n2, 0.0, cfg.sigma);
                let [a, b] = self.groups;
                let sp = ((a.m2 + b.m2) / (n - 2) as f64).sqrt();
                let t = (a.mean - b.mean) / (sp * (1.0 / n1 as f64 + 1.0 / n2 as f64).sqrt());
                SummaryStats::two_sample(t, n1, n2)
            }
        }
    }
}

/// Log Bayes factors of all configured variants for one data set.
fn cell_log_bfs(cfg: &SimConfig, s: &SummaryStats) -> Vec<Option<f64>> {
    let q = &cfg.quadrature;
    let need_alt = [Variant::PointNull, Variant::PeriNull, Variant::PeriPoint, Variant::Shrinking]
        .iter()
        .any(|&v| cfg.has(v));
    let alt = need_alt
        .then(|| marginal_loglik(s, &PriorSpec::AltCauchy { kappa1: cfg.kappa1 }, q).ok())
        .flatten()
        .map(|m| m.log_value);
    let point = marginal_loglik(s, &PriorSpec::PointAtZero, q).ok().map(|m| m.log_value);
    let peri = (cfg.has(Variant::PeriNull) || cfg.has(Variant::PeriPoint))
        .then(|| marginal_loglik(s, &PriorSpec::PeriNullNormal { kappa0: cfg.kappa0 }, q).ok())
        .flatten()
        .map(|m| m.log_value);

    cfg.variants
        .iter()
        .map(|&v| match v {
            Variant::PointNull => Some(alt? - point?),
            Variant::PeriNull => Some(alt? - peri?),
            Variant::PeriPoint => {
                let mix = log_sum_exp(cfg.xi.ln() + point?, (-cfg.xi).ln_1p() + peri?);
                Some(alt? - mix)
            }
            Variant::Shrinking => {
                let kappa0 = cfg.shrink_c / (s.n_total as f64).sqrt();
                let shrunk = marginal_loglik(s, &PriorSpec::PeriNullNormal { kappa0 }, q).ok()?;
                Some(alt? - shrunk.log_value)
            }
            Variant::IntervalNull => interval_null_bf(s, cfg.kappa1, cfg.interval_a, q)
                .ok()
                .map(|r| r.log_bf),
        })
        .map(|x| x.filter(|v| v.is_finite()))
        .collect()
}

fn replicate(cfg: &SimConfig, rep: usize) -> Vec<Vec<Option<f64>>> {
    let nested_stream = (rep as u64) << 32;
    let mut nested = DataStream::new(cfg.seed, nested_stream);
    cfg.n_grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let stats = match cfg.sampling {
                Sampling::Nested => nested.stats_at(cfg, n),
                Sampling::Independent => {
                    DataStream::new(cfg.seed, nested_stream | (g as u64 + 1)).stats_at(cfg, n)
                }
            };
            match stats {
                Ok(s) => cell_log_bfs(cfg, &s),
                Err(_) => vec![None; cfg.variants.len()],
            }
        })
        .collect()
}

/// Type-7 sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Runs every replication and summarizes each (variant, n) cell.
///
/// Cells whose quadrature fails are skipped in the summaries; more than 1%
/// failed cells is a run-level error.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let work = || -> Vec<Vec<Vec<Option<f64>>>> {
        (0..cfg.replications).into_par_iter().map(|r| replicate(cfg, r)).collect()
    };
    let reps = match cfg.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    };

    let total = cfg.replications * cfg.n_grid.len() * cfg.variants.len();
    let failed: usize = reps.iter().flatten().flatten().filter(|x| x.is_none()).count();
    if failed * 100 > total {
        return Err(Error::SimulationFailed { failed, total });
    }

    let mut cells = Vec::new();
    for (vi, &variant) in cfg.variants.iter().enumerate() {
        for (g, &n) in cfg.n_grid.iter().enumerate() {
            let mut values: Vec<f64> = reps.iter().filter_map(|r| r[g][vi]).collect();
            let failed = cfg.replications - values.len();
            if values.is_empty() {
                cells.push(CellSummary {
                    variant,
                    n,
                    mean: f64::NAN,
                    q025: f64::NAN,
                    q975: f64::NAN,
                    completed: 0,
                    failed,
                });
                continue;
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.sort_by(f64::total_cmp);
            cells.push(CellSummary {
                variant,
                n,
                mean,
                q025: quantile_sorted(&values, 0.025),
                q975: quantile_sorted(&values, 0.975),
                completed: values.len(),
                failed,
            });
        }
    }

    let overlay = overlay_asymptotics(cfg)?;
    let mut result = SimResult {
        config: cfg.clone(),
        cells,
        overlay,
        crossings: Vec::new(),
        replicates: cfg.keep_replicates.then_some(reps),
    };
    if cfg.has(Variant::PointNull) {
        let bound = limit_log_bf(cfg.mu, cfg.sigma, cfg.kappa0, cfg.kappa1)?;
        if let Some(n) = detect_crossing(&result, Variant::PointNull, bound) {
            result.crossings.push(Crossing {
                variant: Variant::PointNull,
                bound,
                n,
            });
        }
    }
    Ok(result)
}

/// Asymptotic mean and 2.5%/97.5% quantiles of the peri-null log Bayes
/// factor at each grid n where the bias term is defined.
pub fn overlay_asymptotics(cfg: &SimConfig) -> Result<Vec<OverlayPoint>> {
    let theta = ParamPoint::new(cfg.mu, cfg.sigma)?;
    let mut out = Vec::new();
    for &n in &cfg.n_grid {
        let d = summarize(theta, cfg.kappa0, cfg.kappa1, n)?.distribution;
        if let (Some(mean), Some(q025), Some(q975)) = (d.mean(), d.quantile(0.025)?, d.quantile(0.975)?) {
            out.push(OverlayPoint { n, mean, q025, q975 });
        }
    }
    Ok(out)
}

/// First grid interval where the variant's mean curve crosses `bound`,
/// linearly interpolated. An upward crossing is sought when the curve
/// starts below the bound, a downward one otherwise.
pub fn detect_crossing(result: &SimResult, variant: Variant, bound: f64) -> Option<f64> {
    let curve: Vec<(f64, f64)> = result
        .mean_curve(variant)
        .into_iter()
        .filter(|(_, m)| m.is_finite())
        .map(|(n, m)| (n as f64, m))
        .collect();
    let &(_, first) = curve.first()?;
    let upward = first < bound;
    curve.windows(2).find_map(|w| {
        let ((n0, m0), (n1, m1)) = (w[0], w[1]);
        let crossed = if upward {
            m0 < bound && m1 >= bound
        } else {
            m0 > bound && m1 <= bound
        };
        crossed.then(|| n0 + (bound - m0) / (m1 - m0) * (n1 - n0))
    })
}
