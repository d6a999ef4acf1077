//! Monte Carlo rate experiments and the Value-at-Risk application.
//!
//! A rate experiment sweeps the sample size, draws independent replications
//! at each size, computes the quantile deviation, the oscillation modulus and
//! the Bahadur remainder on every path, and fits log-log slopes to per-size
//! summaries of their absolute values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assoc_gen::{GeneratorSpec, PathSampler, Series};
use crate::empirical::{self, BahadurDiagnostics, SortedSample, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::exec;
use crate::marginals::normal_quantile;
use crate::stats::{self, Estimate};
use crate::streams;
use crate::theory::{self, RateParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "deviation")]
    QuantileDeviation,
    #[serde(rename = "oscillation")]
    Oscillation,
    #[serde(rename = "remainder")]
    Remainder,
}

impl Metric {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "deviation" | "quantile_deviation" => Some(Metric::QuantileDeviation),
            "oscillation" => Some(Metric::Oscillation),
            "remainder" => Some(Metric::Remainder),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::QuantileDeviation => "deviation",
            Metric::Oscillation => "oscillation",
            Metric::Remainder => "remainder",
        }
    }

    fn value(&self, d: &BahadurDiagnostics) -> f64 {
        match self {
            Metric::QuantileDeviation => d.quantile_deviation,
            Metric::Oscillation => d.oscillation,
            Metric::Remainder => d.remainder.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Summary {
    #[default]
    Median,
    Q90,
    Mean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: GeneratorSpec,
    pub p: f64,
    pub n_grid: Vec<usize>,
    pub n_reps: usize,
    pub seed: u64,
    pub c_window: f64,
    pub margin: f64,
    pub summary: Summary,
}

impl ExperimentConfig {
    /// Defaults: `p = 0.5`, `n = 2^10..2^16`, 500 replications, `c = 1`,
    /// margin 0.05, median summary.
    pub fn new(spec: GeneratorSpec, seed: u64) -> Self {
        ExperimentConfig {
            spec,
            p: 0.5,
            n_grid: (10..=16).map(|k| 1usize << k).collect(),
            n_reps: 500,
            seed,
            c_window: 1.0,
            margin: theory::DEFAULT_MARGIN,
            summary: Summary::Median,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.p > 0.01 && self.p < 0.99) {
            return Err(Error::Config(format!(
                "p must lie in (0.01, 0.99), got {}",
                self.p
            )));
        }
        if self.n_grid.len() < 4 {
            return Err(Error::Config(
                "n_grid needs at least 4 sizes for slope fitting".into(),
            ));
        }
        if self.n_grid[0] < 2 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "n_grid must be strictly increasing from at least 2".into(),
            ));
        }
        if self.n_reps < 2 {
            return Err(Error::Config("n_reps must be at least 2".into()));
        }
        if !(self.c_window > 0.0) {
            return Err(Error::Config("c_window must be positive".into()));
        }
        if !(self.margin > 0.0) {
            return Err(Error::Config("margin must be positive".into()));
        }
        Ok(())
    }
}

/// Exponents for `spec`, checking the decay threshold `metric` requires.
pub fn rate_params_for(spec: &GeneratorSpec, metric: Metric, margin: f64) -> Result<RateParams> {
    let Some(b) = spec.decay_exponent() else {
        return RateParams::fast_decay(margin);
    };
    let cert = spec.decay_certificate(b)?;
    if !cert.holds {
        return Err(Error::Threshold(format!(
            "covariance decay bound fails for b = {b}"
        )));
    }
    match metric {
        Metric::QuantileDeviation => {
            if b > theory::min_b_theorem2() {
                theory::admissible_exponents(b, margin)
            } else {
                RateParams::for_deviation(b, margin)
            }
        }
        Metric::Oscillation | Metric::Remainder => {
            theory::admissible_exponents(b, margin).map_err(|_| {
                Error::Threshold(format!(
                    "{} metric needs b > (5 + sqrt 17)/2 = {:.4}, got b = {b}",
                    metric.name(),
                    theory::min_b_theorem2()
                ))
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub diagnostics: BahadurDiagnostics,
}

/// Every replication of an experiment, grouped by sample size in grid order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub params: RateParams,
    pub records: Vec<ReplicationRecord>,
}

pub const REPLICATION_CSV_HEADER: &str =
    "n,rep,p,xi_p,xi_np,fn_at_xi,remainder,oscillation,quantile_deviation";

impl ExperimentRun {
    pub fn records_for(&self, n: usize) -> impl Iterator<Item = &ReplicationRecord> {
        self.records.iter().filter(move |r| r.diagnostics.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 120);
        out.push_str(REPLICATION_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let d = &r.diagnostics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                d.n,
                r.rep,
                d.p,
                d.xi_p,
                d.xi_np,
                d.fn_at_xi,
                d.remainder,
                d.oscillation,
                d.quantile_deviation
            );
        }
        out
    }

    /// Paths on which `|xi_np - xi_p| f <= |p - F_n(xi_p)| + |R| f` fails.
    pub fn decomposition_violations(&self) -> Vec<ReplicationRecord> {
        let m = self.config.spec.marginal;
        self.records
            .iter()
            .filter(|r| !r.diagnostics.decomposition_holds(&m))
            .copied()
            .collect()
    }
}

/// Draw all replications. The window radius for the oscillation is
/// `c_window n^(-1/2) (ln n)^delta` with `delta` from the exponents for `metric`.
pub fn run_experiment(cfg: &ExperimentConfig, metric: Metric) -> Result<ExperimentRun> {
    cfg.validate()?;
    let params = rate_params_for(&cfg.spec, metric, cfg.margin)?;
    let samplers = cfg
        .n_grid
        .iter()
        .map(|&n| PathSampler::new(cfg.spec, n))
        .collect::<Result<Vec<_>>>()?;
    let widths = cfg
        .n_grid
        .iter()
        .map(|&n| theory::window_half_width(n, cfg.c_window, params.delta))
        .collect::<Result<Vec<_>>>()?;
    let reps = cfg.n_reps;
    let marginal = cfg.spec.marginal;
    let records = exec::map_indexed(cfg.n_grid.len() * reps, |task| {
        let (gi, rep) = (task / reps, task % reps);
        let n = cfg.n_grid[gi];
        let seed = streams::derive_seed(cfg.seed, &[n as u64, rep as u64]);
        let series = samplers[gi].sample(seed);
        let sorted = SortedSample::new(series.values)?;
        let diagnostics = empirical::full_diagnostics(&sorted, &marginal, cfg.p, widths[gi])?;
        Ok(ReplicationRecord { rep, diagnostics })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRun {
        config: cfg.clone(),
        params,
        records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub summary_value: f64,
    pub mc_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    pub metric: Metric,
    pub summary: Summary,
    pub per_n: Vec<RatePoint>,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub theory_exponent: f64,
    pub log_correction: f64,
}

fn summarize(values: &mut [f64], summary: Summary) -> Estimate {
    values.sort_unstable_by(f64::total_cmp);
    match summary {
        Summary::Median => stats::order_quantile_with_se(values, 0.5),
        Summary::Q90 => stats::order_quantile_with_se(values, 0.9),
        Summary::Mean => stats::mean_with_se(values),
    }
}

/// Fit `ln summary(|metric|)` against `ln n`, weighting each point by the
/// inverse variance of its log summary.
pub fn fit_rate(run: &ExperimentRun, metric: Metric) -> Result<RateFitResult> {
    let mut per_n = Vec::with_capacity(run.config.n_grid.len());
    for &n in &run.config.n_grid {
        let mut vals: Vec<f64> = run
            .records_for(n)
            .map(|r| metric.value(&r.diagnostics))
            .collect();
        let est = summarize(&mut vals, run.config.summary);
        if !(est.value > 0.0) {
            return Err(Error::Domain(format!(
                "{} summary at n = {n} is {}, cannot take logs",
                metric.name(),
                est.value
            )));
        }
        per_n.push(RatePoint {
            n,
            summary_value: est.value,
            mc_se: est.se,
        });
    }
    let xs: Vec<f64> = per_n.iter().map(|pt| (pt.n as f64).ln()).collect();
    let ys: Vec<f64> = per_n.iter().map(|pt| pt.summary_value.ln()).collect();
    let ws: Vec<f64> = per_n
        .iter()
        .map(|pt| {
            let rel = (pt.mc_se / pt.summary_value).max(1e-6);
            1.0 / (rel * rel)
        })
        .collect();
    let fit = stats::weighted_linear_fit(&xs, &ys, &ws)?;
    let (theory_exponent, log_correction) = match metric {
        Metric::QuantileDeviation => (run.params.thm1_exponent, run.params.delta),
        Metric::Oscillation | Metric::Remainder => (run.params.thm3_exponent, run.params.gamma),
    };
    Ok(RateFitResult {
        metric,
        summary: run.config.summary,
        per_n,
        slope: fit.slope,
        slope_se: fit.slope_se,
        intercept: fit.intercept,
        theory_exponent,
        log_correction,
    })
}

/// Everything needed to reproduce a rate experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub version: String,
    pub seed: u64,
    pub metric: Metric,
    pub config: ExperimentConfig,
    pub rate_params: RateParams,
}

impl ExperimentManifest {
    pub fn new(run: &ExperimentRun, metric: Metric, version: &str) -> Self {
        ExperimentManifest {
            version: version.to_string(),
            seed: run.config.seed,
            metric,
            config: run.config.clone(),
            rate_params: run.params,
        }
    }
}

pub fn run_rate_experiment(cfg: &ExperimentConfig, metric: Metric) -> Result<RateFitResult> {
    fit_rate(&run_experiment(cfg, metric)?, metric)
}

/// Bartlett-tapered long-run variance
/// `g(0) + 2 sum_{k=1}^{L} (1 - k/(L+1)) g(k)` of the (re)centered series,
/// with biased autocovariances `g`. Never negative.
pub fn estimate_long_run_variance(series: &[f64], bandwidth: usize) -> Result<f64> {
    let n = series.len();
    if bandwidth == 0 || 2 * bandwidth >= n {
        return Err(Error::domain(format!(
            "bandwidth must satisfy 0 < L < n/2, got L = {bandwidth} with n = {n}"
        )));
    }
    if series.iter().all(|&x| x == series[0]) {
        return Ok(0.0);
    }
    let acov = stats::autocovariances(series, bandwidth);
    let l1 = (bandwidth + 1) as f64;
    let lrv = acov[0]
        + 2.0
            * acov[1..]
                .iter()
                .enumerate()
                .map(|(i, g)| (1.0 - (i + 1) as f64 / l1) * g)
                .sum::<f64>();
    Ok(lrv.max(0.0))
}

/// `floor(n^(1/3))`, at least 1.
pub fn default_bandwidth(n: usize) -> usize {
    ((n as f64).cbrt().floor() as usize).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarEstimate {
    pub level: f64,
    pub confidence: f64,
    pub var_point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub long_run_sd: f64,
    pub density_at_quantile: f64,
    pub bandwidth: usize,
    pub n: usize,
}

impl VarEstimate {
    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Sample quantile at `level` of a loss series with a normal interval from
/// the Bahadur linearization and a long-run variance of the indicators
/// `1{X_i <= xi_np}`.
pub fn var_with_ci(
    loss: &Series,
    level: f64,
    confidence: f64,
    bandwidth: Option<usize>,
) -> Result<VarEstimate> {
    if !(level > 0.5 && level <= 0.999) {
        return Err(Error::domain(format!(
            "VaR level must lie in (0.5, 0.999], got {level}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let n = loss.values.len();
    let marginal = loss.spec.marginal;
    let xi_p = marginal.quantile(level)?;
    let density = marginal.pdf(xi_p);
    if !(density > DENSITY_FLOOR) {
        return Err(Error::DegenerateDensity { density });
    }
    let sorted = SortedSample::from_slice(&loss.values)?;
    let point = sorted.sample_quantile(level)?;
    let indicators: Vec<f64> = loss
        .values
        .iter()
        .map(|&x| f64::from(u8::from(x <= point)))
        .collect();
    let bandwidth = bandwidth.unwrap_or_else(|| default_bandwidth(n));
    let long_run_sd = estimate_long_run_variance(&indicators, bandwidth)?.sqrt();
    let z = normal_quantile(0.5 * (1.0 + confidence));
    let half = z * long_run_sd / (density * (n as f64).sqrt());
    Ok(VarEstimate {
        level,
        confidence,
        var_point: point,
        ci_low: point - half,
        ci_high: point + half,
        long_run_sd,
        density_at_quantile: density,
        bandwidth,
        n,
    })
}

/// Biased sample autocovariances at lags `0..=lag_max`.
pub fn empirical_decay_probe(series: &Series, lag_max: usize) -> Result<Vec<(usize, f64)>> {
    if lag_max * 10 > series.values.len() {
        return Err(Error::domain(format!(
            "lag_max = {lag_max} exceeds n/10 for n = {}",
            series.values.len()
        )));
    }
    Ok(stats::autocovariances(&series.values, lag_max)
        .into_iter()
        .enumerate()
        .collect())
}
