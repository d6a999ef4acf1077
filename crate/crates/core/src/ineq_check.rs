//! Monte Carlo verification of covariance and moment inequalities for
//! associated sequences.
//!
//! Checks with explicit constants compare both sides literally, with a
//! `margin_sigmas` band of Monte Carlo error. Checks whose constants are not
//! known (moment growth, the Lemma 1 style moment bound) only test exponent
//! structure: a fitted slope or a bounded normalized ratio.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::assoc_gen::{GeneratorSpec, PathSampler};
use crate::error::{Error, Result};
use crate::exec;
use crate::marginals::{normal_cdf, Marginal};
use crate::stats::{self, Estimate};
use crate::streams;
use crate::theory;

pub const DEFAULT_MARGIN_SIGMAS: f64 = 3.0;

/// Combined standard error above which a point-estimate violation is
/// reported as undecided rather than passed.
pub const RESOLUTION_FLOOR: f64 = 1e-3;

const CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One comparison inside a multi-part check (a lag, a grid cell, a fit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckComponent {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
    pub margin_sigmas: f64,
    pub verdict: Verdict,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<CheckComponent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `Fail` when `lhs > rhs + margin (lhs_se + rhs_se)`. Otherwise `Pass`,
/// except that a point estimate on the wrong side (`lhs > rhs`) rescued only
/// by a band wider than [`RESOLUTION_FLOOR`] is `Inconclusive`.
pub fn judge(lhs: Estimate, rhs: Estimate, margin_sigmas: f64) -> Verdict {
    let se = lhs.se + rhs.se;
    if lhs.value > rhs.value + margin_sigmas * se {
        Verdict::Fail
    } else if lhs.value > rhs.value && se > RESOLUTION_FLOOR {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

/// Worst of several verdicts: any Fail fails, else any Inconclusive.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    verdicts
        .into_iter()
        .fold(Verdict::Pass, |acc, v| match (acc, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        })
}

impl CheckReport {
    fn single(name: String, lhs: Estimate, rhs: Estimate, n_samples: usize, seed: u64) -> Self {
        CheckReport {
            name,
            lhs: lhs.value,
            rhs: rhs.value,
            lhs_se: lhs.se,
            rhs_se: rhs.se,
            margin_sigmas: DEFAULT_MARGIN_SIGMAS,
            verdict: judge(lhs, rhs, DEFAULT_MARGIN_SIGMAS),
            n_samples,
            seed,
            components: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Report over components, headlined by the one closest to violation.
    fn from_components(
        name: String,
        components: Vec<CheckComponent>,
        margin_sigmas: f64,
        n_samples: usize,
        seed: u64,
    ) -> Self {
        let slack = |c: &CheckComponent| {
            (c.rhs - c.lhs) / (margin_sigmas * (c.lhs_se + c.rhs_se)).max(1e-300)
        };
        let worst = components
            .iter()
            .min_by(|a, b| slack(a).total_cmp(&slack(b)))
            .cloned();
        let verdict = combine(components.iter().map(|c| c.verdict));
        let (lhs, rhs, lhs_se, rhs_se) = worst
            .map(|c| (c.lhs, c.rhs, c.lhs_se, c.rhs_se))
            .unwrap_or((0.0, 0.0, 0.0, 0.0));
        CheckReport {
            name,
            lhs,
            rhs,
            lhs_se,
            rhs_se,
            margin_sigmas,
            verdict,
            n_samples,
            seed,
            components,
            notes: Vec::new(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn component(label: String, lhs: Estimate, rhs: Estimate, margin_sigmas: f64) -> CheckComponent {
    CheckComponent {
        label,
        lhs: lhs.value,
        rhs: rhs.value,
        lhs_se: lhs.se,
        rhs_se: rhs.se,
        verdict: judge(lhs, rhs, margin_sigmas),
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::domain(format!(
            "correlation must lie in [0, 1) for the pair to be associated, got {rho}"
        )));
    }
    Ok(())
}

/// `n_samples` standard bivariate normal pairs with correlation `rho`, drawn
/// in fixed chunks so the result does not depend on scheduling.
fn bivariate_normal_pairs(rho: f64, n_samples: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let tail = (1.0 - rho * rho).sqrt();
    let chunks = exec::chunk_bounds(n_samples, CHUNK);
    let parts = exec::map_indexed(chunks.len(), |c| {
        let (start, end) = chunks[c];
        let mut rng = streams::chunk_rng(seed, c as u64);
        let mut xs = Vec::with_capacity(end - start);
        let mut ys = Vec::with_capacity(end - start);
        for _ in start..end {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            xs.push(a);
            ys.push(rho * a + tail * b);
        }
        (xs, ys)
    });
    let mut xs = Vec::with_capacity(n_samples);
    let mut ys = Vec::with_capacity(n_samples);
    for (a, b) in parts {
        xs.extend(a);
        ys.extend(b);
    }
    (xs, ys)
}

/// `|Cov(1{s<X<=t}, 1{s<Y<=t})| <= 4 (t-s)^(1/3) Cov(X,Y)^(1/3)` for uniform
/// `X = Phi(Z1)`, `Y = Phi(Z2)` with `corr(Z1, Z2) = rho >= 0`.
pub fn shao_covariance_check(
    rho: f64,
    s: f64,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    check_rho(rho)?;
    if !(0.0 <= s && s < t && t <= 1.0) {
        return Err(Error::domain(format!(
            "need 0 <= s < t <= 1, got s = {s}, t = {t}"
        )));
    }
    if n_samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let (z1, z2) = bivariate_normal_pairs(rho, n_samples, seed);
    let u: Vec<f64> = z1.iter().map(|&z| normal_cdf(z)).collect();
    let v: Vec<f64> = z2.iter().map(|&z| normal_cdf(z)).collect();
    let ind = |x: &f64| if s < *x && *x <= t { 1.0 } else { 0.0 };
    let iu: Vec<f64> = u.iter().map(ind).collect();
    let iv: Vec<f64> = v.iter().map(ind).collect();

    let lhs = stats::covariance_with_se(&iu, &iv).abs();
    // Cov(Phi(Z1), Phi(Z2)) = asin(rho / 2) / (2 pi) for the copula pair
    let cov_uv = (0.5 * rho).asin() / (2.0 * std::f64::consts::PI);
    let rhs = Estimate::exact(4.0 * (t - s).cbrt() * cov_uv.cbrt());
    Ok(CheckReport::single(
        format!("shao_covariance(rho={rho}, s={s}, t={t})"),
        lhs,
        rhs,
        n_samples,
        seed,
    ))
}

/// Test function with a derivative bounded by 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothFunction {
    Sine,
    ClampedIdentity,
}

impl SmoothFunction {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            SmoothFunction::Sine => x.sin(),
            SmoothFunction::ClampedIdentity => x.clamp(-1.0, 1.0),
        }
    }

    pub fn derivative_bound(&self) -> f64 {
        1.0
    }
}

/// `|Cov(h(X), h(Y))| <= ||h'||^2 Cov(X, Y)` with `h = sin`.
pub fn smooth_covariance_check(rho: f64, n_samples: usize, seed: u64) -> Result<CheckReport> {
    smooth_covariance_check_with(SmoothFunction::Sine, rho, n_samples, seed)
}

pub fn smooth_covariance_check_with(
    h: SmoothFunction,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    check_rho(rho)?;
    if n_samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let (x, y) = bivariate_normal_pairs(rho, n_samples, seed);
    let hx: Vec<f64> = x.iter().map(|&v| h.apply(v)).collect();
    let hy: Vec<f64> = y.iter().map(|&v| h.apply(v)).collect();
    let lhs = stats::covariance_with_se(&hx, &hy).abs();
    let bound = h.derivative_bound();
    let rhs = Estimate::exact(bound * bound * rho);
    Ok(CheckReport::single(
        format!("smooth_covariance(h={h:?}, rho={rho})"),
        lhs,
        rhs,
        n_samples,
        seed,
    ))
}

/// Exact `Var(sum_{i<=m} Z_i)` for the latent unit-variance Gaussian sequence.
pub fn latent_partial_sum_variance(spec: &GeneratorSpec, m: usize) -> f64 {
    let mut v = m as f64 * spec.target_autocovariance(0);
    for l in 1..m {
        v += 2.0 * (m - l) as f64 * spec.target_autocovariance(l);
    }
    v
}

/// `P(max_k |S_k| >= lambda s_m) <= 2 P(|S_m| >= (lambda - sqrt 2) s_m)` for
/// centered partial sums of a generated path.
pub fn maximal_inequality_check(
    spec: &GeneratorSpec,
    m: usize,
    lambda: f64,
    n_reps: usize,
    seed: u64,
) -> Result<CheckReport> {
    if !(lambda > std::f64::consts::SQRT_2) {
        return Err(Error::domain(format!(
            "lambda must exceed sqrt 2, got {lambda}"
        )));
    }
    if m == 0 || n_reps < 2 {
        return Err(Error::domain("need m >= 1 and at least two replications"));
    }
    let sampler = PathSampler::new(*spec, m)?;
    let centre = spec.marginal.mean();
    let chunks = exec::chunk_bounds(n_reps, 1024);
    // per replication: (max_k |S_k|, |S_m|)
    let paths: Vec<(f64, f64)> = exec::map_indexed(chunks.len(), |c| {
        let (start, end) = chunks[c];
        (start..end)
            .map(|rep| {
                let path = sampler.sample(streams::derive_seed(seed, &[rep as u64]));
                let mut s = 0.0f64;
                let mut max_abs = 0.0f64;
                for x in &path.values {
                    s += x - centre;
                    max_abs = max_abs.max(s.abs());
                }
                (max_abs, s.abs())
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let (s_m, note) = if spec.marginal == Marginal::StandardNormal {
        (
            latent_partial_sum_variance(spec, m).sqrt(),
            "s_m exact from autocovariances",
        )
    } else {
        let ms = paths.iter().map(|(_, s)| s * s).sum::<f64>() / n_reps as f64;
        (ms.sqrt(), "s_m estimated by Monte Carlo")
    };
    let lhs_hits = paths.iter().filter(|(mx, _)| *mx >= lambda * s_m).count();
    let rhs_hits = paths
        .iter()
        .filter(|(_, s)| *s >= (lambda - std::f64::consts::SQRT_2) * s_m)
        .count();
    let lhs = stats::proportion(lhs_hits, n_reps);
    let rhs = stats::proportion(rhs_hits, n_reps).scale(2.0);
    let mut report = CheckReport::single(
        format!(
            "maximal_inequality(model={:?}, m={m}, lambda={lambda})",
            spec.model
        ),
        lhs,
        rhs,
        n_reps,
        seed,
    );
    report.notes.push(note.into());
    Ok(report)
}

/// Fitted growth exponent of `E|sum_{i<=n} V_i|^r` for centered indicators
/// `V_i = 1{X_i > median} - 1/2`; passes when the slope is at most `r/2 + 0.1`.
pub fn moment_growth_check(
    spec: &GeneratorSpec,
    r: f64,
    n_grid: &[usize],
    n_reps: usize,
    seed: u64,
) -> Result<CheckReport> {
    if !(r > 2.0) {
        return Err(Error::domain(format!(
            "moment order must exceed 2, got {r}"
        )));
    }
    if n_grid.is_empty() || n_grid.contains(&0) || n_reps < 2 {
        return Err(Error::domain(
            "need a nonempty grid of positive lengths and n_reps >= 2",
        ));
    }
    // indicator covariances are at most 4 ||f||^(2/3) Cov^(1/3) ~ k^(-b/3); the
    // tail sum condition of order n^(-(r-2)/2) then needs b >= 3r/2
    let needed = 1.5 * r;
    let cert = spec.decay_certificate(needed)?;
    if !cert.holds {
        return Err(Error::Precondition(format!(
            "covariance tail condition for r = {r} needs decay exponent >= {needed}"
        )));
    }
    let x0 = spec.marginal.quantile(0.5)?;
    let p_exceed = spec.marginal.sf(x0);
    let bound = r / 2.0 + 0.1;

    let mut components = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (gi, &n) in n_grid.iter().enumerate() {
        let sampler = PathSampler::new(*spec, n)?;
        let moments = exec::map_indexed(n_reps, |rep| {
            let path = sampler.sample(streams::derive_seed(seed, &[gi as u64, rep as u64]));
            let s: f64 = path
                .values
                .iter()
                .map(|&x| if x > x0 { 1.0 - p_exceed } else { -p_exceed })
                .sum();
            s.abs().powf(r)
        });
        let est = stats::mean_with_se(&moments);
        components.push(CheckComponent {
            label: format!("E|S_{n}|^{r}"),
            lhs: est.value,
            rhs: 0.0,
            lhs_se: est.se,
            rhs_se: 0.0,
            verdict: Verdict::Pass,
        });
        xs.push((n as f64).ln());
        ys.push(est.value.ln());
        let rel = est.se / est.value;
        ws.push(1.0 / (rel * rel).max(1e-12));
    }
    let name = format!("moment_growth(model={:?}, r={r})", spec.model);
    let total = n_reps * n_grid.len();
    if n_grid.len() < 2 {
        let mut report = CheckReport {
            name,
            lhs: 0.0,
            rhs: bound,
            lhs_se: 0.0,
            rhs_se: 0.0,
            margin_sigmas: 0.0,
            verdict: Verdict::Inconclusive,
            n_samples: total,
            seed,
            components,
            notes: Vec::new(),
        };
        report
            .notes
            .push("single grid point: no slope to fit".into());
        return Ok(report);
    }
    let fit = stats::weighted_linear_fit(&xs, &ys, &ws)?;
    let verdict = if fit.slope <= bound {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CheckReport {
        name,
        lhs: fit.slope,
        rhs: bound,
        lhs_se: fit.slope_se,
        rhs_se: 0.0,
        margin_sigmas: 0.0,
        verdict,
        n_samples: total,
        seed,
        components,
        notes: vec!["lhs is the fitted log-log slope, rhs is r/2 + 0.1".into()],
    })
}

/// For each lag `k` in `1..=lag_max`,
/// `Cov(1{X_1 > x0}, 1{X_{1+k} > x0}) <= 4 ||f||^(2/3) Cov(X_1, X_{1+k})^(1/3)`.
pub fn indicator_covariance_chain(
    spec: &GeneratorSpec,
    x0: f64,
    lag_max: usize,
    n_reps: usize,
    seed: u64,
) -> Result<CheckReport> {
    if lag_max == 0 || n_reps < 2 {
        return Err(Error::domain(
            "need lag_max >= 1 and at least two replications",
        ));
    }
    let sampler = PathSampler::new(*spec, lag_max + 1)?;
    let paths: Vec<Vec<f64>> = exec::map_indexed(n_reps, |rep| {
        sampler
            .sample(streams::derive_seed(seed, &[rep as u64]))
            .values
    });
    let first: Vec<f64> = paths.iter().map(|p| p[0]).collect();
    let first_ind: Vec<f64> = first.iter().map(|&x| f64::from(u8::from(x > x0))).collect();
    let f_sup = spec.marginal.density_sup();
    let scale = 4.0 * f_sup.powf(2.0 / 3.0);
    let exact_cov = spec.marginal == Marginal::StandardNormal;

    let components = (1..=lag_max)
        .map(|k| {
            let other: Vec<f64> = paths.iter().map(|p| p[k]).collect();
            let ind: Vec<f64> = other.iter().map(|&x| f64::from(u8::from(x > x0))).collect();
            let lhs = stats::covariance_with_se(&first_ind, &ind);
            let cov_x = if exact_cov {
                Estimate::exact(spec.target_autocovariance(k))
            } else {
                stats::covariance_with_se(&first, &other)
            };
            let rhs = cov_x.map_monotone(0.0, f64::cbrt).scale(scale);
            component(format!("lag {k}"), lhs, rhs, DEFAULT_MARGIN_SIGMAS)
        })
        .collect();
    Ok(CheckReport::from_components(
        format!(
            "indicator_covariance_chain(model={:?}, x0={x0})",
            spec.model
        ),
        components,
        DEFAULT_MARGIN_SIGMAS,
        n_reps,
        seed,
    ))
}

/// How [`lemma1_exponent_check`] treats grid points with `gap <= 2 n^alpha_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Reject the grid with a precondition error.
    Enforce,
    /// Run anyway and list the offending points in the report notes.
    Record,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Options {
    pub eta: f64,
    /// Bound on max/min of the normalized moments across the grid.
    pub ratio_cap: f64,
    /// Centre of the interval `(s, t]`.
    pub centre: f64,
    pub window: WindowPolicy,
}

impl Default for Lemma1Options {
    fn default() -> Self {
        Lemma1Options {
            eta: 0.01,
            ratio_cap: 10.0,
            centre: 0.5,
            window: WindowPolicy::Enforce,
        }
    }
}

/// Normalized moments `E|E_n(t) - E_n(s) - (t-s)|^q n^(q/2) (t-s)^(-q(q-3)/(2(q-1)))`
/// must stay within `ratio_cap` of each other and show no upward trend in `n`
/// (per-gap fitted slope at most twice its standard error).
pub fn lemma1_exponent_check(
    spec: &GeneratorSpec,
    q: f64,
    gaps: &[f64],
    n_grid: &[usize],
    n_reps: usize,
    seed: u64,
    options: Lemma1Options,
) -> Result<CheckReport> {
    let alpha = theory::alpha_q(q, options.eta)?;
    if let Some(b) = spec.decay_exponent() {
        if !(b > q - 1.0) {
            return Err(Error::Precondition(format!(
                "moment bound of order q = {q} needs decay exponent b > q - 1, got {b}"
            )));
        }
    }
    if gaps.is_empty() || n_grid.len() < 2 || n_reps < 2 {
        return Err(Error::domain(
            "need gaps, at least two lengths, and n_reps >= 2",
        ));
    }
    let mut intervals = Vec::new();
    for &g in gaps {
        let s = options.centre - g / 2.0;
        let t = options.centre + g / 2.0;
        if !(g > 0.0 && s >= 0.0 && t <= 1.0) {
            return Err(Error::domain(format!(
                "gap {g} does not fit around {}",
                options.centre
            )));
        }
        intervals.push((s, t));
    }
    let mut violations = Vec::new();
    for &n in n_grid {
        let threshold = 2.0 * (n as f64).powf(alpha.alpha);
        for &g in gaps {
            if !(g > threshold) {
                violations.push(format!(
                    "n = {n}, gap = {g} <= 2 n^alpha_q = {threshold:.4}"
                ));
            }
        }
    }
    if options.window == WindowPolicy::Enforce && !violations.is_empty() {
        return Err(Error::Precondition(format!(
            "window condition t - s > 2 n^alpha_q (alpha_q = {:.4}) fails at {}",
            alpha.alpha,
            violations.join("; ")
        )));
    }

    let gap_power = -q * (q - 3.0) / (2.0 * (q - 1.0));
    // normalized[gap][n]
    let mut normalized = vec![Vec::with_capacity(n_grid.len()); gaps.len()];
    let mut components = Vec::new();
    for (ni, &n) in n_grid.iter().enumerate() {
        let sampler = PathSampler::new(*spec, n)?;
        let per_rep: Vec<Vec<f64>> = exec::map_indexed(n_reps, |rep| {
            let z = sampler.gaussian(streams::derive_seed(seed, &[ni as u64, rep as u64]));
            let u: Vec<f64> = z.iter().map(|&v| normal_cdf(v)).collect();
            intervals
                .iter()
                .map(|&(s, t)| {
                    let count = u.iter().filter(|&&x| s < x && x <= t).count();
                    (count as f64 / n as f64 - (t - s)).abs().powf(q)
                })
                .collect()
        });
        for (gi, &g) in gaps.iter().enumerate() {
            let vals: Vec<f64> = per_rep.iter().map(|v| v[gi]).collect();
            let est = stats::mean_with_se(&vals);
            let norm = (n as f64).powf(q / 2.0) * g.powf(gap_power);
            normalized[gi].push(est.scale(norm));
        }
    }

    let all: Vec<f64> = normalized.iter().flatten().map(|e| e.value).collect();
    let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    components.push(CheckComponent {
        label: "max/min normalized moment".into(),
        lhs: ratio,
        rhs: options.ratio_cap,
        lhs_se: 0.0,
        rhs_se: 0.0,
        verdict: if min > 0.0 && ratio <= options.ratio_cap {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    });
    let ln_n: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    for (gi, &g) in gaps.iter().enumerate() {
        let ys: Vec<f64> = normalized[gi].iter().map(|e| e.value.ln()).collect();
        let ws: Vec<f64> = normalized[gi]
            .iter()
            .map(|e| {
                let rel = e.se / e.value;
                1.0 / (rel * rel).max(1e-12)
            })
            .collect();
        let fit = stats::weighted_linear_fit(&ln_n, &ys, &ws)?;
        components.push(CheckComponent {
            label: format!("slope in n, gap {g}"),
            lhs: fit.slope,
            rhs: 2.0 * fit.slope_se,
            lhs_se: fit.slope_se,
            rhs_se: 0.0,
            verdict: if fit.slope <= 2.0 * fit.slope_se {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        });
    }
    for (gi, &g) in gaps.iter().enumerate() {
        for (ni, &n) in n_grid.iter().enumerate() {
            let e = normalized[gi][ni];
            components.push(CheckComponent {
                label: format!("normalized moment, n = {n}, gap = {g}"),
                lhs: e.value,
                rhs: max,
                lhs_se: e.se,
                rhs_se: 0.0,
                verdict: Verdict::Pass,
            });
        }
    }
    let mut report = CheckReport::from_components(
        format!("lemma1_exponent(model={:?}, q={q})", spec.model),
        components,
        0.0,
        n_reps * n_grid.len(),
        seed,
    );
    report.lhs = ratio;
    report.rhs = options.ratio_cap;
    report.lhs_se = 0.0;
    report.rhs_se = 0.0;
    if !violations.is_empty() {
        report.notes.push(format!(
            "window condition t - s > 2 n^alpha_q (alpha_q = {:.4}) not met at {} of {} grid points",
            alpha.alpha,
            violations.len(),
            gaps.len() * n_grid.len()
        ));
    }
    Ok(report)
}
