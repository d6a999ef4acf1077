//! The `bahadur` command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or unexpected error, 2 configuration
//! or argument error, 3 generation failure, 4 decay threshold violation,
//! 5 missing marginal metadata. Outputs are staged under temporary names and
//! renamed only once every file of a command has been written.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::assoc_gen::{self, GeneratorSpec, Series, SeriesManifest};
use crate::config::{self, RunConfig};
use crate::error::Error;
use crate::exec;
use crate::ineq_check::{self, CheckReport, Lemma1Options, Verdict, WindowPolicy};
use crate::marginals::Marginal;
use crate::rate_lab::{self, ExperimentManifest, Metric, VarEstimate};

pub const VERSION: &str = match option_env!("BAHADUR_BUILD_VERSION") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;
pub const EXIT_MISSING_MARGINAL: i32 = 5;

pub const OUT_DIR_ENV: &str = "BAHADUR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "bahadur", version = VERSION, about = "Sample quantiles of associated sequences")]
pub struct Cli {
    /// Worker threads for replication loops (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one path: CSV plus JSON sidecar.
    Gen(GenArgs),
    /// Rate experiment over the configured n grid.
    Rates(RatesArgs),
    /// Rate experiment for the local oscillation modulus.
    #[command(alias = "oscillation")]
    Osc(OscArgs),
    /// Run Monte Carlo checks of the covariance and moment inequalities.
    Check(CheckArgs),
    /// Value-at-Risk with a dependence-adjusted confidence interval.
    Var(VarArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "bahadur_out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `experiment.metric`; defaults to remainder.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OscArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Supplies `seed` and the `[check]` section.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Latent correlation for the bivariate suites.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Base Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VarArgs {
    /// Generator config; the loss series is simulated.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub config: Option<PathBuf>,
    /// Series CSV with a `<stem>.json` sidecar naming its marginal.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub confidence: Option<f64>,
    #[arg(long)]
    pub bandwidth: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Deviation,
    Oscillation,
    Remainder,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Deviation => Metric::QuantileDeviation,
            MetricArg::Oscillation => Metric::Oscillation,
            MetricArg::Remainder => Metric::Remainder,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Shao,
    Smooth,
    Maximal,
    Moment,
    Chain,
    Lemma1,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started: u64,
    pub finished: u64,
    pub outputs: Vec<String>,
    pub version: String,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::Domain(_) | Error::Precondition(_) => EXIT_CONFIG,
            Error::Embedding { .. } | Error::Factorization { .. } => EXIT_GENERATION,
            Error::Threshold(_) => EXIT_THRESHOLD,
            Error::MissingMarginal(_) => EXIT_MISSING_MARGINAL,
            Error::DegenerateDensity { .. } | Error::Io(_) | Error::Json(_) => EXIT_FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display()))
}

/// Files written under temporary names; dropped without `commit` they vanish.
struct Staging {
    files: Vec<(PathBuf, PathBuf)>,
}

impl Staging {
    fn new() -> Self {
        Staging { files: Vec::new() }
    }

    fn write(&mut self, path: PathBuf, contents: &[u8]) -> std::result::Result<(), Failure> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        }
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(format!(".tmp{}", std::process::id()));
        let tmp = path.with_file_name(name);
        let mut f = fs::File::create(&tmp).map_err(|e| io_failure(&tmp, e))?;
        f.write_all(contents).map_err(|e| io_failure(&tmp, e))?;
        self.files.push((tmp, path));
        Ok(())
    }

    fn commit(mut self) -> std::result::Result<Vec<String>, Failure> {
        let files = std::mem::take(&mut self.files);
        let mut out = Vec::with_capacity(files.len());
        for (tmp, path) in files {
            fs::rename(&tmp, &path).map_err(|e| io_failure(&path, e))?;
            out.push(path.display().to_string());
        }
        Ok(out)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        for (tmp, _) in &self.files {
            let _ = fs::remove_file(tmp);
        }
    }
}

fn json_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}

fn finish(
    staging: Staging,
    dir: &Path,
    command: &str,
    config_hash: String,
    seed: u64,
    started: u64,
) -> std::result::Result<(), Failure> {
    let outputs = staging.commit()?;
    let manifest = RunManifest {
        command: command.to_string(),
        config_hash,
        seed,
        started,
        finished: now(),
        outputs,
        version: VERSION.to_string(),
    };
    let mut s = Staging::new();
    s.write(
        dir.join(format!("{command}_manifest.json")),
        &json_pretty(&manifest),
    )?;
    s.commit()?;
    Ok(())
}

fn load_config(path: &Path, seed: Option<u64>) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        exec::configure_threads(t);
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Rates(a) => {
            let metric = a.metric.map(Metric::from);
            cmd_rates(&a.config, metric, &a.out)
        }
        Command::Osc(a) => cmd_rates(&a.config, Some(Metric::Oscillation), &a.out),
        Command::Check(a) => cmd_check(&a),
        Command::Var(a) => cmd_var(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn cmd_gen(a: &GenArgs) -> CmdResult {
    let started = now();
    let cfg = load_config(&a.config, a.out.seed)?;
    let n = cfg.series_len(4096);
    let series = assoc_gen::sample(&cfg.spec, n, cfg.seed)?;
    let dir = &a.out.out;
    let mut staging = Staging::new();
    staging.write(dir.join("series.csv"), series.to_csv().as_bytes())?;
    staging.write(dir.join("series.json"), &json_pretty(&series.manifest()))?;
    finish(staging, dir, "gen", cfg.hash(), cfg.seed, started)?;
    println!("wrote {n} values to {}", dir.join("series.csv").display());
    Ok(EXIT_OK)
}

pub fn cmd_rates(config: &Path, metric: Option<Metric>, out: &OutArgs) -> CmdResult {
    let started = now();
    let cfg = load_config(config, out.seed)?;
    let metric = metric
        .or(cfg.experiment.as_ref().and_then(|e| e.metric))
        .unwrap_or(Metric::Remainder);
    let exp = cfg.experiment_config()?;
    let run = rate_lab::run_experiment(&exp, metric)?;
    let fit = rate_lab::fit_rate(&run, metric)?;
    let violations = run.decomposition_violations().len();

    let stem = format!("rates_{}", metric.name());
    let dir = &out.out;
    let mut staging = Staging::new();
    staging.write(
        dir.join(format!("{stem}_replications.csv")),
        run.to_csv().as_bytes(),
    )?;
    staging.write(dir.join(format!("{stem}_fit.json")), &json_pretty(&fit))?;
    staging.write(
        dir.join(format!("{stem}_experiment.json")),
        &json_pretty(&ExperimentManifest::new(&run, metric, VERSION)),
    )?;
    finish(staging, dir, &stem, cfg.hash(), cfg.seed, started)?;

    println!("{:>8}  {:>14}  {:>12}", "n", metric.name(), "mc_se");
    for pt in &fit.per_n {
        println!(
            "{:>8}  {:>14.6e}  {:>12.3e}",
            pt.n, pt.summary_value, pt.mc_se
        );
    }
    println!(
        "slope = {:.4} ± {:.4}   theory exponent = {:.4} (log power {:.4})",
        fit.slope, fit.slope_se, fit.theory_exponent, fit.log_correction
    );
    if violations > 0 {
        eprintln!("warning: decomposition identity failed on {violations} paths");
    }
    Ok(EXIT_OK)
}

/// Parameters shared by the built-in check suites.
#[derive(Clone, Copy, Debug)]
pub struct SuiteParams {
    pub samples: usize,
    pub rho: Option<f64>,
    pub seed: u64,
}

/// Reports of one suite at scaled-down default grids.
pub fn run_suite(suite: Suite, p: SuiteParams) -> crate::Result<Vec<CheckReport>> {
    let normal = Marginal::StandardNormal;
    let iid = GeneratorSpec::iid(normal);
    let b4 = GeneratorSpec::power_law(4.0, normal)?;
    let b7 = GeneratorSpec::power_law(7.0, normal)?;
    let rhos = |default: &[f64]| p.rho.map_or_else(|| default.to_vec(), |r| vec![r]);
    let seed = |tag: u64| crate::streams::derive_seed(p.seed, &[tag]);
    let mut out = Vec::new();
    match suite {
        Suite::Shao => {
            for rho in rhos(&[0.0, 0.2, 0.5, 0.8]) {
                for (s, t) in [(0.25, 0.75), (0.4, 0.6), (0.05, 0.95)] {
                    out.push(ineq_check::shao_covariance_check(
                        rho,
                        s,
                        t,
                        p.samples,
                        seed(1),
                    )?);
                }
            }
        }
        Suite::Smooth => {
            for rho in rhos(&[0.0, 0.5, 0.9]) {
                out.push(ineq_check::smooth_covariance_check(
                    rho,
                    p.samples,
                    seed(2),
                )?);
            }
        }
        Suite::Maximal => {
            for spec in [iid, b4] {
                for m in [64, 256] {
                    for lambda in [1.6, 2.0, 3.0] {
                        out.push(ineq_check::maximal_inequality_check(
                            &spec,
                            m,
                            lambda,
                            (p.samples / 10).max(2),
                            seed(3),
                        )?);
                    }
                }
            }
        }
        Suite::Moment => {
            out.push(ineq_check::moment_growth_check(
                &b7,
                4.0,
                &[64, 128, 256, 512, 1024],
                (p.samples / 100).max(2),
                seed(4),
            )?);
        }
        Suite::Chain => {
            out.push(ineq_check::indicator_covariance_chain(
                &b4,
                0.0,
                10,
                (p.samples / 10).max(2),
                seed(5),
            )?);
        }
        Suite::Lemma1 => {
            let options = Lemma1Options {
                window: WindowPolicy::Record,
                ..Lemma1Options::default()
            };
            for spec in [GeneratorSpec::iid(Marginal::Uniform01), b7] {
                out.push(ineq_check::lemma1_exponent_check(
                    &spec,
                    5.0,
                    &[0.05, 0.1, 0.2],
                    &[1024, 2048, 4096],
                    (p.samples / 200).max(2),
                    seed(6),
                    options,
                )?);
            }
        }
        Suite::All => {
            for s in [
                Suite::Shao,
                Suite::Smooth,
                Suite::Maximal,
                Suite::Moment,
                Suite::Chain,
                Suite::Lemma1,
            ] {
                out.extend(run_suite(s, p)?);
            }
        }
    }
    Ok(out)
}

pub fn cmd_check(a: &CheckArgs) -> CmdResult {
    let started = now();
    let cfg = a
        .config
        .as_deref()
        .map(|c| load_config(c, a.out.seed))
        .transpose()?;
    let section = cfg.as_ref().and_then(|c| c.check).unwrap_or_default();
    let params = SuiteParams {
        samples: a.samples.or(section.samples).unwrap_or(200_000),
        rho: a.rho.or(section.rho),
        seed: a.out.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0),
    };
    let reports = run_suite(a.suite, params)?;

    let dir = &a.out.out;
    let path = dir.join("checks.jsonl");
    let mut text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(io_failure(&path, e)),
    };
    for r in &reports {
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    let mut staging = Staging::new();
    staging.write(path, text.as_bytes())?;
    let hash = config::hex_digest(format!("{:?}|{params:?}", a.suite).as_bytes());
    finish(staging, dir, "check", hash, params.seed, started)?;

    println!(
        "{:<14} {:>12} {:>12} {:>10}  check",
        "verdict", "lhs", "rhs", "se"
    );
    for r in &reports {
        println!(
            "{:<14} {:>12.4e} {:>12.4e} {:>10.2e}  {}",
            format!("{:?}", r.verdict),
            r.lhs,
            r.rhs,
            r.lhs_se + r.rhs_se,
            r.name
        );
    }
    let fails = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .count();
    let inconclusive = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Inconclusive)
        .count();
    if inconclusive > 0 {
        eprintln!("warning: {inconclusive} inconclusive checks");
    }
    if fails > 0 {
        eprintln!("{fails} of {} checks failed", reports.len());
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

/// Sidecar manifest path for a series CSV: same stem, `.json` extension.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

fn load_series(data: &Path) -> std::result::Result<Series, Failure> {
    let text = fs::read_to_string(data)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", data.display())))?;
    let values = assoc_gen::parse_series_csv(&text)?;
    let sidecar = sidecar_path(data);
    let manifest_text = fs::read_to_string(&sidecar).map_err(|_| {
        Failure::from(Error::MissingMarginal(format!(
            "{} has no sidecar manifest {}; the marginal density at the quantile is needed for the interval",
            data.display(),
            sidecar.display()
        )))
    })?;
    let manifest: SeriesManifest = serde_json::from_str(&manifest_text).map_err(|e| {
        Failure::from(Error::MissingMarginal(format!(
            "{}: {e}",
            sidecar.display()
        )))
    })?;
    if manifest.n != values.len() {
        return Err(Failure::new(
            EXIT_CONFIG,
            format!(
                "sidecar says n = {} but the CSV holds {} values",
                manifest.n,
                values.len()
            ),
        ));
    }
    Ok(Series {
        values,
        spec: manifest.spec,
        seed: manifest.seed,
        n: manifest.n,
    })
}

pub fn cmd_var(a: &VarArgs) -> CmdResult {
    let started = now();
    let (series, cfg_section, hash) = match (&a.data, &a.config) {
        (Some(data), _) => {
            let s = load_series(data)?;
            let hash = config::hex_digest(&serde_json::to_vec(&s.manifest()).map_err(Error::from)?);
            (s, None, hash)
        }
        (None, Some(path)) => {
            let cfg = load_config(path, a.out.seed)?;
            let s = assoc_gen::sample(&cfg.spec, cfg.series_len(100_000), cfg.seed)?;
            (s, cfg.var, cfg.hash())
        }
        (None, None) => return Err(Failure::new(EXIT_CONFIG, "need --data or --config")),
    };
    let section = cfg_section.unwrap_or_default();
    let level = a.level.unwrap_or(section.level);
    let confidence = a.confidence.unwrap_or(section.confidence);
    let bandwidth = a.bandwidth.or(section.bandwidth);
    let est: VarEstimate = rate_lab::var_with_ci(&series, level, confidence, bandwidth)?;

    let dir = &a.out.out;
    let mut staging = Staging::new();
    staging.write(dir.join("var.json"), &json_pretty(&est))?;
    finish(staging, dir, "var", hash, series.seed, started)?;
    println!(
        "VaR_{} = {:.6} [{:.6}, {:.6}]",
        est.level, est.var_point, est.ci_low, est.ci_high
    );
    Ok(EXIT_OK)
}
