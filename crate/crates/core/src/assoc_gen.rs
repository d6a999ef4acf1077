//! Stationary associated sequences with known marginal and covariance decay.
//!
//! A latent stationary Gaussian sequence with nonnegative correlations is
//! associated (Pitt), and applying the nondecreasing map `Q_target(Phi(z))`
//! coordinatewise keeps it associated while moving the marginal to the
//! target. Power-law paths are drawn exactly by circulant embedding; when the
//! embedding spectrum has negative mass a dense Cholesky factor is used up to
//! [`DENSE_CAP`].

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::streams::{self, StreamRng};

pub const DENSE_CAP: usize = 8192;

/// Smallest circulant eigenvalue accepted before falling back to a dense factor.
pub const EIGENVALUE_TOLERANCE: f64 = -1e-10;

/// Latent Gaussian correlation structure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum CovarianceModel {
    /// `rho(k) = (1 + k)^(-b)`.
    #[serde(rename = "powerlaw")]
    GaussianPowerLaw { b: f64 },
    /// `rho(k) = rho^k`.
    #[serde(rename = "ar1")]
    GaussianAr1 { rho: f64 },
    #[serde(rename = "iid")]
    Iid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub model: CovarianceModel,
    pub marginal: Marginal,
}

/// Outcome of checking `Cov(X_1, X_{k+1}) <= b0 k^(-b)` for all `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub holds: bool,
    /// Smallest sufficient `b0`, when the bound holds.
    pub b0: Option<f64>,
}

impl GeneratorSpec {
    pub fn new(model: CovarianceModel, marginal: Marginal) -> Result<Self> {
        let spec = GeneratorSpec { model, marginal };
        spec.validate()?;
        Ok(spec)
    }

    pub fn iid(marginal: Marginal) -> Self {
        GeneratorSpec {
            model: CovarianceModel::Iid,
            marginal,
        }
    }

    pub fn power_law(b: f64, marginal: Marginal) -> Result<Self> {
        Self::new(CovarianceModel::GaussianPowerLaw { b }, marginal)
    }

    pub fn ar1(rho: f64, marginal: Marginal) -> Result<Self> {
        Self::new(CovarianceModel::GaussianAr1 { rho }, marginal)
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            CovarianceModel::GaussianPowerLaw { b } if !(b.is_finite() && b > 0.0) => {
                return Err(Error::domain(format!("power-law exponent b must be positive, got {b}")))
            }
            CovarianceModel::GaussianAr1 { rho } if !(0.0..1.0).contains(&rho) => {
                return Err(Error::domain(format!(
                    "AR(1) coefficient must lie in [0, 1) to keep the sequence associated, got {rho}"
                )))
            }
            _ => {}
        }
        self.marginal.validate()
    }

    /// Pre-transform autocovariance at lag `k` (unit variance at lag 0).
    pub fn target_autocovariance(&self, k: usize) -> f64 {
        match self.model {
            CovarianceModel::GaussianPowerLaw { b } => (1.0 + k as f64).powf(-b),
            CovarianceModel::GaussianAr1 { rho } => rho.powi(k as i32),
            CovarianceModel::Iid => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The polynomial decay exponent of the model, `None` when covariances
    /// vanish faster than any power.
    pub fn decay_exponent(&self) -> Option<f64> {
        match self.model {
            CovarianceModel::GaussianPowerLaw { b } => Some(b),
            _ => None,
        }
    }

    pub fn decay_certificate(&self, b_claimed: f64) -> Result<DecayCertificate> {
        if !(b_claimed > 0.0 && b_claimed.is_finite()) {
            return Err(Error::domain(format!(
                "claimed exponent must be positive, got {b_claimed}"
            )));
        }
        let holds = |b0: f64| DecayCertificate {
            holds: true,
            b0: Some(b0),
        };
        Ok(match self.model {
            CovarianceModel::Iid => holds(0.0),
            CovarianceModel::GaussianAr1 { rho } => {
                if rho == 0.0 {
                    holds(0.0)
                } else {
                    // sup_k rho^k k^bc, attained next to k* = bc / (-ln rho).
                    let f = |k: f64| (k * rho.ln() + b_claimed * k.ln()).exp();
                    let k_star = b_claimed / -rho.ln();
                    holds(integer_sup(f, k_star))
                }
            }
            CovarianceModel::GaussianPowerLaw { b } => {
                if (b_claimed - b).abs() <= 1e-12 * b {
                    // (k / (1 + k))^b increases to 1 without attaining it.
                    holds(1.0)
                } else if b_claimed > b {
                    DecayCertificate {
                        holds: false,
                        b0: None,
                    }
                } else {
                    let f = |k: f64| (b_claimed * k.ln() - b * (1.0 + k).ln()).exp();
                    let k_star = b_claimed / (b - b_claimed);
                    holds(integer_sup(f, k_star))
                }
            }
        })
    }

    /// The smallest `b0` for the model's own exponent (or `b = 1` for models
    /// with faster than polynomial decay).
    pub fn b0(&self) -> f64 {
        let b = self.decay_exponent().unwrap_or(1.0);
        self.decay_certificate(b)
            .ok()
            .and_then(|c| c.b0)
            .unwrap_or(f64::INFINITY)
    }
}

/// Max of a unimodal `f` over integers `k >= 1`, given its real maximizer.
fn integer_sup(f: impl Fn(f64) -> f64, k_star: f64) -> f64 {
    let mut best = f(1.0);
    for k in [k_star.floor(), k_star.ceil()] {
        if k >= 1.0 {
            best = best.max(f(k));
        }
    }
    best
}

/// One realized path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<f64>,
    pub spec: GeneratorSpec,
    pub seed: u64,
    pub n: usize,
}

/// JSON sidecar written next to an exported path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesManifest {
    pub spec: GeneratorSpec,
    pub seed: u64,
    pub n: usize,
}

impl Series {
    pub fn manifest(&self) -> SeriesManifest {
        SeriesManifest {
            spec: self.spec,
            seed: self.seed,
            n: self.n,
        }
    }

    /// Single-column CSV with header `x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20 + 2);
        out.push_str("x\n");
        for v in &self.values {
            let _ = writeln!(out, "{v}");
        }
        out
    }
}

/// Parse a single-column CSV of reals. A non-numeric first line is a header.
pub fn parse_series_csv(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::Config(format!(
                    "line {}: cannot parse {field:?} as a number",
                    i + 1
                )))
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Config("series file holds no values".into()));
    }
    Ok(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMethod {
    Independent,
    Recursive,
    Circulant,
    Dense,
}

/// What a [`PathSampler`] decided at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerReport {
    pub method: SamplingMethod,
    /// Circulant size `m`, when an embedding was attempted.
    pub embedding_size: Option<usize>,
    pub min_eigenvalue: Option<f64>,
    /// Set when the embedding spectrum was rejected and the dense factor is used.
    pub fallback: bool,
}

enum Engine {
    Independent,
    Ar1 {
        rho: f64,
        innovation_sd: f64,
    },
    Circulant {
        sqrt_scaled: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Dense {
        lower: DMatrix<f64>,
    },
}

/// Pre-computed sampler for a fixed `(spec, n)`. Reuse it across
/// replications: the embedding spectrum and FFT plan are built once.
pub struct PathSampler {
    spec: GeneratorSpec,
    n: usize,
    engine: Engine,
    eigenvalues: Vec<f64>,
    report: SamplerReport,
}

impl PathSampler {
    pub fn new(spec: GeneratorSpec, n: usize) -> Result<Self> {
        Self::with_dense_cap(spec, n, DENSE_CAP)
    }

    pub fn with_dense_cap(spec: GeneratorSpec, n: usize, dense_cap: usize) -> Result<Self> {
        spec.validate()?;
        if n == 0 {
            return Err(Error::domain("path length must be at least 1"));
        }
        match spec.model {
            CovarianceModel::Iid => Ok(Self::simple(
                spec,
                n,
                Engine::Independent,
                SamplingMethod::Independent,
            )),
            CovarianceModel::GaussianAr1 { rho } => Ok(Self::simple(
                spec,
                n,
                Engine::Ar1 {
                    rho,
                    innovation_sd: (1.0 - rho * rho).sqrt(),
                },
                SamplingMethod::Recursive,
            )),
            CovarianceModel::GaussianPowerLaw { .. } => {
                if n == 1 {
                    return Ok(Self::simple(
                        spec,
                        n,
                        Engine::Independent,
                        SamplingMethod::Independent,
                    ));
                }
                let m = (2 * (n - 1)).next_power_of_two();
                let first_row: Vec<f64> = (0..m)
                    .map(|j| spec.target_autocovariance(j.min(m - j)))
                    .collect();
                let mut planner = FftPlanner::<f64>::new();
                let fft = planner.plan_fft_forward(m);
                let mut buf: Vec<Complex64> =
                    first_row.iter().map(|&c| Complex64::new(c, 0.0)).collect();
                fft.process(&mut buf);
                let eigenvalues: Vec<f64> = buf.iter().map(|z| z.re).collect();
                let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
                if min_eigenvalue >= EIGENVALUE_TOLERANCE {
                    let sqrt_scaled = eigenvalues
                        .iter()
                        .map(|&l| (l.max(0.0) / m as f64).sqrt())
                        .collect();
                    Ok(PathSampler {
                        spec,
                        n,
                        engine: Engine::Circulant { sqrt_scaled, fft },
                        eigenvalues,
                        report: SamplerReport {
                            method: SamplingMethod::Circulant,
                            embedding_size: Some(m),
                            min_eigenvalue: Some(min_eigenvalue),
                            fallback: false,
                        },
                    })
                } else if n <= dense_cap {
                    let mut sampler = Self::dense(spec, n)?;
                    sampler.eigenvalues = eigenvalues;
                    sampler.report.embedding_size = Some(m);
                    sampler.report.min_eigenvalue = Some(min_eigenvalue);
                    sampler.report.fallback = true;
                    Ok(sampler)
                } else {
                    Err(Error::Embedding {
                        n,
                        cap: dense_cap,
                        min_eigenvalue,
                    })
                }
            }
        }
    }

    /// Sampler that always uses the dense Cholesky factor of the Toeplitz
    /// covariance, regardless of the embedding spectrum.
    pub fn dense(spec: GeneratorSpec, n: usize) -> Result<Self> {
        spec.validate()?;
        if n == 0 {
            return Err(Error::domain("path length must be at least 1"));
        }
        let acov: Vec<f64> = (0..n).map(|k| spec.target_autocovariance(k)).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        let chol = cov.cholesky().ok_or(Error::Factorization { n })?;
        Ok(PathSampler {
            spec,
            n,
            engine: Engine::Dense { lower: chol.l() },
            eigenvalues: Vec::new(),
            report: SamplerReport {
                method: SamplingMethod::Dense,
                embedding_size: None,
                min_eigenvalue: None,
                fallback: false,
            },
        })
    }

    fn simple(spec: GeneratorSpec, n: usize, engine: Engine, method: SamplingMethod) -> Self {
        PathSampler {
            spec,
            n,
            engine,
            eigenvalues: Vec::new(),
            report: SamplerReport {
                method,
                embedding_size: None,
                min_eigenvalue: None,
                fallback: false,
            },
        }
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn report(&self) -> &SamplerReport {
        &self.report
    }

    /// Circulant eigenvalues (empty when no embedding was attempted).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Latent unit-variance Gaussian path for `seed`.
    pub fn gaussian(&self, seed: u64) -> Vec<f64> {
        self.gaussian_from(&mut streams::rng(seed))
    }

    pub fn gaussian_from(&self, rng: &mut StreamRng) -> Vec<f64> {
        let n = self.n;
        match &self.engine {
            Engine::Independent => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            Engine::Ar1 { rho, innovation_sd } => {
                let mut out = Vec::with_capacity(n);
                let mut z: f64 = rng.sample(StandardNormal);
                out.push(z);
                for _ in 1..n {
                    let e: f64 = rng.sample(StandardNormal);
                    z = rho * z + innovation_sd * e;
                    out.push(z);
                }
                out
            }
            Engine::Circulant { sqrt_scaled, fft } => {
                let mut buf: Vec<Complex64> = sqrt_scaled
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.truncate(n);
                buf.into_iter().map(|z| z.re).collect()
            }
            Engine::Dense { lower } => {
                let e = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (lower * e).iter().copied().collect()
            }
        }
    }

    /// Path on the target marginal scale.
    pub fn sample(&self, seed: u64) -> Series {
        let marginal = self.spec.marginal;
        let values = self
            .gaussian(seed)
            .into_iter()
            .map(|z| marginal.from_standard_normal(z))
            .collect();
        Series {
            values,
            spec: self.spec,
            seed,
            n: self.n,
        }
    }
}

/// Draw one path of length `n` from `spec` using stream `seed`.
pub fn sample(spec: &GeneratorSpec, n: usize, seed: u64) -> Result<Series> {
    Ok(PathSampler::new(*spec, n)?.sample(seed))
}
