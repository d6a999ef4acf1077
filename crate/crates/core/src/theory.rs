//! Rate constants and admissible exponents. Logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 0.05;

/// `(b - 3) / (b - 1)`.
pub fn beta_b(b: f64) -> Result<f64> {
    if !(b > 1.0) {
        return Err(Error::domain(format!("beta_b needs b > 1, got {b}")));
    }
    if b.is_infinite() {
        return Ok(1.0);
    }
    Ok((b - 3.0) / (b - 1.0))
}

/// `(5 + sqrt(17)) / 2`, the decay threshold for the oscillation and
/// remainder rates.
pub fn min_b_theorem2() -> f64 {
    (5.0 + 17f64.sqrt()) / 2.0
}

/// Decay threshold for the quantile deviation rate.
pub const MIN_B_THEOREM1: f64 = 3.0;

/// `-1/2 - beta_b / 4`.
pub fn thm3_rate_exponent(b: f64) -> Result<f64> {
    if !(b > min_b_theorem2()) {
        return Err(Error::Threshold(format!(
            "remainder rate needs b > (5 + sqrt 17)/2 = {:.6}, got {b}",
            min_b_theorem2()
        )));
    }
    Ok(-0.5 - beta_b(b)? / 4.0)
}

/// Moment-bound exponent `alpha_q` with its side condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaQ {
    pub alpha: f64,
    /// `(-q + 1 + eta) / (q + 2)`, which `alpha` must exceed.
    pub side_bound: f64,
}

/// `(-q + 4 + 2 eta)(q - 1) / ((q + 2)(q - 3))`, validated to be negative
/// and above `(-q + 1 + eta) / (q + 2)`.
pub fn alpha_q(q: f64, eta: f64) -> Result<AlphaQ> {
    if !(q > 4.0) {
        return Err(Error::domain(format!("alpha_q needs q > 4, got {q}")));
    }
    if !(eta > 0.0) {
        return Err(Error::domain(format!("alpha_q needs eta > 0, got {eta}")));
    }
    let alpha = (-q + 4.0 + 2.0 * eta) * (q - 1.0) / ((q + 2.0) * (q - 3.0));
    if !(alpha < 0.0) {
        return Err(Error::domain(format!(
            "alpha_q = {alpha} is not negative (needs eta < (q - 4)/2 = {})",
            (q - 4.0) / 2.0
        )));
    }
    let side_bound = (-q + 1.0 + eta) / (q + 2.0);
    if !(alpha > side_bound) {
        return Err(Error::domain(format!(
            "alpha_q = {alpha} does not exceed (-q + 1 + eta)/(q + 2) = {side_bound}"
        )));
    }
    Ok(AlphaQ { alpha, side_bound })
}

/// Exponents used to parameterize one experiment. `b = None` stands for
/// covariances decaying faster than any power (iid, AR(1)), where every
/// quantity takes its `b -> infinity` limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub b: Option<f64>,
    pub beta_b: f64,
    /// Log exponent of the quantile deviation envelope and the window radius.
    pub delta: f64,
    /// Log exponent of the oscillation and remainder envelope.
    pub gamma: f64,
    /// Alternative lower bound `delta beta_b / 2 + 1/b` on `gamma`; it meets
    /// the `3 beta_b / (4b) + 1/b` form when `delta = 3/(2b)`.
    pub gamma_bound_via_delta: f64,
    pub thm1_exponent: f64,
    pub thm3_exponent: f64,
    /// Whether `b` clears the `(5 + sqrt 17)/2` threshold.
    pub remainder_rate_applies: bool,
}

impl RateParams {
    fn build(b: Option<f64>, margin: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::domain(format!(
                "margin must be strictly positive (the exponent inequalities are strict), got {margin}"
            )));
        }
        let (beta, delta_min, gamma_min, inv_b) = match b {
            Some(b) => {
                let beta = beta_b(b)?;
                (
                    beta,
                    3.0 / (2.0 * b),
                    3.0 * beta / (4.0 * b) + 1.0 / b,
                    1.0 / b,
                )
            }
            None => (1.0, 0.0, 0.0, 0.0),
        };
        let delta = delta_min + margin;
        Ok(RateParams {
            b,
            beta_b: beta,
            delta,
            gamma: gamma_min + margin,
            gamma_bound_via_delta: delta * beta / 2.0 + inv_b,
            thm1_exponent: -0.5,
            thm3_exponent: -0.5 - beta / 4.0,
            remainder_rate_applies: b.is_none_or(|b| b > min_b_theorem2()),
        })
    }

    /// Exponents for a process with faster than polynomial decay.
    pub fn fast_decay(margin: f64) -> Result<Self> {
        Self::build(None, margin)
    }

    /// Exponents for which only the quantile deviation rate is claimed (`b > 3`).
    pub fn for_deviation(b: f64, margin: f64) -> Result<Self> {
        if !(b > MIN_B_THEOREM1) {
            return Err(Error::Threshold(format!(
                "quantile deviation rate needs b > 3, got {b}"
            )));
        }
        Self::build(Some(b), margin)
    }
}

/// `delta = 3/(2b) + margin`, `gamma = 3 beta_b/(4b) + 1/b + margin`.
pub fn admissible_exponents(b: f64, margin: f64) -> Result<RateParams> {
    if !(b > min_b_theorem2()) {
        return Err(Error::Threshold(format!(
            "admissible exponents need b > (5 + sqrt 17)/2 = {:.6}, got {b}",
            min_b_theorem2()
        )));
    }
    RateParams::build(Some(b), margin)
}

/// `c n^(-1/2) (ln n)^delta`.
pub fn window_half_width(n: usize, c: f64, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!(
            "window radius needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    Ok(c * nf.powf(-0.5) * nf.ln().powf(delta))
}
