//! Closed-form marginal distributions.
//!
//! Each [`Marginal`] supplies the distribution function `F`, the density `f`
//! and the quantile function `Q`. They serve both as sampling targets (via a
//! monotone map from a standard normal) and as the known `F, f, Q` against
//! which sample quantiles are compared.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Inputs to [`Marginal::quantile`] are clamped into `[P_FLOOR, 1 - P_FLOOR]`.
pub const P_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Marginal {
    #[serde(rename = "normal")]
    StandardNormal,
    #[serde(rename = "exponential")]
    Exponential { rate: f64 },
    #[serde(rename = "uniform")]
    Uniform01,
}

/// A quantile evaluation together with whether the probability was clamped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantileValue {
    pub value: f64,
    pub saturated: bool,
}

impl Marginal {
    pub fn exponential(rate: f64) -> Result<Self> {
        let m = Marginal::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => Err(
                Error::domain(format!("exponential rate must be positive, got {rate}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Marginal::StandardNormal => "normal",
            Marginal::Exponential { .. } => "exponential",
            Marginal::Uniform01 => "uniform",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => normal_cdf(x),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Marginal::Uniform01 => x.clamp(0.0, 1.0),
        }
    }

    /// Survival function `1 - F(x)`, computed without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => normal_cdf(-x),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Marginal::Uniform01 => 1.0 - x.clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => normal_pdf(x),
            Marginal::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Marginal::Uniform01 => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.quantile_clamped(p).map(|q| q.value)
    }

    /// Quantile with the saturation flag exposed. Probabilities outside
    /// `(0, 1)` are rejected; those inside but closer than [`P_FLOOR`] to an
    /// endpoint are clamped so the result stays finite.
    pub fn quantile_clamped(&self, p: f64) -> Result<QuantileValue> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "quantile needs p in (0, 1), got {p}"
            )));
        }
        let clamped = p.clamp(P_FLOOR, 1.0 - P_FLOOR);
        let value = match *self {
            Marginal::StandardNormal => normal_quantile(clamped),
            Marginal::Exponential { rate } => -(-clamped).ln_1p() / rate,
            Marginal::Uniform01 => clamped,
        };
        Ok(QuantileValue {
            value,
            saturated: clamped != p,
        })
    }

    /// `sup_x f(x)`.
    pub fn density_sup(&self) -> f64 {
        match *self {
            Marginal::StandardNormal => FRAC_1_SQRT_2PI,
            Marginal::Exponential { rate } => rate,
            Marginal::Uniform01 => 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::StandardNormal => 0.0,
            Marginal::Exponential { rate } => 1.0 / rate,
            Marginal::Uniform01 => 0.5,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Marginal::StandardNormal => 1.0,
            Marginal::Exponential { rate } => 1.0 / (rate * rate),
            Marginal::Uniform01 => 1.0 / 12.0,
        }
    }

    /// The monotone map `z -> Q(Phi(z))` taking a standard normal variate to
    /// this marginal. Nondecreasing, so it preserves association.
    pub fn from_standard_normal(&self, z: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => z,
            Marginal::Uniform01 => normal_cdf(z),
            Marginal::Exponential { rate } => {
                // -ln(1 - Phi(z)), evaluated on whichever side avoids cancellation.
                if z < 0.0 {
                    -(-normal_cdf(z)).ln_1p() / rate
                } else {
                    -normal_cdf(-z).ln() / rate
                }
            }
        }
    }
}

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Newton step against the erfc-based cdf. Expects `p` strictly inside (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    if p > 0.5 {
        // 1 - p is exact for p >= 0.5.
        return -normal_quantile(1.0 - p);
    }
    let x = acklam(p);
    let err = normal_cdf(x) - p;
    x - err / normal_pdf(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}
