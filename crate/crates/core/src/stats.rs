//! Small numeric helpers shared by the checks and the experiment harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `(1/n) * sum_{t} (x_t - mean)(x_{t+lag} - mean)`.
pub fn autocovariance(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len();
    if lag >= n {
        return 0.0;
    }
    let m = mean(xs);
    xs[..n - lag]
        .iter()
        .zip(&xs[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / n as f64
}

pub fn autocovariances(xs: &[f64], lag_max: usize) -> Vec<f64> {
    let n = xs.len();
    let m = mean(xs);
    let centered: Vec<f64> = xs.iter().map(|x| x - m).collect();
    (0..=lag_max)
        .map(|lag| {
            if lag >= n {
                return 0.0;
            }
            centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0 }
    }

    /// Push the estimate through a nondecreasing map, taking the half-width
    /// of the image of `[value - se, value + se]` as the new standard error.
    /// `lower_clamp` bounds the domain of `g` from below.
    pub fn map_monotone(self, lower_clamp: f64, g: impl Fn(f64) -> f64) -> Self {
        let v = g(self.value.max(lower_clamp));
        let hi = g((self.value + self.se).max(lower_clamp));
        let lo = g((self.value - self.se).max(lower_clamp));
        Estimate {
            value: v,
            se: 0.5 * (hi - lo).abs(),
        }
    }

    pub fn abs(self) -> Self {
        Estimate {
            value: self.value.abs(),
            se: self.se,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate {
            value: c * self.value,
            se: c.abs() * self.se,
        }
    }
}

/// Sample mean and its standard error.
pub fn mean_with_se(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    if xs.len() < 2 {
        return Estimate { value: m, se: 0.0 };
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: m,
        se: (var / n).sqrt(),
    }
}

/// Sample covariance of paired draws; the standard error comes from the
/// spread of the centered products.
pub fn covariance_with_se(xs: &[f64], ys: &[f64]) -> Estimate {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = mean(xs);
    let my = mean(ys);
    let products: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    let c = products.iter().sum::<f64>() / (n - 1.0);
    let mp = mean(&products);
    let var = products.iter().map(|d| (d - mp) * (d - mp)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: c,
        se: (var / n).sqrt(),
    }
}

/// Frequency estimate of a probability from `hits` out of `n`.
pub fn proportion(hits: usize, n: usize) -> Estimate {
    let p = hits as f64 / n as f64;
    Estimate {
        value: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// The `q`-quantile of already sorted values (order statistic at rank
/// `ceil(q n)`), with a distribution-free standard error from the spread of
/// the order statistics one binomial standard deviation either side.
pub fn order_quantile_with_se(sorted: &[f64], q: f64) -> Estimate {
    let n = sorted.len();
    let rank = |r: f64| -> f64 {
        let idx = (r.ceil() as isize - 1).clamp(0, n as isize - 1) as usize;
        sorted[idx]
    };
    let centre = q * n as f64;
    let spread = (n as f64 * q * (1.0 - q)).sqrt();
    Estimate {
        value: rank(centre),
        se: 0.5 * (rank(centre + spread) - rank(centre - spread)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

/// Weighted least squares `y = a + b x`. The slope standard error is
/// inflated by the reduced chi-square when the points scatter more than
/// their weights allow.
pub fn weighted_linear_fit(xs: &[f64], ys: &[f64], ws: &[f64]) -> Result<LinearFit> {
    let k = xs.len();
    if k < 2 || ys.len() != k || ws.len() != k {
        return Err(Error::domain("linear fit needs at least two points"));
    }
    if ws.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::domain(
            "linear fit weights must be positive and finite",
        ));
    }
    let sw: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let ybar = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs
        .iter()
        .zip(ws)
        .map(|(x, w)| w * (x - xbar) * (x - xbar))
        .sum();
    if sxx <= 0.0 {
        return Err(Error::domain("linear fit needs distinct abscissae"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut var = 1.0 / sxx;
    if k > 2 {
        let chi2: f64 = xs
            .iter()
            .zip(ys)
            .zip(ws)
            .map(|((x, y), w)| {
                let r = y - intercept - slope * x;
                w * r * r
            })
            .sum();
        var *= (chi2 / (k - 2) as f64).max(1.0);
    }
    Ok(LinearFit {
        slope,
        slope_se: var.sqrt(),
        intercept,
    })
}
