//! Empirical distribution, sample quantile, uniform empirical process and
//! the three error functionals around the Bahadur linearization.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::Marginal;

/// Densities at or below this are treated as zero.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SortedSample {
    sorted: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample must hold at least one value"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("sample contains NaN"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(SortedSample { sorted: values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// Wrap values that are already in nondecreasing order.
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.is_empty() {
            return Err(Error::domain("sample must hold at least one value"));
        }
        if sorted.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("values are not sorted"));
        }
        Ok(SortedSample { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    /// `F_n(x) = #{X_i <= x} / n`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// `F_n(x-) = #{X_i < x} / n`.
    pub fn ecdf_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.len() as f64
    }

    /// `inf { x : F_n(x) >= p }`, the order statistic `X_(k)` with the
    /// smallest `k` satisfying `k / n >= p`.
    pub fn sample_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "sample quantile needs p in (0, 1), got {p}"
            )));
        }
        let n = self.len();
        let nf = n as f64;
        // ceil(n p) can be off by one in floating point; settle k against the
        // same comparison `ecdf` uses.
        let mut k = ((nf * p).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= p {
            k -= 1;
        }
        while k < n && (k as f64 / nf) < p {
            k += 1;
        }
        Ok(self.sorted[k - 1])
    }

    /// Probability integral transform `U_i = F(X_i)` (order is preserved
    /// because `F` is nondecreasing).
    pub fn to_uniform(&self, m: &Marginal) -> SortedSample {
        SortedSample {
            sorted: self.sorted.iter().map(|&x| m.cdf(x)).collect(),
        }
    }
}

/// `E_n(t) = #{U_i <= t} / n` for a sample of values in `[0, 1]`.
pub fn uniform_empirical(s_u: &SortedSample, t: f64) -> f64 {
    s_u.ecdf(t)
}

/// `sup_{|t - p| <= h, t in [0,1]} |(E_n(t) - t) - (E_n(p) - p)|` evaluated
/// exactly. Between jumps the centered process decreases with unit slope, so
/// the supremum is attained at a window endpoint, at a jump, or approached
/// just before a jump.
pub fn oscillation(s_u: &SortedSample, p: f64, half_width: f64) -> f64 {
    if !(half_width > 0.0) {
        return 0.0;
    }
    let u = s_u.as_slice();
    let nf = u.len() as f64;
    let lo = (p - half_width).max(0.0);
    let hi = (p + half_width).min(1.0);
    let y_p = s_u.ecdf(p) - p;
    let centered = |count: usize, t: f64| (count as f64 / nf - t - y_p).abs();

    let first = u.partition_point(|&v| v <= lo);
    let last = u.partition_point(|&v| v <= hi);
    let mut sup = centered(first, lo).max(centered(last, hi));
    let mut i = first;
    while i < last {
        let t = u[i];
        let mut j = i + 1;
        while j < last && u[j] == t {
            j += 1;
        }
        // left limit uses the i points strictly below t, the jump value all j points <= t
        sup = sup.max(centered(i, t)).max(centered(j, t));
        i = j;
    }
    sup
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BahadurDiagnostics {
    pub n: usize,
    pub p: f64,
    pub xi_p: f64,
    pub xi_np: f64,
    pub fn_at_xi: f64,
    pub remainder: f64,
    pub oscillation: f64,
    pub quantile_deviation: f64,
}

pub const DIAGNOSTICS_CSV_HEADER: &str =
    "n,p,xi_p,xi_np,fn_at_xi,remainder,oscillation,quantile_deviation";

impl BahadurDiagnostics {
    pub fn density_at_xi(&self, m: &Marginal) -> f64 {
        m.pdf(self.xi_p)
    }

    /// The linear term `(p - F_n(xi_p)) / f(xi_p)`.
    pub fn linear_term(&self, m: &Marginal) -> f64 {
        (self.p - self.fn_at_xi) / self.density_at_xi(m)
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.p,
            self.xi_p,
            self.xi_np,
            self.fn_at_xi,
            self.remainder,
            self.oscillation,
            self.quantile_deviation
        );
        s
    }

    /// `|xi_np - xi_p| f <= |p - F_n(xi_p)| + |R| f`, up to a few ulps of
    /// rounding in the operands.
    pub fn decomposition_holds(&self, m: &Marginal) -> bool {
        let f = self.density_at_xi(m);
        let lhs = self.quantile_deviation * f;
        let rhs = (self.p - self.fn_at_xi).abs() + self.remainder.abs() * f;
        lhs <= rhs + 1e-12 * (lhs.abs() + rhs.abs()) + f64::MIN_POSITIVE
    }
}

/// Sample quantile, true quantile, `F_n(xi_p)` and the remainder
/// `xi_np - xi_p - (p - F_n(xi_p)) / f(xi_p)`. The oscillation field is left at 0;
/// use [`full_diagnostics`] to fill it.
pub fn bahadur_remainder(s: &SortedSample, m: &Marginal, p: f64) -> Result<BahadurDiagnostics> {
    let xi_p = m.quantile(p)?;
    let density = m.pdf(xi_p);
    if !(density > DENSITY_FLOOR) {
        return Err(Error::DegenerateDensity { density });
    }
    let xi_np = s.sample_quantile(p)?;
    let fn_at_xi = s.ecdf(xi_p);
    let deviation = xi_np - xi_p;
    Ok(BahadurDiagnostics {
        n: s.len(),
        p,
        xi_p,
        xi_np,
        fn_at_xi,
        remainder: deviation - (p - fn_at_xi) / density,
        oscillation: 0.0,
        quantile_deviation: deviation.abs(),
    })
}

/// [`bahadur_remainder`] plus the oscillation of the uniform empirical
/// process `U_i = F(X_i)` over `|t - p| <= half_width`.
pub fn full_diagnostics(
    s: &SortedSample,
    m: &Marginal,
    p: f64,
    half_width: f64,
) -> Result<BahadurDiagnostics> {
    let mut d = bahadur_remainder(s, m, p)?;
    d.oscillation = oscillation(&s.to_uniform(m), p, half_width);
    Ok(d)
}
