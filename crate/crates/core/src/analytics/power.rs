use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{nct_cdf, AnalyticsError};

pub const MAX_N: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tails {
    One,
    Two,
}

impl std::str::FromStr for Tails {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "one" | "1" => Ok(Tails::One),
            "two" | "2" => Ok(Tails::Two),
            other => Err(format!("unknown tails {other:?}, expected one or two")),
        }
    }
}

/// Inputs to an a-priori two-sample t-test power analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub d: f64,
    pub alpha: f64,
    pub power: f64,
    pub tails: Tails,
    /// n2 / n1.
    pub allocation_ratio: f64,
}

impl PowerParams {
    pub fn new(d: f64, alpha: f64, power: f64, tails: Tails) -> Self {
        Self { d, alpha, power, tails, allocation_ratio: 1.0 }
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        let bad = |m: &str| Err(AnalyticsError::Domain(m.to_string()));
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad("effect size d must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.power > 0.0 && self.power < 1.0) {
            return bad("power must lie in (0, 1)");
        }
        if !(self.allocation_ratio > 0.0 && self.allocation_ratio.is_finite()) {
            return bad("allocation ratio must be positive");
        }
        Ok(())
    }

    fn n2(&self, n1: u64) -> u64 {
        ((n1 as f64 * self.allocation_ratio).ceil() as u64).max(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub n1: u64,
    pub n2: u64,
    pub achieved_power: f64,
}

/// Exact power of the pooled two-sample t-test with `n1` and `n2` subjects.
pub fn t_test_power(d: f64, alpha: f64, tails: Tails, n1: u64, n2: u64) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let df = a + b - 2.0;
    let delta = d * (a * b / (a + b)).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    match tails {
        Tails::One => {
            let crit = t.inverse_cdf(1.0 - alpha);
            1.0 - nct_cdf(crit, df, delta)
        }
        Tails::Two => {
            let crit = t.inverse_cdf(1.0 - alpha / 2.0);
            1.0 - nct_cdf(crit, df, delta) + nct_cdf(-crit, df, delta)
        }
    }
}

/// Smallest per-group n whose power reaches the requested level.
pub fn sample_size(p: &PowerParams) -> Result<SampleSize, AnalyticsError> {
    p.validate()?;
    let power_at = |n: u64| t_test_power(p.d, p.alpha, p.tails, n, p.n2(n));
    let reaches = |n: u64| power_at(n) >= p.power;

    let mut lo = 1u64; // known to fail (or be the floor)
    let mut hi = 2u64;
    while !reaches(hi) {
        lo = hi;
        if hi >= MAX_N {
            return Err(AnalyticsError::Overflow(format!("power {} unreachable with n <= {MAX_N} per group", p.power)));
        }
        hi = (hi * 2).min(MAX_N);
    }
    // invariant: reaches(hi), !reaches(lo) unless lo == 1
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SampleSize { n1: hi, n2: p.n2(hi), achieved_power: power_at(hi) })
}

/// `ceil(2 (z_{1-a} + z_{1-b})^2 / d^2)` with the one- or two-sided z.
pub fn normal_approx_sample_size(p: &PowerParams) -> Result<u64, AnalyticsError> {
    p.validate()?;
    let n = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
    let za = match p.tails {
        Tails::One => n.inverse_cdf(1.0 - p.alpha),
        Tails::Two => n.inverse_cdf(1.0 - p.alpha / 2.0),
    };
    let zb = n.inverse_cdf(p.power);
    let k = p.allocation_ratio;
    Ok(((1.0 + 1.0 / k) * (za + zb).powi(2) / (p.d * p.d)).ceil() as u64)
}
