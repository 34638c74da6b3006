use serde::{Deserialize, Serialize};

pub const MIN_NORMALITY_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Normal,
    Rejected,
    Indeterminate,
}

/// D'Agostino-Pearson K² omnibus test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityCheck {
    pub n: usize,
    pub z_skew: Option<f64>,
    pub z_kurtosis: Option<f64>,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub verdict: Verdict,
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Skewness z-score from the sample skewness `b1 = m3 / m2^1.5`.
pub fn skew_z(b1: f64, n: usize) -> f64 {
    let n = n as f64;
    let y = b1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 =
        3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    delta * (y / alpha).asinh()
}

/// Kurtosis z-score (Anscombe-Glynn) from `b2 = m4 / m2^2`.
pub fn kurtosis_z(b2: f64, n: usize) -> f64 {
    let n = n as f64;
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let varb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / varb2.sqrt();
    let sqrtbeta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + (1.0 + 4.0 / (sqrtbeta1 * sqrtbeta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    (term1 - term2) / (2.0 / (9.0 * a)).sqrt()
}

/// Tests `sample` for normality at level `alpha`; fewer than 20 values or a
/// constant sample is indeterminate.
pub fn normality_check(sample: &[f64], alpha: f64) -> NormalityCheck {
    let n = sample.len();
    let indeterminate =
        NormalityCheck { n, z_skew: None, z_kurtosis: None, statistic: None, p: None, verdict: Verdict::Indeterminate };
    if n < MIN_NORMALITY_N || sample.iter().any(|x| !x.is_finite()) {
        return indeterminate;
    }
    let (m2, m3, m4) = moments(sample);
    if m2 <= 0.0 {
        return indeterminate;
    }
    let zs = skew_z(m3 / m2.powf(1.5), n);
    let zk = kurtosis_z(m4 / (m2 * m2), n);
    let k2 = zs * zs + zk * zk;
    // chi-square(2) survival function
    let p = (-0.5 * k2).exp();
    let verdict = if p < alpha { Verdict::Rejected } else { Verdict::Normal };
    NormalityCheck { n, z_skew: Some(zs), z_kurtosis: Some(zk), statistic: Some(k2), p: Some(p), verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp, StandardNormal};

    #[test]
    fn matches_reference_implementation() {
        let xs: Vec<f64> = (0..40).map(|i| 0.1 * (i as f64).powf(1.5) - 3.0 + ((i * 7) % 11) as f64 / 5.0).collect();
        let r = normality_check(&xs, 0.05);
        assert!((r.z_skew.unwrap() - 1.0954998830535678).abs() < 1e-10);
        assert!((r.z_kurtosis.unwrap() + 2.2792995618698217).abs() < 1e-10);
        assert!((r.statistic.unwrap() - 6.395326486510342).abs() < 1e-9);
        assert!((r.p.unwrap() - 0.040857566709806246).abs() < 1e-10);
        assert_eq!(r.verdict, Verdict::Rejected);
    }

    #[test]
    fn small_or_constant_is_indeterminate() {
        assert_eq!(normality_check(&[1.0; 10], 0.05).verdict, Verdict::Indeterminate);
        let ten: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(normality_check(&ten, 0.05).verdict, Verdict::Indeterminate);
        assert_eq!(normality_check(&[2.5; 50], 0.05).verdict, Verdict::Indeterminate);
    }

    /// At n = 500 the test should hold its nominal level. A bare "95 of 100"
    /// count is a coin flip for a correctly sized test, so the 100-seed count
    /// gets a binomial 3-sigma floor and the size is checked over 2000 seeds.
    #[test]
    fn gaussian_kept_exponential_rejected() {
        let mut rejected = 0;
        let mut kept_first_100 = 0;
        for seed in 0..2000u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
            let normal = normality_check(&xs, 0.05).verdict == Verdict::Normal;
            if !normal {
                rejected += 1;
            } else if seed < 100 {
                kept_first_100 += 1;
            }
            if seed < 100 {
                let exp = Exp::new(1.0).unwrap();
                let ys: Vec<f64> = (0..200).map(|_| exp.sample(&mut rng)).collect();
                assert_eq!(normality_check(&ys, 0.05).verdict, Verdict::Rejected, "seed {seed}");
            }
        }
        let size = rejected as f64 / 2000.0;
        assert!((0.035..=0.065).contains(&size), "empirical size {size}");
        assert!(kept_first_100 >= 89, "kept {kept_first_100}/100");
    }
}
