use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    Welch,
    Paired,
}

/// Outcome of a t-test. `Degenerate` is returned when the standard error is
/// zero, so no t statistic exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TTest {
    Computed { kind: TTestKind, mean_diff: f64, t: f64, df: f64, p: f64 },
    Degenerate { kind: TTestKind, mean_diff: f64, df: f64 },
}

impl TTest {
    pub fn t(&self) -> Option<f64> {
        match self {
            TTest::Computed { t, .. } => Some(*t),
            TTest::Degenerate { .. } => None,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            TTest::Computed { p, .. } => Some(*p),
            TTest::Degenerate { .. } => None,
        }
    }

    pub fn df(&self) -> f64 {
        match self {
            TTest::Computed { df, .. } | TTest::Degenerate { df, .. } => *df,
        }
    }

    pub fn mean_diff(&self) -> f64 {
        match self {
            TTest::Computed { mean_diff, .. } | TTest::Degenerate { mean_diff, .. } => *mean_diff,
        }
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.p().is_some_and(|p| p < alpha)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n - 1 denominator.
pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Two-sided p-value of `t` on `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

fn finish(kind: TTestKind, diff: f64, se: f64, df: f64) -> TTest {
    if se == 0.0 || !se.is_finite() || !(df > 0.0) {
        return TTest::Degenerate { kind, mean_diff: diff, df };
    }
    let t = diff / se;
    TTest::Computed { kind, mean_diff: diff, t, df, p: two_sided_p(t, df) }
}

/// Welch's unequal-variance t-test of `mean(a) - mean(b)`.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TTest, AnalyticsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalyticsError::Domain(format!("welch t needs n >= 2 per group, got {} and {}", a.len(), b.len())));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se = (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(finish(TTestKind::Welch, mean(a) - mean(b), se, df))
}

/// Paired t-test of `mean(after - before)`.
pub fn paired_t(before: &[f64], after: &[f64]) -> Result<TTest, AnalyticsError> {
    if before.len() != after.len() {
        return Err(AnalyticsError::Domain(format!(
            "paired samples differ in length: {} vs {}",
            before.len(),
            after.len()
        )));
    }
    if before.len() < 2 {
        return Err(AnalyticsError::Domain("paired t needs at least 2 pairs".into()));
    }
    let diffs: Vec<f64> = after.iter().zip(before).map(|(a, b)| a - b).collect();
    let n = diffs.len() as f64;
    let se = (variance(&diffs) / n).sqrt();
    Ok(finish(TTestKind::Paired, mean(&diffs), se, n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups() {
        let a = [3.0, 5.0, 4.0, 8.0, 1.5];
        let r = welch_t(&a, &a).unwrap();
        assert_eq!(r.t(), Some(0.0));
        assert_eq!(r.p(), Some(1.0));
    }

    #[test]
    fn welch_by_hand() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        // var a = 5/3, var b = 10; se^2 = 5/12 + 2
        let se2: f64 = 5.0 / 12.0 + 2.0;
        let want_t = (2.5 - 6.0) / se2.sqrt();
        let want_df = se2 * se2 / ((5.0f64 / 12.0).powi(2) / 3.0 + 4.0 / 4.0);
        let r = welch_t(&a, &b).unwrap();
        assert!((r.t().unwrap() - want_t).abs() < 1e-12);
        assert!((r.df() - want_df).abs() < 1e-12);
        let p = r.p().unwrap();
        assert!(p > 0.02 && p < 0.1, "p = {p}");
    }

    #[test]
    fn paired_constant_shift_is_degenerate() {
        let before = [10.0, 12.0, 9.0, 15.0];
        let after: Vec<f64> = before.iter().map(|x| x + 2.0).collect();
        let r = paired_t(&before, &after).unwrap();
        assert_eq!(r, TTest::Degenerate { kind: TTestKind::Paired, mean_diff: 2.0, df: 3.0 });
        assert!(!r.significant(0.05));
    }

    #[test]
    fn domain_errors() {
        assert!(welch_t(&[1.0], &[1.0, 2.0]).is_err());
        assert!(paired_t(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(paired_t(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn paired_matches_one_sample_on_differences() {
        let before = [5.1, 6.3, 4.8, 7.0, 5.5, 6.1];
        let after = [6.0, 6.9, 5.9, 7.2, 6.8, 6.0];
        let d: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
        let t = mean(&d) / (variance(&d) / 6.0).sqrt();
        let r = paired_t(&before, &after).unwrap();
        assert!((r.t().unwrap() - t).abs() < 1e-12);
        assert_eq!(r.df(), 5.0);
    }

    proptest::proptest! {
        #[test]
        fn p_decreases_in_abs_t(df in 1.0f64..200.0, t in 0.0f64..10.0, dt in 0.001f64..3.0) {
            proptest::prop_assert!(two_sided_p(t + dt, df) <= two_sided_p(t, df));
            proptest::prop_assert!((two_sided_p(t, df) - two_sided_p(-t, df)).abs() < 1e-15);
        }

        #[test]
        fn welch_self_is_zero(xs in proptest::collection::vec(-100.0f64..100.0, 2..40)) {
            let r = welch_t(&xs, &xs).unwrap();
            if let Some(t) = r.t() {
                proptest::prop_assert_eq!(t, 0.0);
            }
        }
    }
}
