use super::AnalyticsError;

/// Standardized mean difference using the pooled standard deviation.
pub fn cohens_d(mean1: f64, sd1: f64, n1: usize, mean2: f64, sd2: f64, n2: usize) -> Result<f64, AnalyticsError> {
    if n1 < 2 || n2 < 2 {
        return Err(AnalyticsError::Domain(format!("cohen's d needs n > 1 per group, got {n1} and {n2}")));
    }
    if !(sd1 >= 0.0 && sd2 >= 0.0) {
        return Err(AnalyticsError::Domain("standard deviations must be non-negative".into()));
    }
    if sd1 == 0.0 && sd2 == 0.0 {
        return Err(AnalyticsError::Degenerate("both standard deviations are zero".into()));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let pooled = (((a - 1.0) * sd1 * sd1 + (b - 1.0) * sd2 * sd2) / (a + b - 2.0)).sqrt();
    Ok((mean1 - mean2) / pooled)
}
