use super::{AnthroError, GrowthReferenceRow};

/// Unrestricted LMS z-score: `((x/M)^L - 1) / (L*S)`, or `ln(x/M)/S` when L = 0.
pub fn raw_zscore(x: f64, row: &GrowthReferenceRow) -> Result<f64, AnthroError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(AnthroError::Domain(format!("measurement must be positive, got {x}")));
    }
    row.check()?;
    let ratio = x / row.m;
    if row.l == 0.0 {
        Ok(ratio.ln() / row.s)
    } else {
        Ok((ratio.powf(row.l) - 1.0) / (row.l * row.s))
    }
}

/// Measurement value at a given z: `M*(1 + L*S*z)^(1/L)`, or `M*exp(S*z)` when L = 0.
pub fn inverse_raw_zscore(z: f64, row: &GrowthReferenceRow) -> Result<f64, AnthroError> {
    row.check()?;
    if !z.is_finite() {
        return Err(AnthroError::Domain("z must be finite".into()));
    }
    if row.l == 0.0 {
        return Ok(row.m * (row.s * z).exp());
    }
    let base = 1.0 + row.l * row.s * z;
    if base <= 0.0 {
        return Err(AnthroError::Domain(format!("z = {z} is outside the LMS branch (1 + L*S*z = {base})")));
    }
    Ok(row.m * base.powf(1.0 / row.l))
}

/// Z-score for the row's indicator. Weight-based indicators switch to the
/// restricted form beyond |z| > 3, which is linear in the measurement with
/// the SD2..SD3 spacing as its unit.
pub fn lms_zscore(x: f64, row: &GrowthReferenceRow) -> Result<f64, AnthroError> {
    let z = raw_zscore(x, row)?;
    if !row.indicator.is_restricted() || z.abs() <= 3.0 {
        return Ok(z);
    }
    if z > 3.0 {
        let sd2 = inverse_raw_zscore(2.0, row)?;
        let sd3 = inverse_raw_zscore(3.0, row)?;
        Ok(3.0 + (x - sd3) / (sd3 - sd2))
    } else {
        let sd2 = inverse_raw_zscore(-2.0, row)?;
        let sd3 = inverse_raw_zscore(-3.0, row)?;
        Ok(-3.0 + (x - sd3) / (sd2 - sd3))
    }
}

/// Inverse of [`lms_zscore`], including the restricted tails.
pub fn inverse_zscore(z: f64, row: &GrowthReferenceRow) -> Result<f64, AnthroError> {
    if !row.indicator.is_restricted() || z.abs() <= 3.0 {
        return inverse_raw_zscore(z, row);
    }
    if z > 3.0 {
        let sd2 = inverse_raw_zscore(2.0, row)?;
        let sd3 = inverse_raw_zscore(3.0, row)?;
        Ok(sd3 + (z - 3.0) * (sd3 - sd2))
    } else {
        let sd2 = inverse_raw_zscore(-2.0, row)?;
        let sd3 = inverse_raw_zscore(-3.0, row)?;
        let x = sd3 + (z + 3.0) * (sd2 - sd3);
        if x <= 0.0 {
            return Err(AnthroError::Domain(format!("z = {z} maps to a non-positive value")));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anthro::{GrowthReference, Indicator, Sex};

    fn row(indicator: Indicator, l: f64, m: f64, s: f64) -> GrowthReferenceRow {
        GrowthReferenceRow::new(indicator, Sex::M, 0.0, l, m, s)
    }

    #[test]
    fn median_is_zero() {
        for l in [-1.3, -0.2, 0.0, 0.5, 1.0] {
            let r = row(Indicator::Hfa, l, 10.0, 0.1);
            assert_eq!(lms_zscore(10.0, &r).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_and_log_cases() {
        let r = row(Indicator::Hfa, 1.0, 10.0, 0.1);
        assert!((lms_zscore(11.0, &r).unwrap() - 1.0).abs() < 1e-12);
        let r = row(Indicator::Hfa, 0.0, 10.0, 0.1);
        assert!((lms_zscore(10.0 * 0.2f64.exp(), &r).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let r = row(Indicator::Hfa, 1.0, 10.0, 0.1);
        assert_eq!(inverse_raw_zscore(0.0, &r).unwrap(), 10.0);
        assert!((inverse_raw_zscore(2.0, &r).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_measurement_is_domain_error() {
        let r = row(Indicator::Wfa, 0.2, 10.0, 0.1);
        assert!(matches!(lms_zscore(0.0, &r), Err(AnthroError::Domain(_))));
        assert!(matches!(lms_zscore(-1.0, &r), Err(AnthroError::Domain(_))));
    }

    #[test]
    fn branch_violation_is_domain_error() {
        // 1 + L*S*z = 1 + 1*0.1*(-20) < 0
        let r = row(Indicator::Hfa, 1.0, 10.0, 0.1);
        assert!(matches!(inverse_raw_zscore(-20.0, &r), Err(AnthroError::Domain(_))));
    }

    /// Oracle for the restricted tail: SD2 and SD3 recovered by bisection on
    /// the forward transform, never through the closed-form inverse.
    fn bisect_sd(row: &GrowthReferenceRow, target: f64) -> f64 {
        let (mut lo, mut hi) = (row.m * 1e-3, row.m * 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if raw_zscore(mid, row).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn restricted_tail_matches_bisection_oracle() {
        let reference = GrowthReference::bundled();
        let wfh = reference.lookup(Indicator::Wfh, Sex::M, 800.0).unwrap();
        let sd2 = bisect_sd(&wfh, 2.0);
        let sd3 = bisect_sd(&wfh, 3.0);
        let sd2n = bisect_sd(&wfh, -2.0);
        let sd3n = bisect_sd(&wfh, -3.0);
        // well above SD3 and well below SD3neg
        let heavy = sd3 * 1.12;
        let light = sd3n * 0.9;
        assert!(raw_zscore(heavy, &wfh).unwrap() > 3.0);
        let expected_hi = 3.0 + (heavy - sd3) / (sd3 - sd2);
        let expected_lo = -3.0 + (light - sd3n) / (sd2n - sd3n);
        assert!((lms_zscore(heavy, &wfh).unwrap() - expected_hi).abs() < 1e-9);
        assert!((lms_zscore(light, &wfh).unwrap() - expected_lo).abs() < 1e-9);
        // HFA is never restricted
        let hfa = reference.lookup(Indicator::Hfa, Sex::M, 800.0).unwrap();
        let tall = inverse_raw_zscore(4.0, &hfa).unwrap();
        assert!((lms_zscore(tall, &hfa).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn wfh_round_trip_at_minus_2_75() {
        let reference = GrowthReference::bundled();
        let wfh = reference.lookup(Indicator::Wfh, Sex::F, 735.0).unwrap();
        let x = inverse_zscore(-2.75, &wfh).unwrap();
        assert!((lms_zscore(x, &wfh).unwrap() + 2.75).abs() < 1e-9);
    }

    #[test]
    fn restricted_inverse_round_trips_in_tails() {
        let reference = GrowthReference::bundled();
        let wfa = reference.lookup(Indicator::Wfa, Sex::F, 400.0).unwrap();
        for z in [-4.5, -3.2, 3.1, 4.8] {
            let x = inverse_zscore(z, &wfa).unwrap();
            assert!((lms_zscore(x, &wfa).unwrap() - z).abs() < 1e-9);
        }
    }
}
