use serde::{Deserialize, Serialize};

/// Terminal-digit test outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DigitPreference {
    /// Too few values for a verdict.
    Indeterminate {
        n: usize,
    },
    Tested {
        n: usize,
        counts: [usize; 10],
        chi2: f64,
        flagged: bool,
    },
}

impl DigitPreference {
    pub fn is_flagged(&self) -> bool {
        matches!(self, DigitPreference::Tested { flagged: true, .. })
    }
}

/// The digit at `decimals` places after the point, e.g. the tenths digit of
/// a weight recorded to 0.1 kg when `decimals = 1`.
pub fn terminal_digit(value: f64, decimals: u32) -> u8 {
    let scaled = (value.abs() * 10f64.powi(decimals as i32)).round();
    (scaled % 10.0) as u8
}

/// Chi-square goodness of fit of terminal digits against uniform (df = 9).
pub fn digit_preference(values: &[f64], decimals: u32, min_values: usize, critical: f64) -> DigitPreference {
    let n = values.len();
    if n < min_values || n == 0 {
        return DigitPreference::Indeterminate { n };
    }
    let mut counts = [0usize; 10];
    for &v in values {
        counts[terminal_digit(v, decimals) as usize] += 1;
    }
    let expected = n as f64 / 10.0;
    let chi2 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
    DigitPreference::Tested { n, counts, chi2, flagged: chi2 > critical }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_digits() {
        let values: Vec<f64> = (0..20).map(|i| 10.0 + (i % 10) as f64 / 10.0).collect();
        match digit_preference(&values, 1, 20, 16.92) {
            DigitPreference::Tested { chi2, flagged, counts, .. } => {
                assert_eq!(chi2, 0.0);
                assert!(!flagged);
                assert_eq!(counts, [2; 10]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_zero_terminal_digits() {
        let values: Vec<f64> = (0..20).map(|i| 8.0 + i as f64).collect();
        let r = digit_preference(&values, 1, 20, 16.92);
        // (20-2)^2/2 + 9 * (0-2)^2/2
        let want = 18.0f64.powi(2) / 2.0 + 9.0 * 2.0f64.powi(2) / 2.0;
        assert_eq!(want, 180.0);
        match r {
            DigitPreference::Tested { chi2, flagged, .. } => {
                assert!((chi2 - want).abs() < 1e-9);
                assert!(flagged);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn below_minimum_is_indeterminate() {
        let values = vec![1.0; 19];
        assert_eq!(digit_preference(&values, 1, 20, 16.92), DigitPreference::Indeterminate { n: 19 });
    }

    #[test]
    fn digit_extraction_survives_binary_rounding() {
        assert_eq!(terminal_digit(12.3, 1), 3);
        assert_eq!(terminal_digit(0.7, 1), 7);
        assert_eq!(terminal_digit(87.0, 0), 7);
        assert_eq!(terminal_digit(9.99, 2), 9);
    }
}
