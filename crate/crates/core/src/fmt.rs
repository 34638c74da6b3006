//! Fixed-precision number formatting for diff-stable text output.

/// Formats `x` with six significant digits, like C's `%.6g` but never
/// switching to exponent notation inside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    sig(x, 6)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    let s = if !(-4..6).contains(&exp) {
        let s = format!("{:.*e}", digits - 1, x);
        // strip trailing zeros from the mantissa
        match s.split_once('e') {
            Some((mant, e)) => format!("{}e{}", trim_zeros(mant), e),
            None => s,
        }
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// z-scores are reported with three decimals.
pub fn zfmt(z: f64) -> String {
    let s = format!("{z:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(88.0), "88");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(-123.456789), "-123.457");
        assert_eq!(sig6(2.0 / (std::f64::consts::PI * 1e4)), "6.3662e-5");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(0.00012345678), "0.000123457");
    }

    #[test]
    fn z_format() {
        assert_eq!(zfmt(0.0), "0.000");
        assert_eq!(zfmt(-0.0001), "0.000");
        assert_eq!(zfmt(-2.3456), "-2.346");
    }
}
