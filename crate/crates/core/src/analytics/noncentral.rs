//! Noncentral Student t distribution function.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

const ERRMAX: f64 = 1e-13;
const ITRMAX: usize = 5000;

fn norm_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// `P(T <= t)` for `T` noncentral t with `df` degrees of freedom and
/// noncentrality `delta`.
///
/// Poisson-weighted incomplete-beta series (Lenth's algorithm). Far in the
/// tail where the Poisson weights underflow, falls back to the normal
/// approximation of Abramowitz and Stegun 26.7.10.
pub fn nct_cdf(t: f64, df: f64, delta: f64) -> f64 {
    assert!(df > 0.0, "df must be positive");
    if t.is_nan() || delta.is_nan() {
        return f64::NAN;
    }
    if t == f64::INFINITY {
        return 1.0;
    }
    if t == f64::NEG_INFINITY {
        return 0.0;
    }
    let (tt, del, neg) = if t < 0.0 { (-t, -delta, true) } else { (t, delta, false) };
    let lambda = del * del;
    if lambda > 1400.0 {
        let z = (tt * (1.0 - 1.0 / (4.0 * df)) - del) / (1.0 + tt * tt / (2.0 * df)).sqrt();
        let p = norm_cdf(z);
        return if neg { 1.0 - p } else { p };
    }
    let x = tt * tt / (tt * tt + df);
    let mut tnc = 0.0;
    if x > 0.0 {
        let mut p = 0.5 * (-0.5 * lambda).exp();
        let mut q = (2.0 / std::f64::consts::PI).sqrt() * p * del;
        let mut s = 0.5 - p;
        let mut a = 0.5;
        let b = 0.5 * df;
        let rxb = (1.0 - x).powf(b);
        let albeta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
        let mut xodd = beta_reg(a, b, x);
        let mut godd = 2.0 * rxb * (a * x.ln() - albeta).exp();
        let mut xeven = 1.0 - rxb;
        let mut geven = b * x * rxb;
        tnc = p * xodd + q * xeven;
        let mut en = 1.0;
        for _ in 0..ITRMAX {
            a += 1.0;
            xodd -= godd;
            xeven -= geven;
            godd *= x * (a + b - 1.0) / a;
            geven *= x * (a + b - 0.5) / (a + 0.5);
            p *= lambda / (2.0 * en);
            q *= lambda / (2.0 * en + 1.0);
            s -= p;
            en += 1.0;
            tnc += p * xodd + q * xeven;
            let errbd = 2.0 * s * (xodd - godd);
            if errbd.abs() <= ERRMAX && en > lambda / 2.0 {
                break;
            }
        }
    }
    tnc += norm_cdf(-del);
    let tnc = tnc.clamp(0.0, 1.0);
    if neg {
        1.0 - tnc
    } else {
        tnc
    }
}
