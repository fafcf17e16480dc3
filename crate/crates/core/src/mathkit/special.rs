//! Error function family, complete elliptic integrals and the sinc kernel.
//!
//! `erf`/`erfc` delegate to the musl-derived implementations in `libm`;
//! `erfcx` extends them past the underflow point of `erfc` with the Laplace
//! continued fraction so callers can recombine `C · erfc(x)` products in the
//! log domain.

use std::f64::consts::FRAC_PI_2;

use super::MathError;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

fn finite(function: &'static str, x: f64) -> Result<f64, MathError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(MathError::Domain { function, value: x })
    }
}

/// Gauss error function.
pub fn erf(x: f64) -> Result<f64, MathError> {
    finite("erf", x).map(libm::erf)
}

/// Complementary error function, accurate in the far right tail.
pub fn erfc(x: f64) -> Result<f64, MathError> {
    finite("erfc", x).map(libm::erfc)
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Returns `+∞` once `exp(x²)` overflows for very negative `x`; NaN propagates.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 5.0 {
        if x < -26.5 {
            return f64::INFINITY;
        }
        return (x * x).exp() * libm::erfc(x);
    }
    // Laplace continued fraction, evaluated bottom-up (24 terms reach full
    // precision for x ≥ 5, where exp(x²)·erfc(x) starts to lose digits):
    // erfcx(x) = 1/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))
    let mut tail = x;
    for n in (1..=24).rev() {
        tail = x + (n as f64 * 0.5) / tail;
    }
    FRAC_1_SQRT_PI / tail
}

/// `ln erfc(x)`, finite wherever `erfc(x) > 0` in exact arithmetic.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 1.0 {
        libm::erfc(x).ln()
    } else {
        erfcx(x).ln() - x * x
    }
}

/// Arithmetic-geometric mean iteration shared by `K` and `E`.
///
/// Returns `(agm, Σ 2^(n−1) c_n²)` for the parameter `m`.
fn agm_with_sum(m: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut weight = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let next_a = 0.5 * (a + b);
        let next_b = (a * b).sqrt();
        weight *= 2.0;
        sum += weight * c * c;
        a = next_a;
        b = next_b;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    (a, sum)
}

fn check_parameter(function: &'static str, m: f64) -> Result<f64, MathError> {
    if !(0.0..=1.0).contains(&m) || m.is_nan() {
        return Err(MathError::Domain { function, value: m });
    }
    Ok(m)
}

/// Complete elliptic integral of the first kind, parameter convention
/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)`.
pub fn ellip_k(m: f64) -> Result<f64, MathError> {
    let m = check_parameter("ellip_k", m)?;
    if m == 1.0 {
        return Err(MathError::Divergence { function: "ellip_k" });
    }
    let (agm, _) = agm_with_sum(m);
    Ok(FRAC_PI_2 / agm)
}

/// Complete elliptic integral of the second kind, parameter convention
/// `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`.
pub fn ellip_e(m: f64) -> Result<f64, MathError> {
    let m = check_parameter("ellip_e", m)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    let (agm, sum) = agm_with_sum(m);
    Ok(FRAC_PI_2 / agm * (1.0 - sum))
}

/// Unnormalised cardinal sine `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Magnitude cross-moment transform `((m − 1)/2)·K(m) + E(m)` for `m = r²`.
///
/// Equals `E[|h_i||h_j|]/σ²` for unit-variance circular Gaussians with
/// correlation coefficient `r`; ranges from π/4 at `r = 0` to 1 at `|r| = 1`.
pub fn magnitude_cross_moment(r: f64) -> Result<f64, MathError> {
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(MathError::Domain { function: "magnitude_cross_moment", value: r });
    }
    let m = r * r;
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(0.5 * (m - 1.0) * ellip_k(m)? + ellip_e(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4 as PI_4, PI};

    /// Maclaurin series of erf summed in f64 with enough terms for |x| ≤ 2.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            let contrib = term / (2 * n + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        2.0 * FRAC_1_SQRT_PI * sum
    }

    /// Periodic trapezoid rule on [0, π/2]; spectrally accurate for smooth m < 1.
    fn elliptic_trapezoid(m: f64, second_kind: bool) -> f64 {
        let n = 4000;
        let h = FRAC_PI_2 / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let t = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let q = (1.0 - m * t.sin().powi(2)).sqrt();
            s += w * if second_kind { q } else { 1.0 / q };
        }
        s * h
    }

    #[test]
    fn erf_trivial_values() {
        assert_eq!(erf(0.0).unwrap(), 0.0);
        assert_eq!(erfc(0.0).unwrap(), 1.0);
    }

    #[test]
    fn erf_matches_series_oracle() {
        let oracle = erf_series(1.0);
        assert!((oracle - 0.842_700_792_949_714_9).abs() < 1e-15);
        let got = erf(1.0).unwrap();
        assert!(((got - oracle) / oracle).abs() <= 1e-12, "{got} vs {oracle}");
        for &x in &[0.05, 0.3, 0.7, 1.3, 1.9] {
            let o = erf_series(x);
            assert!(((erf(x).unwrap() - o) / o).abs() <= 1e-12, "x={x}");
            assert!((erfc(x).unwrap() - (1.0 - o)).abs() <= 1e-12);
        }
    }

    #[test]
    fn erf_rejects_non_finite() {
        assert!(matches!(erf(f64::NAN), Err(MathError::Domain { .. })));
        assert!(matches!(erfc(f64::INFINITY), Err(MathError::Domain { .. })));
    }

    #[test]
    fn erfcx_is_continuous_across_branches() {
        let lo = erfcx(5.0 - 1e-12);
        let hi = erfcx(5.0);
        assert!(((lo - hi) / hi).abs() < 5e-13);
        // Reference values from an independent Faddeeva implementation.
        for &(x, want) in &[(10.0, 0.056_140_992_743_822_59), (25.9, 0.021_767_181_150_738_214)] {
            assert!(((erfcx(x) - want) / want).abs() < 1e-14, "x={x}");
        }
        // Asymptotic 1/(x√π)·(1 − 1/(2x²)) at large x.
        let x = 1e4;
        let approx = FRAC_1_SQRT_PI / x * (1.0 - 0.5 / (x * x));
        assert!(((erfcx(x) - approx) / approx).abs() < 1e-12);
        assert!((erfcx(0.0) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn ln_erfc_tracks_far_tail() {
        // erfc(40) ≈ 1.1e-697 underflows in f64 but its log does not.
        let v = ln_erfc(40.0);
        let expected = -1600.0 - (40.0 * PI.sqrt()).ln() + (1.0 - 1.0 / 3200.0f64).ln();
        assert!((v - expected).abs() < 1e-6, "{v} vs {expected}");
        assert!((ln_erfc(0.5) - libm::erfc(0.5).ln()).abs() < 1e-15);
    }

    #[test]
    fn elliptic_degenerate_values() {
        assert!((ellip_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((ellip_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        assert!(matches!(ellip_k(1.0), Err(MathError::Divergence { .. })));
        assert!(matches!(ellip_k(1.5), Err(MathError::Domain { .. })));
        assert!(matches!(ellip_e(-0.1), Err(MathError::Domain { .. })));
    }

    #[test]
    fn elliptic_matches_trapezoid_oracle() {
        let k = elliptic_trapezoid(0.5, false);
        let e = elliptic_trapezoid(0.5, true);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-12);
        assert!((e - 1.350_643_881_047_675_5).abs() < 1e-12);
        for &m in &[0.0, 0.1, 0.5, 0.81, 0.95] {
            let k = elliptic_trapezoid(m, false);
            let e = elliptic_trapezoid(m, true);
            assert!(((ellip_k(m).unwrap() - k) / k).abs() < 1e-12, "K({m})");
            assert!(((ellip_e(m).unwrap() - e) / e).abs() < 1e-12, "E({m})");
        }
    }

    #[test]
    fn uncorrelated_cross_moment_is_quarter_pi() {
        let m = 0.0;
        let v = ellip_e(m).unwrap() + (m - 1.0) * ellip_k(m).unwrap() / 2.0;
        assert_eq!(v, PI_4);
        assert_eq!(magnitude_cross_moment(0.0).unwrap(), PI_4);
        let half = magnitude_cross_moment(0.5f64.sqrt()).unwrap();
        assert!((half - 0.887_125_211_722_332).abs() < 1e-13, "{half}");
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert!((sinc(PI / 4.0) - (PI / 4.0).sin() / (PI / 4.0)).abs() < 1e-15);
        assert!((sinc(PI / 4.0) - 0.900_316).abs() < 5e-7);
        assert!((sinc(9e-5) - (9e-5f64).sin() / 9e-5).abs() < 3e-16);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn erf_is_odd(x in -30.0f64..30.0) {
                prop_assert_eq!(erf(-x).unwrap(), -erf(x).unwrap());
            }

            #[test]
            fn erf_bounded_and_complementary(x in -6.0f64..6.0) {
                let e = erf(x).unwrap();
                prop_assert!(e > -1.0 || x < -5.9);
                prop_assert!(e < 1.0 || x > 5.9);
                prop_assert!((erfc(x).unwrap() - (1.0 - e)).abs() < 1e-15);
            }

            #[test]
            fn elliptic_monotone(m in 0.0f64..0.99, dm in 1e-4f64..0.01) {
                prop_assert!(ellip_k(m + dm).unwrap() > ellip_k(m).unwrap());
                prop_assert!(ellip_e(m + dm).unwrap() < ellip_e(m).unwrap());
            }

            #[test]
            fn cross_moment_increases_with_correlation(r in 0.0f64..0.99, dr in 1e-4f64..0.01) {
                let lo = magnitude_cross_moment(r).unwrap();
                let hi = magnitude_cross_moment(r + dr).unwrap();
                prop_assert!(hi > lo);
                prop_assert!(lo >= PI_4 - 1e-15 && hi <= 1.0);
            }
        }
    }
}
