//! Densities of the folded-normal/exponential model and an independent
//! quadrature evaluation of the outage CDF.

use std::f64::consts::PI;

use serde::Serialize;

use super::{cdf_f, OutageParams};
use crate::correlation::Moments;
use crate::error::{Error, Result};
use crate::mathkit::{Integrator, MathError};

/// Density of `X = Z²`, `Z ~ N(μ, s)`.
pub fn density_x(x: f64, mu: f64, s: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let r = x.sqrt();
    let lo = (-(r - mu).powi(2) / (2.0 * s)).exp();
    let hi = (-(r + mu).powi(2) / (2.0 * s)).exp();
    (lo + hi) / (2.0 * (2.0 * x * PI * s).sqrt())
}

/// CDF of `Y ~ Exp(ρ)`.
pub fn cdf_y(y: f64, rho: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        -(-rho * y).exp_m1()
    }
}

/// `f_X(u²)·2u`: the density of `|Z|` at `u`.
fn folded_density(u: f64, mu: f64, s: f64) -> f64 {
    let norm = 1.0 / (2.0 * PI * s).sqrt();
    norm * ((-(u - mu).powi(2) / (2.0 * s)).exp() + (-(u + mu).powi(2) / (2.0 * s)).exp())
}

fn integrate_pieces<F: Fn(f64) -> f64 + Copy>(f: F, lo: f64, hi: f64, marks: &[f64], q: &Integrator) -> Result<f64> {
    let mut cuts: Vec<f64> = marks.iter().copied().filter(|&m| m > lo && m < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut from = lo;
    for c in cuts.into_iter().chain(std::iter::once(hi)) {
        total += q.integrate(f, from, c)?.value;
        from = c;
    }
    Ok(total)
}

/// `F = 1 − ∫_{τ/δ}^∞ F_Y((δx − τ)/(τε)) f_X(x) dx`, integrated in `u = √x`
/// and rearranged as `∫_0^t f_|Z| + ∫_t^∞ (1 − F_Y) f_|Z|` so small
/// probabilities keep their relative accuracy.
pub fn quadrature_cdf(p: &OutageParams) -> Result<f64> {
    if p.tau == 0.0 {
        return Ok(0.0);
    }
    if p.delta == 0.0 {
        return Ok(1.0);
    }
    if !(p.s > 0.0 && p.rho > 0.0) {
        return Err(MathError::Domain { function: "quadrature_cdf", value: p.s.min(p.rho) }.into());
    }
    let q = Integrator::new(1e-300, 1e-13).with_budget(2_000_000);
    let (mu, s) = (p.mu, p.s);
    let t = (p.tau / p.delta).sqrt();
    let sd = s.sqrt();
    let mut marks: Vec<f64> = (-8..=8).map(|k| mu + k as f64 * sd).collect();
    let below = integrate_pieces(|u| folded_density(u, mu, s), 0.0, t, &marks, &q)?;
    if p.epsilon == 0.0 {
        return Ok(below);
    }
    // Survival weight e^{−ρ(δu² − τ)/(τε)} narrows the integrand around
    // m = μ/(2sa) with width 1/√(2a).
    let a = p.rho * p.delta / (p.tau * p.epsilon) + 0.5 / s;
    let centre = mu / (2.0 * s * a);
    let width = 1.0 / (2.0 * a).sqrt();
    marks.extend((-8..=8).map(|k| centre + k as f64 * width));
    marks.push(t + 40.0 * width);
    let weight = |u: f64| {
        let y = (p.delta * u * u - p.tau) / (p.tau * p.epsilon);
        (-(p.rho * y)).exp() * folded_density(u, mu, s)
    };
    let span_end = marks.iter().copied().fold(t, f64::max);
    let above = integrate_pieces(weight, t, span_end, &marks, &q)? + q.integrate(weight, span_end, f64::INFINITY)?.value;
    Ok(below + above)
}

/// Thresholds of the validation grid; the middle one is `e^{2·0.5} − 1`.
pub const GRID_THRESHOLDS: [f64; 5] = [0.25, 0.75, std::f64::consts::E - 1.0, 4.0, 10.0];

/// 5×5×5 grid spanning noise- and interference-limited operation:
/// `δ = c/μ²` puts `τ/δ` around the mean of `Z²`, and `ε = c'·ρ` spans
/// mean interference from 0.01 to 100 times the noise.
pub fn validation_grid(moments: &Moments) -> Vec<OutageParams> {
    let mu2 = moments.mu * moments.mu;
    let mut out = Vec::with_capacity(125);
    for &cd in &[0.25, 1.0, 4.0, 16.0, 64.0] {
        for &ce in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            for &tau in &GRID_THRESHOLDS {
                out.push(OutageParams::new(cd / mu2, ce * moments.rho, moments, tau));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub points: usize,
    pub max_abs_gap: f64,
    pub max_rel_gap: f64,
    pub worst: OutageParams,
    pub worst_closed_form: f64,
    pub worst_quadrature: f64,
}

/// Closed form against quadrature at every grid point.
pub fn compare_with_quadrature(grid: &[OutageParams]) -> Result<OracleComparison> {
    let first = *grid.first().ok_or_else(|| Error::Usage("empty validation grid".into()))?;
    let mut cmp = OracleComparison {
        points: grid.len(),
        max_abs_gap: 0.0,
        max_rel_gap: 0.0,
        worst: first,
        worst_closed_form: f64::NAN,
        worst_quadrature: f64::NAN,
    };
    for p in grid {
        let closed = cdf_f(p)?.value;
        let quad = quadrature_cdf(p)?;
        let abs = (closed - quad).abs();
        let rel = if quad > 0.0 { abs / quad } else if abs == 0.0 { 0.0 } else { f64::INFINITY };
        cmp.max_abs_gap = cmp.max_abs_gap.max(abs);
        if rel > cmp.max_rel_gap || cmp.worst_closed_form.is_nan() {
            cmp.max_rel_gap = rel;
            cmp.worst = *p;
            cmp.worst_closed_form = closed;
            cmp.worst_quadrature = quad;
        }
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn density_x_normalizes() {
        let q = Integrator::new(1e-12, 0.0);
        let total = q.integrate(|x| density_x(x, 1.0, 0.5), 0.0, f64::INFINITY).unwrap().value;
        assert!((total - 1.0).abs() < 1e-8, "{total}");
        let wide = q.integrate(|x| density_x(x, 50.27, 228.7), 0.0, 1e3).unwrap().value
            + q.integrate(|x| density_x(x, 50.27, 228.7), 1e3, f64::INFINITY).unwrap().value;
        assert!((wide - 1.0).abs() < 1e-8, "{wide}");
    }

    #[test]
    fn exponential_cdf_ends() {
        assert_eq!(cdf_y(0.0, 2.0), 0.0);
        assert_eq!(cdf_y(f64::INFINITY, 2.0), 1.0);
    }

    #[test]
    fn density_x_matches_folded_sampling() {
        // Chi-square on 20 equiprobable-ish bins of X = Z², Z ~ N(1, 0.5).
        let (mu, s) = (1.0, 0.5);
        let normal = Normal::new(mu, f64::sqrt(s)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let edges: Vec<f64> = (0..=20).map(|i| (i as f64 * 0.25).powi(2)).collect();
        let mut counts = vec![0usize; 21];
        for _ in 0..n {
            let x: f64 = normal.sample(&mut rng).powi(2);
            let bin = edges.iter().rposition(|&e| x >= e).unwrap_or(0).min(20);
            counts[bin] += 1;
        }
        let q = Integrator::new(1e-12, 0.0);
        let mut chi2 = 0.0;
        for i in 0..21 {
            let hi = if i == 20 { f64::INFINITY } else { edges[i + 1] };
            let p = q.integrate(|x| density_x(x, mu, s), edges[i], hi).unwrap().value;
            let expected = p * n as f64;
            chi2 += (counts[i] as f64 - expected).powi(2) / expected;
        }
        // χ²₂₀ at the 1% level.
        assert!(chi2 < 37.566, "chi2 {chi2}");
    }

    #[test]
    fn grid_shape_and_agreement_small_array() {
        let m = Moments { mu: std::f64::consts::FRAC_PI_4, s: 0.3831, rho: 1.0 };
        let grid = validation_grid(&m);
        assert_eq!(grid.len(), 125);
        let cmp = compare_with_quadrature(&grid).unwrap();
        assert!(cmp.max_rel_gap < 1e-6, "{cmp:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn complementary_matches_literal_integral(d in 0.1f64..10.0, e in 0.1f64..10.0, tau in 0.1f64..5.0) {
            // Where F is not tiny, the literal 1 − ∫ F_Y f_X form is accurate too.
            let p = OutageParams { delta: d, epsilon: e, s: 0.3831, mu: std::f64::consts::FRAC_PI_4, rho: 1.0, tau };
            let q = Integrator::new(1e-13, 0.0);
            let lo = tau / d;
            let f = |x: f64| cdf_y((d * x - tau) / (tau * e), 1.0) * density_x(x, p.mu, p.s);
            let literal = 1.0 - q.integrate(f, lo, lo + 50.0).unwrap().value - q.integrate(f, lo + 50.0, f64::INFINITY).unwrap().value;
            let ours = quadrature_cdf(&p).unwrap();
            prop_assert!((literal - ours).abs() < 1e-9, "{literal} vs {ours}");
        }
    }
}
