//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Semi-infinite ranges `[lo, ∞)` are mapped onto `[0, 1)` with
//! `x = lo + t/(1 − t)`; the Kronrod nodes never touch `t = 1`, so integrands
//! only need to decay. Integrable endpoint singularities are resolved by
//! repeated bisection of the worst interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::MathError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut values = [0.0; 15];
    values[7] = fc;
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        values[j] = f1;
        values[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((values[j] - mean).abs() + (values[14 - j] - mean).abs());
    }
    let abs_half = half.abs();
    let res_abs = abs_sum * abs_half;
    let res_asc = asc * abs_half;
    let mut error = ((kronrod - gauss) * half).abs();
    // QUADPACK error rescaling.
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { lo, hi, value: kronrod * half, error }
}

/// Adaptive integrator with absolute and relative stopping tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 0.0, max_evaluations: 200_000 }
    }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    pub fn with_budget(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }

    /// Integrates `f` over `[lo, hi]`; `hi` may be `f64::INFINITY`.
    pub fn integrate<F>(&self, f: F, lo: f64, hi: f64) -> Result<QuadratureResult, MathError>
    where
        F: Fn(f64) -> f64,
    {
        if !lo.is_finite() {
            return Err(MathError::Domain { function: "integrate", value: lo });
        }
        if hi.is_nan() || hi < lo {
            return Err(MathError::Domain { function: "integrate", value: hi });
        }
        if hi == lo {
            return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 1 });
        }
        if hi.is_infinite() {
            let mapped = |t: f64| {
                let one_minus = 1.0 - t;
                let x = lo + t / one_minus;
                let v = f(x) / (one_minus * one_minus);
                if v.is_finite() { v } else { 0.0 }
            };
            self.run(&mapped, 0.0, 1.0)
        } else {
            self.run(&f, lo, hi)
        }
    }

    fn run<F: Fn(f64) -> f64>(&self, f: &F, lo: f64, hi: f64) -> Result<QuadratureResult, MathError> {
        let first = kronrod15(f, lo, hi);
        let mut evaluations = 15;
        let mut total = first.value;
        let mut total_err = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        loop {
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= target {
                return Ok(QuadratureResult { value: total, abs_error_estimate: total_err, evaluations });
            }
            if evaluations + 30 > self.max_evaluations {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                // Interval can no longer be split in floating point.
                heap.push(Segment { error: 0.0, ..worst });
                total_err = heap.iter().map(|s| s.error).sum();
                if heap.iter().all(|s| s.error == 0.0) {
                    break;
                }
                continue;
            }
            let left = kronrod15(f, worst.lo, mid);
            let right = kronrod15(f, mid, worst.hi);
            evaluations += 30;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            // Periodically resum to keep the running totals free of drift.
            if heap.len() % 64 == 0 {
                total = heap.iter().map(|s| s.value).sum();
                total_err = heap.iter().map(|s| s.error).sum();
            }
        }
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let abs_error_estimate: f64 = heap.iter().map(|s| s.error).sum();
        let best = QuadratureResult { value, abs_error_estimate, evaluations };
        if abs_error_estimate <= self.abs_tol.max(self.rel_tol * value.abs()) {
            Ok(best)
        } else {
            Err(MathError::Accuracy { best })
        }
    }
}

/// Convenience wrapper: absolute tolerance only.
pub fn adaptive_quadrature<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult, MathError>
where
    F: Fn(f64) -> f64,
{
    Integrator::new(tol, 0.0).integrate(f, lo, hi)
}
