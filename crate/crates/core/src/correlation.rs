//! Spatial correlation of the RIS elements and the scalar moments of the
//! aligned cascade.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mathkit::{magnitude_cross_moment, sinc, SamplingFactor};
use crate::scenario::{build_grid, RisGrid, ScenarioConfig};

/// Relative eigenvalue floor applied by the PSD repair.
pub const EIGEN_FLOOR: f64 = 1e-10;
/// Relative Frobenius reconstruction bound for the sampling factor.
pub const FACTOR_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RepairInfo {
    /// Eigenvalues raised to the floor.
    pub floored: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Largest `|Ω_ij|` change introduced by the repair.
    pub max_entry_change: f64,
}

impl RepairInfo {
    pub fn repaired(&self) -> bool {
        self.floored > 0
    }
}

/// Mean `μ`, variance `s` of the aligned cascade `Z₁ = Σ α α` and the rate
/// `ρ` of the exponential interference term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mu: f64,
    pub s: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct CorrelationModel {
    pub omega: DMatrix<f64>,
    pub omega_bar: DMatrix<f64>,
    pub factor: SamplingFactor,
    pub variance: f64,
    pub moments: Moments,
    pub repair: RepairInfo,
}

/// `[Ω]_ij = sinc(2π‖a_i − a_j‖/λ)`, repaired to be numerically PSD.
pub fn build_omega(grid: &RisGrid, wavelength: f64) -> (DMatrix<f64>, RepairInfo) {
    let m = grid.len();
    let k = 2.0 * PI / wavelength;
    let raw = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { sinc(k * grid.distance(i, j)) });
    repair_psd(raw)
}

fn repair_psd(raw: DMatrix<f64>) -> (DMatrix<f64>, RepairInfo) {
    let m = raw.nrows();
    let eig = SymmetricEigen::new(raw.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let floor = EIGEN_FLOOR * max;
    let floored = eig.eigenvalues.iter().filter(|&&l| l < floor).count();
    let mut info = RepairInfo { floored, min_eigenvalue: min, max_eigenvalue: max, max_entry_change: 0.0 };
    if floored == 0 {
        return (raw, info);
    }
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let v = &eig.eigenvectors;
    let mut fixed = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    fixed = (&fixed + fixed.transpose()) * 0.5;
    let scale: Vec<f64> = (0..m).map(|i| 1.0 / fixed[(i, i)].sqrt()).collect();
    for i in 0..m {
        fixed[(i, i)] = 1.0;
        for j in i + 1..m {
            let v = (fixed[(i, j)] * (scale[i] * scale[j])).clamp(-1.0, 1.0);
            fixed[(i, j)] = v;
            fixed[(j, i)] = v;
        }
    }
    info.max_entry_change = (&fixed - &raw).amax();
    (fixed, info)
}

/// Elementwise `((|Ω|² − 1)/2)·K(|Ω|²) + E(|Ω|²)` off the diagonal, 1 on it.
pub fn build_omega_bar(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = omega.nrows();
    let mut out = DMatrix::from_element(m, m, 1.0);
    for i in 0..m {
        for j in i + 1..m {
            let v = magnitude_cross_moment(omega[(i, j)])?;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

pub fn moments(omega: &DMatrix<f64>, omega_bar: &DMatrix<f64>, variance: f64) -> Result<Moments> {
    if omega.shape() != omega_bar.shape() {
        return Err(Error::Usage("correlation matrices differ in size".into()));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::invalid("zeta", "element variance must be positive"));
    }
    let m = omega.nrows() as f64;
    let s2 = variance * variance;
    let mut bar_sq = 0.0;
    let mut joint = 0.0;
    for (w, b) in omega.iter().zip(omega_bar.iter()) {
        bar_sq += b * b;
        joint += w * w * b * b;
    }
    let mu = PI * variance * m / 4.0;
    let s = s2 * bar_sq - PI * PI * s2 * m * m / 16.0;
    if !(s > 0.0) {
        return Err(Error::ApproximationBreakdown { s, elements: omega.nrows() });
    }
    Ok(Moments { mu, s, rho: 1.0 / (s2 * joint) })
}

impl CorrelationModel {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let grid = build_grid(cfg.elements, cfg.element_width);
        Self::from_grid(&grid, cfg.wavelength, cfg.element_variance())
    }

    pub fn from_grid(grid: &RisGrid, wavelength: f64, variance: f64) -> Result<Self> {
        let (omega, repair) = build_omega(grid, wavelength);
        Self::from_omega(omega, repair, variance)
    }

    pub fn from_omega(omega: DMatrix<f64>, repair: RepairInfo, variance: f64) -> Result<Self> {
        let omega_bar = build_omega_bar(&omega)?;
        let moments = moments(&omega, &omega_bar, variance)?;
        let factor = SamplingFactor::new(&omega, FACTOR_TOLERANCE)?;
        Ok(Self { omega, omega_bar, factor, variance, moments, repair })
    }

    pub fn elements(&self) -> usize {
        self.omega.nrows()
    }

    /// Long-format dump: `i,j,omega,omega_bar` (1-based indices).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,omega,omega_bar")?;
        let m = self.elements();
        for i in 0..m {
            for j in 0..m {
                writeln!(out, "{},{},{:e},{:e}", i + 1, j + 1, self.omega[(i, j)], self.omega_bar[(i, j)])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn line(m: usize, pitch: f64) -> RisGrid {
        RisGrid { pitch, columns: m, positions: (0..m).map(|i| [i as f64 * pitch, 0.0, 0.0]).collect() }
    }

    #[test]
    fn omega_entries() {
        let (w, _) = build_omega(&build_grid(16, 0.0125), 0.1);
        for i in 0..16 {
            assert_eq!(w[(i, i)], 1.0);
        }
        let (w, info) = build_omega(&line(2, 0.05), 0.1);
        assert!(w[(0, 1)].abs() < 1e-15);
        assert!(!info.repaired());
        let (w, _) = build_omega(&line(2, 0.0125), 0.1);
        assert!((w[(0, 1)] - 0.900_316_316_157_106).abs() < 1e-12);
    }

    #[test]
    fn dense_array_is_repaired_and_factorable() {
        let grid = build_grid(128, 0.0125);
        let model = CorrelationModel::from_grid(&grid, 0.1, 1.0).unwrap();
        assert!(model.repair.repaired());
        assert!(model.repair.max_entry_change < 1e-6, "{:?}", model.repair);
        assert!(model.factor.reconstruction_error <= FACTOR_TOLERANCE);
        let w = &model.omega;
        assert!((w - w.transpose()).amax() == 0.0);
        assert!(w.iter().all(|v| v.abs() <= 1.0));
        let f = model.factor.to_matrix();
        let err = (&f * f.transpose() - w).norm() / w.norm();
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn omega_bar_values() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = build_omega_bar(&w).unwrap();
        assert_eq!(b[(0, 1)], FRAC_PI_4);
        assert_eq!(b[(0, 0)], 1.0);
        let r = 0.5f64.sqrt();
        let w = DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0]);
        let b = build_omega_bar(&w).unwrap();
        let oracle = -0.25 * 1.854_074_677_301_372 + 1.350_643_881_047_675_5;
        assert!((b[(0, 1)] - oracle).abs() < 1e-12);
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 1.2, 1.2, 1.0]);
        assert!(build_omega_bar(&w).is_err());
    }

    #[test]
    fn single_element_moments() {
        let w = DMatrix::from_element(1, 1, 1.0);
        let m = moments(&w, &w, 1.0).unwrap();
        assert_eq!(m.mu, FRAC_PI_4);
        assert!((m.s - (1.0 - PI * PI / 16.0)).abs() < 1e-15);
        assert!((m.s - 0.383_150).abs() < 1e-6);
        assert_eq!(m.rho, 1.0);
    }

    #[test]
    fn uncorrelated_moments() {
        let n = 10;
        let sigma2 = 2.0;
        let w = DMatrix::<f64>::identity(n, n);
        let bar = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { FRAC_PI_4 });
        let m = moments(&w, &bar, sigma2).unwrap();
        let want = sigma2 * sigma2 * n as f64 * (1.0 - PI * PI / 16.0);
        assert!(((m.s - want) / want).abs() < 1e-12);
        // Only the diagonal survives in the interference sum.
        assert!((m.rho - 1.0 / (sigma2 * sigma2 * n as f64)).abs() < 1e-15);
    }

    #[test]
    fn default_grid_mu() {
        let model = CorrelationModel::from_grid(&build_grid(128, 0.0125), 0.1, 1.0).unwrap();
        assert!((model.moments.mu - PI * 32.0).abs() < 1e-12);
        assert!(model.moments.s > 0.0 && model.moments.rho > 0.0);
        for v in model.omega_bar.iter() {
            assert!((FRAC_PI_4 - 1e-15..=1.0).contains(v));
        }
    }

    #[test]
    fn csv_dump_shape() {
        let model = CorrelationModel::from_grid(&build_grid(4, 0.0125), 0.1, 1.0).unwrap();
        let mut buf = Vec::new();
        model.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("i,j,omega,omega_bar\n1,1,1e0,1e0\n"));
    }
}
