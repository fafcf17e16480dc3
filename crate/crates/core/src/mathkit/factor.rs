//! Sampling factors for correlated complex Gaussian vectors.
//!
//! A factor `F` (M×r) satisfies `F Fᵀ ≈ Ω`, so `h = √σ² · F g` with
//! `g ~ CN(0, I_r)` has covariance `σ² Ω`. When the spectrum of Ω decays fast
//! (dense sinc-correlated arrays) only a few eigenvectors are kept, which makes
//! each draw O(M r) instead of O(M²).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::MathError;

/// Row-major `M × rank` real factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingFactor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
    pub method: FactorMethod,
    /// `‖F Fᵀ − Ω‖_F / ‖Ω‖_F` measured at construction.
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    Cholesky,
    Eigen,
    TruncatedEigen,
}

impl SamplingFactor {
    /// Builds a factor whose reconstruction error is at most `tol` (relative,
    /// Frobenius). Uses a truncated eigenbasis when that saves work, otherwise
    /// the lower Cholesky factor, otherwise the full eigenbasis.
    pub fn new(omega: &DMatrix<f64>, tol: f64) -> Result<Self, MathError> {
        let dim = omega.nrows();
        if dim == 0 || omega.ncols() != dim {
            return Err(MathError::Domain { function: "sampling_factor", value: dim as f64 });
        }
        let norm = omega.norm();
        let eig = SymmetricEigen::new(omega.clone());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        if eig.eigenvalues[order[dim - 1]] < -tol * norm {
            return Err(MathError::Domain {
                function: "sampling_factor",
                value: eig.eigenvalues[order[dim - 1]],
            });
        }
        // Smallest rank whose discarded spectrum is below the budget; aim a
        // decade under `tol` so the measured error has head room.
        let budget = 0.1 * tol * norm;
        let mut tail_sq: f64 = 0.0;
        let mut rank = dim;
        for k in (1..dim).rev() {
            let lam = eig.eigenvalues[order[k]];
            tail_sq += lam * lam;
            if tail_sq.sqrt() > budget {
                break;
            }
            rank = k;
        }
        let from_eigen = |rank: usize, method: FactorMethod| {
            let mut data = vec![0.0; dim * rank];
            for (c, &idx) in order.iter().take(rank).enumerate() {
                let scale = eig.eigenvalues[idx].max(0.0).sqrt();
                for r in 0..dim {
                    data[r * rank + c] = eig.eigenvectors[(r, idx)] * scale;
                }
            }
            SamplingFactor { dim, rank, data, method, reconstruction_error: 0.0 }
        };
        let mut factor = if rank < dim {
            from_eigen(rank, FactorMethod::TruncatedEigen)
        } else if let Some(chol) = omega.clone().cholesky() {
            let l = chol.l();
            let mut data = vec![0.0; dim * dim];
            for r in 0..dim {
                for c in 0..=r {
                    data[r * dim + c] = l[(r, c)];
                }
            }
            SamplingFactor { dim, rank: dim, data, method: FactorMethod::Cholesky, reconstruction_error: 0.0 }
        } else {
            from_eigen(dim, FactorMethod::Eigen)
        };
        factor.reconstruction_error = factor.relative_error(omega);
        if factor.reconstruction_error > tol {
            return Err(MathError::Domain {
                function: "sampling_factor",
                value: factor.reconstruction_error,
            });
        }
        Ok(factor)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.rank + col]
    }

    /// `out = scale · F · g` for a complex innovation vector of length `rank`.
    pub fn apply(&self, g: &[Complex64], scale: f64, out: &mut [Complex64]) {
        debug_assert_eq!(g.len(), self.rank);
        debug_assert_eq!(out.len(), self.dim);
        let lower = self.method == FactorMethod::Cholesky;
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.rank..(r + 1) * self.rank];
            let upto = if lower { r + 1 } else { self.rank };
            let mut re = 0.0;
            let mut im = 0.0;
            for (w, z) in row[..upto].iter().zip(&g[..upto]) {
                re += w * z.re;
                im += w * z.im;
            }
            *slot = Complex64::new(scale * re, scale * im);
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.rank, &self.data)
    }

    fn relative_error(&self, omega: &DMatrix<f64>) -> f64 {
        let f = self.to_matrix();
        let diff = &f * f.transpose() - omega;
        diff.norm() / omega.norm()
    }
}
