//! Numerical building blocks: special functions, quadrature, factorisation
//! and reproducible random streams.

pub mod factor;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use factor::{FactorMethod, SamplingFactor};
pub use quadrature::{adaptive_quadrature, Integrator, QuadratureResult};
pub use rng::{derive_seed, RngStream};
pub use special::{ellip_e, ellip_k, erf, erfc, erfcx, ln_erfc, magnitude_cross_moment, sinc};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MathError {
    #[error("{function}: argument {value} outside the domain")]
    Domain { function: &'static str, value: f64 },
    #[error("{function}: diverges at this argument")]
    Divergence { function: &'static str },
    #[error("quadrature did not reach tolerance (best {} ± {})", best.value, best.abs_error_estimate)]
    Accuracy { best: QuadratureResult },
}
