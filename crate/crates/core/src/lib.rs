pub mod analytics;
pub mod error;
pub mod channel;
pub mod correlation;
pub mod link;
pub mod mathkit;
pub mod montecarlo;
pub mod report;
pub mod scenario;
pub mod scheduler;
pub mod traffic;

pub use error::{Error, Result};
