//! Magnetization and spin correlations of layered two-dimensional Ising models.

pub mod critical;
pub mod error;
pub mod exact;
pub mod homogeneous;
pub mod layered;
pub mod oracle;
pub mod sembedding;
pub mod spectral;
pub mod wetting;

pub use error::{Error, Result};
