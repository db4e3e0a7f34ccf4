//! Exact and Monte Carlo tools for product mixing in the symmetric and
//! alternating groups.

pub mod concentration;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod group;
pub mod inequalities;
pub mod mixing;

pub use error::{PermixError, Result};
