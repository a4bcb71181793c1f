//! Closed and open quantum many-body dynamics on dense matrices.

pub mod closed;
pub mod error;
pub mod linalg;
pub mod markovian;
pub mod models;
pub mod nonmarkovian;
pub mod operators;
pub mod series;

pub use closed::{StateVector, RATE_CAP};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use operators::{HilbertSpace, Pauli, SiteKind};
pub use series::{TimeGrid, TimeSeries};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
