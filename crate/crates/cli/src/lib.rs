//! Config-driven experiment runner on top of `qdyn-core`.

pub mod config;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod kinks;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, Params};
pub use error::{CliError, CliResult};
pub use estimate::{check_resources, estimate_resources, ResourceEstimate};
pub use kinks::detect_kinks;
pub use runner::{run, RunManifest, RunStatus};
