//! Memory estimates and the refusal rule applied before any model is built.

use qdyn_core::linalg::limits;
use qdyn_core::models::{complex_matrix_bytes, real_matrix_gb};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Params};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub hilbert_dim: usize,
    /// `dim² × 8 × 10⁻⁹`, the real-double figure.
    pub real_matrix_gb: f64,
    /// One dense complex `dim x dim` matrix.
    pub complex_matrix_bytes: u128,
    /// Vectorized density-matrix length, for Lindblad runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub liouvillian_dim: Option<usize>,
    /// The largest dense complex matrix the run allocates.
    pub largest_matrix_bytes: u128,
    pub budget_bytes: u128,
    pub max_dim: usize,
}

impl ResourceEstimate {
    pub fn within_budget(&self) -> bool {
        let largest_dim = self.liouvillian_dim.unwrap_or(self.hilbert_dim);
        self.largest_matrix_bytes <= self.budget_bytes && largest_dim <= self.max_dim
    }
}

fn checked_dim(local: usize, sites: usize) -> CliResult<usize> {
    u32::try_from(sites)
        .ok()
        .and_then(|s| local.checked_pow(s))
        .ok_or_else(|| CliError::Resource(format!("Hilbert dimension {local}^{sites} overflows")))
}

/// Hilbert and Liouvillian dimensions for one parameter block.
pub fn dimensions(params: &Params) -> CliResult<(usize, Option<usize>)> {
    Ok(match params {
        Params::TwoSpin(_) => (4, None),
        Params::IsingDqpt(p) => (checked_dim(2, p.n)?, None),
        Params::CavitySweep(p) => (checked_dim(2 * (p.cutoff + 1), p.cavities)?, None),
        Params::OpenIsing(_) => (4, Some(16)),
        Params::TlsPhoton(_) => (2, Some(4)),
        Params::Dephasing(_) => (2, None),
    })
}

fn budget_bytes(cfg: &ExperimentConfig) -> u128 {
    match cfg.memory_budget_gb {
        Some(gb) => (gb * 1e9) as u128,
        None => limits().memory_budget_bytes as u128,
    }
}

/// Estimate for the most demanding sweep point.
pub fn estimate_resources(cfg: &ExperimentConfig) -> CliResult<ResourceEstimate> {
    let mut worst: Option<ResourceEstimate> = None;
    for point in cfg.points() {
        let (hilbert_dim, liouvillian_dim) = dimensions(&cfg.params_at(point)?)?;
        let largest = liouvillian_dim.unwrap_or(hilbert_dim);
        let est = ResourceEstimate {
            hilbert_dim,
            real_matrix_gb: real_matrix_gb(hilbert_dim),
            complex_matrix_bytes: complex_matrix_bytes(hilbert_dim),
            liouvillian_dim,
            largest_matrix_bytes: complex_matrix_bytes(largest),
            budget_bytes: budget_bytes(cfg),
            max_dim: limits().max_dim,
        };
        if worst.as_ref().is_none_or(|w| est.largest_matrix_bytes > w.largest_matrix_bytes) {
            worst = Some(est);
        }
    }
    worst.ok_or_else(|| CliError::Config("no run points".into()))
}

/// The estimate, or a refusal quoting both memory figures.
pub fn check_resources(cfg: &ExperimentConfig) -> CliResult<ResourceEstimate> {
    let est = estimate_resources(cfg)?;
    if !est.within_budget() {
        return Err(CliError::Resource(format!(
            "dimension {} needs {:.3} GB as real doubles and {} bytes as complex doubles \
             (largest matrix {} bytes, budget {} bytes, dimension cap {})",
            est.hilbert_dim,
            est.real_matrix_gb,
            est.complex_matrix_bytes,
            est.largest_matrix_bytes,
            est.budget_bytes,
            est.max_dim
        )));
    }
    Ok(est)
}
