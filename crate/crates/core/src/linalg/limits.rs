use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

/// Process-wide resource guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest matrix dimension any Kronecker product may produce.
    pub max_dim: usize,
    /// Largest dense complex matrix, in bytes, a model constructor may allocate.
    pub memory_budget_bytes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_dim: 1 << 14,
            memory_budget_bytes: 8_000_000_000,
        }
    }
}

static MAX_DIM: AtomicUsize = AtomicUsize::new(1 << 14);
static MEMORY_BUDGET: AtomicU64 = AtomicU64::new(8_000_000_000);

pub fn limits() -> Limits {
    Limits {
        max_dim: MAX_DIM.load(Ordering::Relaxed),
        memory_budget_bytes: MEMORY_BUDGET.load(Ordering::Relaxed),
    }
}

pub fn set_limits(l: Limits) {
    MAX_DIM.store(l.max_dim, Ordering::Relaxed);
    MEMORY_BUDGET.store(l.memory_budget_bytes, Ordering::Relaxed);
}
