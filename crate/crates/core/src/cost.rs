//! Work counters used to check training-cost formulas and the promise that
//! recommendation runs without kernel evaluations.

use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Default)]
pub struct CostCounter {
    trainings: AtomicU64,
    kernel_evaluations: AtomicU64,
    gram_matrices: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct CostSnapshot {
    pub trainings: u64,
    pub kernel_evaluations: u64,
    pub gram_matrices: u64,
}

impl CostCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_trainings(&self, n: u64) {
        self.trainings.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_kernel_evaluations(&self, n: u64) {
        self.kernel_evaluations.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_gram(&self) {
        self.gram_matrices.fetch_add(1, Ordering::Relaxed);
    }

    pub fn trainings(&self) -> u64 {
        self.trainings.load(Ordering::Relaxed)
    }

    pub fn kernel_evaluations(&self) -> u64 {
        self.kernel_evaluations.load(Ordering::Relaxed)
    }

    pub fn gram_matrices(&self) -> u64 {
        self.gram_matrices.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> CostSnapshot {
        CostSnapshot {
            trainings: self.trainings(),
            kernel_evaluations: self.kernel_evaluations(),
            gram_matrices: self.gram_matrices(),
        }
    }
}
