//! Fixtures shared by the criterion benches.

use ftt_core::experiment::ExperimentConfig;
use ftt_core::{ContractionPlan, DenseTensor, SparseTensor};

/// A sparse operand pair with its plan, as generated by the experiment harness.
pub struct Workload {
    pub a: SparseTensor,
    pub b: SparseTensor,
    pub plan: ContractionPlan,
}

impl Workload {
    pub fn from_config(cfg: &ExperimentConfig, sparsity: f64) -> Self {
        let (a, b) = cfg.operands(sparsity, 0).expect("valid workload");
        let plan = ContractionPlan::new(&cfg.subscripts, &cfg.shape_a, &cfg.shape_b).expect("valid plan");
        Workload { a, b, plan }
    }

    pub fn matmul(n: usize, sparsity: f64) -> Self {
        Self::from_config(&ExperimentConfig::matmul(n), sparsity)
    }

    pub fn mpo(extent: usize, sparsity: f64) -> Self {
        Self::from_config(&ExperimentConfig::mpo(extent), sparsity)
    }

    pub fn pepo(extent: usize, sparsity: f64) -> Self {
        Self::from_config(&ExperimentConfig::pepo(extent), sparsity)
    }

    /// Operand `b` as a dense tensor, for the sparse × dense kernel.
    pub fn dense_b(&self) -> DenseTensor {
        self.b.to_dense().expect("dense operand fits in memory")
    }
}
