//! Sparse tensor partial traces over sorted coordinate (COO) index arrays.
//!
//! The engine keeps every sparse operand in *canonical* form (rows strictly
//! lexicographically ordered, duplicates summed) and contracts pairs of
//! tensors without ever materializing a dense intermediate:
//!
//! * [`lexsort`]: tuple ordering, mixed-radix keys and the domain-constrained
//!   column-by-column argsort;
//! * [`canonical`]: sort-and-sum into canonical form;
//! * [`plan`]: subscript parsing and the external / overlap column split;
//! * [`intersect`]: galloping intersection of contraction keys and the
//!   surjection from sorted rows onto unique external rows;
//! * [`contract`]: the sparse × sparse and sparse × dense kernels;
//! * [`oracle`]: a naive dense reference used to validate the kernels;
//! * [`randgen`], [`experiment`]: seeded fixtures and sparsity sweeps.
//!
//! ```
//! use ftt_core::{contract_pair, SparseTensor, Tensor};
//!
//! let eye = SparseTensor::from_rows(vec![2, 2], &[[0, 0], [1, 1]], vec![1.0, 1.0]).unwrap();
//! let m = SparseTensor::from_rows(vec![2, 2], &[[0, 1], [1, 0]], vec![2.0, 3.0]).unwrap();
//! let c = contract_pair(&eye.into(), &m.into(), "ab,bc->ac").unwrap();
//! assert_eq!(c.to_dense().unwrap().values(), &[0.0, 2.0, 3.0, 0.0]);
//! # let _: Tensor = c;
//! ```

pub mod canonical;
pub mod contract;
pub mod error;
pub mod experiment;
pub mod intersect;
pub mod lexsort;
pub mod oracle;
pub mod plan;
pub mod randgen;
pub mod tensor;
pub mod textfmt;

pub use canonical::{canonicalize, is_partially_ordered, is_well_ordered};
pub use contract::{
    contract_dense_dense, contract_dense_dense_with_stats, contract_pair, contract_path, contract_sparse_dense,
    contract_sparse_dense_with_stats, contract_sparse_sparse, contract_sparse_sparse_with_stats, ContractStats, Tensor,
};
pub use error::{Error, Result};
pub use lexsort::{Domains, Permutation};
pub use plan::{build_plan, parse_subscripts, ContractionPlan, Subscripts};
pub use tensor::{AxisGroup, DenseTensor, IndexMatrix, SparseTensor};
