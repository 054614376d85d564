//! Canonical form: rows strictly increasing, duplicates summed.

use std::borrow::Cow;

use crate::lexsort::lex_argsort;
use crate::tensor::{IndexMatrix, SparseTensor};

/// Sorts rows lexicographically and sums the data of every run of equal
/// rows. Each run is summed in ascending sorted position, and since the sort
/// is stable that is also original storage order, so results are
/// bit-reproducible. Zero sums are kept.
pub fn canonicalize(t: &SparseTensor) -> SparseTensor {
    if t.is_canonical() {
        return t.clone();
    }
    let (perm, runs) = lex_argsort(t.indices());
    let order = perm.as_slice();
    let mut indices = IndexMatrix::with_capacity(t.rank(), runs.num_blocks());
    let mut data = Vec::with_capacity(runs.num_blocks());
    for run in runs.blocks() {
        indices.push_row(t.indices().row(order[run.start]));
        let mut sum = 0.0;
        for &src in &order[run] {
            sum += t.data()[src];
        }
        data.push(sum);
    }
    SparseTensor::from_parts_unchecked(t.shape().to_vec(), indices, data, true)
}

/// Borrowing variant used by the kernels: no copy when already canonical.
pub fn ensure_canonical(t: &SparseTensor) -> Cow<'_, SparseTensor> {
    if t.is_canonical() {
        Cow::Borrowed(t)
    } else {
        Cow::Owned(canonicalize(t))
    }
}

/// Every adjacent pair strictly increasing (unique rows).
pub fn is_well_ordered(indices: &IndexMatrix) -> bool {
    (1..indices.nrows()).all(|k| indices.row(k - 1) < indices.row(k))
}

/// Every adjacent pair non-decreasing (duplicates allowed).
pub fn is_partially_ordered(indices: &IndexMatrix) -> bool {
    (1..indices.nrows()).all(|k| indices.row(k - 1) <= indices.row(k))
}
