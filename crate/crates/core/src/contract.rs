//! Pairwise contraction kernels.
//!
//! Sparse × sparse proceeds as:
//!
//! 1. split each operand's columns into external and overlap blocks;
//! 2. flatten the overlap block to one integer key per row and stably sort
//!    rows by key (the `D≤` order);
//! 3. build the surjection from each operand's external rows onto its unique
//!    external rows;
//! 4. intersect the two sorted key vectors;
//! 5. emit one product per pair of rows in every matched range, addressed by
//!    the flat output-order index of its external tuple;
//! 6. sort and sum like addresses, then decode them into index rows.
//!
//! The address of a product is `wa[u] + wb[v]`, where `u` and `v` are the
//! unique-row ids of its two external tuples and the weights are those
//! tuples dotted with the output strides. Sorting addresses is therefore the
//! same as sorting output rows, whatever the output axis order. When the
//! output space does not fit in `usize`, products are addressed by the pair
//! `(u, v)` instead; pairs sort like the concatenated external tuples, and the
//! rows are permuted and re-canonicalized afterwards.

use crate::canonical::{canonicalize, ensure_canonical};
use crate::error::{Error, Result};
use crate::intersect::{build_surjection, direct_intersection, SurjectionMap};
use crate::lexsort::{constrained_argsort, tuple_from_key, tuple_key, Domains};
use crate::plan::{parse_subscripts, ContractionPlan};
use crate::tensor::{checked_size, row_major_strides, DenseTensor, IndexMatrix, SparseTensor};

/// Deterministic work metrics of one kernel call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContractStats {
    /// Scalar multiplications performed.
    pub mult_count: u64,
    /// Distinct overlap keys present on both sides.
    pub matched_keys: usize,
}

/// Either operand kind accepted by [`contract_pair`].
#[derive(Clone, Debug, PartialEq)]
pub enum Tensor {
    Sparse(SparseTensor),
    Dense(DenseTensor),
}

impl Tensor {
    pub fn shape(&self) -> &[usize] {
        match self {
            Tensor::Sparse(t) => t.shape(),
            Tensor::Dense(t) => t.shape(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Tensor::Sparse(_))
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        match self {
            Tensor::Sparse(t) => t.to_dense(),
            Tensor::Dense(t) => Ok(t.clone()),
        }
    }
}

impl From<SparseTensor> for Tensor {
    fn from(t: SparseTensor) -> Self {
        Tensor::Sparse(t)
    }
}

impl From<DenseTensor> for Tensor {
    fn from(t: DenseTensor) -> Self {
        Tensor::Dense(t)
    }
}

/// One operand after steps 1 to 3: rows in key order plus its surjection.
struct KeyedOperand {
    keys: Vec<usize>,
    order: Vec<usize>,
    surjection: SurjectionMap,
}

fn key_operand(
    t: &SparseTensor,
    overlap_cols: &[usize],
    overlap_extents: &[usize],
    external_cols: &[usize],
) -> Result<KeyedOperand> {
    let mut raw_keys = Vec::with_capacity(t.nnz());
    let mut sub = vec![0usize; overlap_cols.len()];
    for r in t.indices().rows() {
        for (slot, &c) in sub.iter_mut().zip(overlap_cols) {
            *slot = r[c];
        }
        raw_keys.push(tuple_key(&sub, overlap_extents)?);
    }
    let order = constrained_argsort(&raw_keys, &Domains::whole(raw_keys.len()))?.into_vec();
    let keys = order.iter().map(|&i| raw_keys[i]).collect();
    let external = t.indices().gather_rows(&order).select_columns(external_cols);
    Ok(KeyedOperand {
        keys,
        order,
        surjection: build_surjection(&external),
    })
}

pub fn contract_sparse_sparse(a: &SparseTensor, b: &SparseTensor, plan: &ContractionPlan) -> Result<SparseTensor> {
    contract_sparse_sparse_with_stats(a, b, plan).map(|(t, _)| t)
}

/// Sparse × sparse contraction; the result is canonical.
pub fn contract_sparse_sparse_with_stats(
    a: &SparseTensor,
    b: &SparseTensor,
    plan: &ContractionPlan,
) -> Result<(SparseTensor, ContractStats)> {
    plan.check_shapes(a.shape(), b.shape())?;
    let a = ensure_canonical(a);
    let b = ensure_canonical(b);
    let extents = plan.overlap_extents();
    let ka = key_operand(&a, &plan.overlap_columns_a(), &extents, plan.external_a().columns())?;
    let kb = key_operand(&b, &plan.overlap_columns_b(), &extents, plan.external_b().columns())?;

    let matches = direct_intersection(&ka.keys, &kb.keys);
    let (ua, ub) = (&ka.surjection.unique_rows, &kb.surjection.unique_rows);
    let output_shape = plan.output_shape();
    let flat = usize::try_from(plan.external_space()).ok();

    // per-unique-row address weights; a product's address is wa + wb
    let (wa, wb, space) = match flat {
        Some(space) => {
            let out_strides = row_major_strides(&output_shape);
            let mut strides = vec![0; output_shape.len()];
            for (q, &p) in plan.output_perm().iter().enumerate() {
                strides[p] = out_strides[q];
            }
            let (sa, sb) = strides.split_at(ua.ncols());
            (address_weights(ua, sa), address_weights(ub, sb), space)
        }
        None => {
            let nb = ub.nrows();
            let space = ua.nrows().checked_mul(nb).ok_or_else(|| Error::SizeOverflow {
                shape: vec![ua.nrows(), nb],
            })?;
            ((0..ua.nrows()).map(|u| u * nb).collect(), (0..nb).collect(), space)
        }
    };
    let wa_sorted: Vec<usize> = ka.surjection.f.iter().map(|&u| wa[u]).collect();
    let wb_sorted: Vec<usize> = kb.surjection.f.iter().map(|&u| wb[u]).collect();
    let va_sorted: Vec<f64> = ka.order.iter().map(|&i| a.data()[i]).collect();
    let vb_sorted: Vec<f64> = kb.order.iter().map(|&i| b.data()[i]).collect();

    let work: usize = matches.iter().map(|m| m.work()).sum();
    let mut addresses = Vec::with_capacity(work);
    let mut values = Vec::with_capacity(work);
    for m in &matches {
        let (wbs, vbs) = (&wb_sorted[m.range_b.clone()], &vb_sorted[m.range_b.clone()]);
        for ra in m.range_a.clone() {
            let (base, va) = (wa_sorted[ra], va_sorted[ra]);
            addresses.extend(wbs.iter().map(|&w| base + w));
            values.extend(vbs.iter().map(|&v| va * v));
        }
    }
    let stats = ContractStats {
        mult_count: work as u64,
        matched_keys: matches.len(),
    };
    if addresses.is_empty() {
        return Ok((SparseTensor::zeros(output_shape)?, stats));
    }

    let summed = canonicalize(&SparseTensor::from_parts_unchecked(
        vec![space],
        IndexMatrix::from_column(addresses),
        values,
        false,
    ));
    let (_, keys, data) = summed.into_parts();
    let mut buf = Vec::new();
    if flat.is_some() {
        let mut rows = IndexMatrix::with_capacity(output_shape.len(), keys.nrows());
        buf.resize(output_shape.len(), 0);
        for r in keys.rows() {
            tuple_from_key(r[0], &output_shape, &mut buf);
            rows.push_row(&buf);
        }
        return Ok((
            SparseTensor::from_parts_unchecked(output_shape, rows, data, true),
            stats,
        ));
    }

    // pair ids sort like concatenated external tuples; permute afterwards
    let concat_shape: Vec<usize> = plan
        .external_a()
        .extents(a.shape())
        .into_iter()
        .chain(plan.external_b().extents(b.shape()))
        .collect();
    let nb = ub.nrows();
    let mut rows = IndexMatrix::with_capacity(concat_shape.len(), keys.nrows());
    for r in keys.rows() {
        buf.clear();
        buf.extend_from_slice(ua.row(r[0] / nb));
        buf.extend_from_slice(ub.row(r[0] % nb));
        rows.push_row(&buf);
    }
    let result = SparseTensor::from_parts_unchecked(concat_shape, rows, data, true);
    Ok((canonicalize(&result.permute_axes(plan.output_perm())?), stats))
}

fn address_weights(rows: &IndexMatrix, strides: &[usize]) -> Vec<usize> {
    rows.rows()
        .map(|r| r.iter().zip(strides).map(|(&i, &s)| i * s).sum())
        .collect()
}

pub fn contract_sparse_dense(s: &SparseTensor, d: &DenseTensor, plan: &ContractionPlan) -> Result<DenseTensor> {
    contract_sparse_dense_with_stats(s, d, plan).map(|(t, _)| t)
}

/// Sparse × dense contraction with a dense result.
///
/// The sparse operand is viewed as a matrix `S[I_E, I_I]` and the dense one
/// as `D[J_I, J_E]` (stored internal-major so each sparse entry reads one
/// contiguous row). Every sparse entry adds `value · D[i_I, :]` into row
/// `i_E` of the output `O[I_E, J_E]`.
pub fn contract_sparse_dense_with_stats(
    s: &SparseTensor,
    d: &DenseTensor,
    plan: &ContractionPlan,
) -> Result<(DenseTensor, ContractStats)> {
    plan.check_shapes(s.shape(), d.shape())?;
    let s = ensure_canonical(s);

    let ext_s = plan.external_a().columns();
    let ov_s = plan.overlap_columns_a();
    let ext_s_shape = plan.external_a().extents(s.shape());
    let ov_shape = plan.overlap_extents();

    let ext_d_shape = plan.external_b().extents(d.shape());
    let internal = checked_size(&ov_shape)?;
    let je = checked_size(&ext_d_shape)?;

    let matrix = matricize(
        d,
        &plan.overlap_columns_b(),
        plan.external_b().columns(),
        plan.reduced_b().columns(),
    )?;
    debug_assert_eq!(matrix.len(), internal * je);

    let ie = checked_size(&ext_s_shape)?;
    let mut out = vec![
        0.0;
        ie.checked_mul(je).ok_or_else(|| Error::SizeOverflow {
            shape: plan.output_shape(),
        })?
    ];
    let (mut sub_e, mut sub_i) = (vec![0; ext_s.len()], vec![0; ov_s.len()]);
    for (r, &v) in s.indices().rows().zip(s.data()) {
        for (slot, &c) in sub_e.iter_mut().zip(ext_s) {
            *slot = r[c];
        }
        for (slot, &c) in sub_i.iter_mut().zip(&ov_s) {
            *slot = r[c];
        }
        let row = tuple_key(&sub_e, &ext_s_shape)?;
        let col = tuple_key(&sub_i, &ov_shape)?;
        let dst = &mut out[row * je..(row + 1) * je];
        let src = &matrix[col * je..(col + 1) * je];
        for (o, &x) in dst.iter_mut().zip(src) {
            *o += v * x;
        }
    }
    let stats = ContractStats {
        mult_count: (s.nnz() as u64) * je as u64,
        matched_keys: 0,
    };

    let concat_shape: Vec<usize> = ext_s_shape.into_iter().chain(ext_d_shape).collect();
    let result = DenseTensor::new(concat_shape, out)?.permute_axes(plan.output_perm())?;
    Ok((result, stats))
}

/// Row-major `[rows, cols]` matrix of `t`, with the `reduced` axes summed away.
fn matricize(t: &DenseTensor, rows: &[usize], cols: &[usize], reduced: &[usize]) -> Result<Vec<f64>> {
    let mut axes = rows.to_vec();
    axes.extend_from_slice(cols);
    axes.extend_from_slice(reduced);
    let moved = t.permute_axes(&axes)?;
    let r = checked_size(&reduced.iter().map(|&c| t.shape()[c]).collect::<Vec<_>>())?;
    Ok(if r == 1 {
        moved.into_values()
    } else {
        moved.values().chunks_exact(r).map(|c| c.iter().sum()).collect()
    })
}

pub fn contract_dense_dense(a: &DenseTensor, b: &DenseTensor, plan: &ContractionPlan) -> Result<DenseTensor> {
    contract_dense_dense_with_stats(a, b, plan).map(|(t, _)| t)
}

/// Dense baseline: both operands are matricized as `A[I_E, I_I]` and
/// `B[J_I, J_E]` and multiplied with an i-k-j loop.
pub fn contract_dense_dense_with_stats(
    a: &DenseTensor,
    b: &DenseTensor,
    plan: &ContractionPlan,
) -> Result<(DenseTensor, ContractStats)> {
    plan.check_shapes(a.shape(), b.shape())?;
    let ext_a_shape = plan.external_a().extents(a.shape());
    let ext_b_shape = plan.external_b().extents(b.shape());
    let ie = checked_size(&ext_a_shape)?;
    let je = checked_size(&ext_b_shape)?;
    let internal = checked_size(&plan.overlap_extents())?;

    let ma = matricize(
        a,
        plan.external_a().columns(),
        &plan.overlap_columns_a(),
        plan.reduced_a().columns(),
    )?;
    let mb = matricize(
        b,
        &plan.overlap_columns_b(),
        plan.external_b().columns(),
        plan.reduced_b().columns(),
    )?;
    let mut out = vec![
        0.0;
        ie.checked_mul(je).ok_or_else(|| Error::SizeOverflow {
            shape: plan.output_shape(),
        })?
    ];
    if je > 0 {
        for (dst, arow) in out.chunks_exact_mut(je).zip(ma.chunks_exact(internal.max(1))) {
            for (k, &x) in arow.iter().enumerate() {
                for (o, &y) in dst.iter_mut().zip(&mb[k * je..(k + 1) * je]) {
                    *o += x * y;
                }
            }
        }
    }
    let stats = ContractStats {
        mult_count: (ie as u64) * (internal as u64) * (je as u64),
        matched_keys: 0,
    };
    let concat_shape: Vec<usize> = ext_a_shape.into_iter().chain(ext_b_shape).collect();
    let result = DenseTensor::new(concat_shape, out)?.permute_axes(plan.output_perm())?;
    Ok((result, stats))
}

/// Parses, plans and dispatches on operand kinds. The result is sparse iff
/// both operands are sparse.
pub fn contract_pair(a: &Tensor, b: &Tensor, spec: &str) -> Result<Tensor> {
    let plan = ContractionPlan::new(spec, a.shape(), b.shape())?;
    contract_planned(a, b, &plan)
}

fn contract_planned(a: &Tensor, b: &Tensor, plan: &ContractionPlan) -> Result<Tensor> {
    Ok(match (a, b) {
        (Tensor::Sparse(a), Tensor::Sparse(b)) => contract_sparse_sparse(a, b, plan)?.into(),
        (Tensor::Sparse(s), Tensor::Dense(d)) => contract_sparse_dense(s, d, plan)?.into(),
        (Tensor::Dense(d), Tensor::Sparse(s)) => contract_sparse_dense(s, d, &plan.swapped())?.into(),
        (Tensor::Dense(a), Tensor::Dense(b)) => contract_dense_dense(a, b, plan)?.into(),
    })
}

/// Left-associated fold of [`contract_pair`]: step `k` contracts the running
/// result with `operands[k + 1]` using `specs[k]`, whose left labels must be
/// the previous step's output labels.
pub fn contract_path<S: AsRef<str>>(operands: &[Tensor], specs: &[S]) -> Result<Tensor> {
    if specs.is_empty() || operands.len() != specs.len() + 1 {
        return Err(Error::PathArity {
            specs: specs.len(),
            expected: specs.len() + 1,
            got: operands.len(),
        });
    }
    let mut acc = operands[0].clone();
    let mut prev_out: Option<Vec<char>> = None;
    for (step, spec) in specs.iter().enumerate() {
        let subs = parse_subscripts(spec.as_ref())?;
        if let Some(prev) = &prev_out {
            if *prev != subs.a {
                return Err(Error::ChainMismatch {
                    step,
                    expected: subs.a.iter().collect(),
                    got: prev.iter().collect(),
                });
            }
        }
        let plan = crate::plan::build_plan(&subs, acc.shape(), operands[step + 1].shape())?;
        acc = contract_planned(&acc, &operands[step + 1], &plan)?;
        prev_out = Some(subs.output);
    }
    Ok(acc)
}
