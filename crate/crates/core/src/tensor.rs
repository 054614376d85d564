//! Sparse (COO) and dense tensor value types.
//!
//! A [`SparseTensor`] is the triple `(shape, indices, data)`: the index
//! matrix holds one coordinate tuple per stored entry and `data` holds the
//! matching values. A tensor is *canonical* when its index rows are strictly
//! increasing in lexicographic order, which implies they are unique.
//!
//! Dense tensors are stored row-major; the same mixed-radix linearization
//! ([`crate::lexsort::tuple_key`]) maps coordinates to buffer offsets and
//! flattens axis groups, so a flattened sparse tensor and a reshaped dense
//! tensor always agree.

use crate::error::{Error, Result};
use crate::lexsort::{tuple_from_key, tuple_key};

/// Row-major `nrows × ncols` matrix of coordinates.
///
/// The row count is stored explicitly so that zero-column matrices (the
/// index arrays of rank-0 tensors) can still carry rows.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<usize>,
}

impl IndexMatrix {
    pub fn empty(ncols: usize) -> Self {
        Self {
            nrows: 0,
            ncols,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(ncols: usize, rows: usize) -> Self {
        Self {
            nrows: 0,
            ncols,
            data: Vec::with_capacity(rows * ncols),
        }
    }

    /// Builds a matrix from a flat row-major buffer.
    pub fn from_flat(nrows: usize, ncols: usize, data: Vec<usize>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::RaggedIndices { len: data.len(), ncols });
        }
        Ok(Self { nrows, ncols, data })
    }

    /// Builds a matrix from explicit rows, all of which must have `ncols` entries.
    pub fn from_rows<R: AsRef<[usize]>>(ncols: usize, rows: &[R]) -> Result<Self> {
        let mut m = Self::with_capacity(ncols, rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::RankMismatch {
                    expected: ncols,
                    got: r.len(),
                });
            }
            m.push_row(r);
        }
        Ok(m)
    }

    /// A single column matrix.
    pub fn from_column(column: Vec<usize>) -> Self {
        Self {
            nrows: column.len(),
            ncols: 1,
            data: column,
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.nrows == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn push_row(&mut self, row: &[usize]) {
        debug_assert_eq!(row.len(), self.ncols);
        self.data.extend_from_slice(row);
        self.nrows += 1;
    }

    pub fn column(&self, k: usize) -> Vec<usize> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn as_flat(&self) -> &[usize] {
        &self.data
    }

    /// New matrix whose row `k` is `self.row(order[k])`.
    pub fn gather_rows(&self, order: &[usize]) -> Self {
        let mut out = Self::with_capacity(self.ncols, order.len());
        for &i in order {
            out.push_row(self.row(i));
        }
        out
    }

    /// New matrix keeping the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.nrows * columns.len());
        for r in self.rows() {
            data.extend(columns.iter().map(|&c| r[c]));
        }
        Self {
            nrows: self.nrows,
            ncols: columns.len(),
            data,
        }
    }

    /// Same rows with column `k` removed.
    pub fn drop_column(&self, k: usize) -> Self {
        let keep: Vec<usize> = (0..self.ncols).filter(|&c| c != k).collect();
        self.select_columns(&keep)
    }

    /// Same rows with `column` appended on the right.
    pub fn append_column(&self, column: &[usize]) -> Self {
        assert_eq!(column.len(), self.nrows);
        let mut out = Self::with_capacity(self.ncols + 1, self.nrows);
        let mut buf = Vec::with_capacity(self.ncols + 1);
        for (r, &c) in self.rows().zip(column) {
            buf.clear();
            buf.extend_from_slice(r);
            buf.push(c);
            out.push_row(&buf);
        }
        out
    }
}

/// Ordered subset of a tensor's axes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisGroup {
    columns: Vec<usize>,
}

impl AxisGroup {
    /// Validates that `columns` are distinct and below `rank`.
    pub fn new(columns: Vec<usize>, rank: usize) -> Result<Self> {
        let mut seen = vec![false; rank];
        for &c in &columns {
            if c >= rank || seen[c] {
                return Err(Error::InvalidGrouping(vec![columns]));
            }
            seen[c] = true;
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Extents of the grouped axes, in group order.
    pub fn extents(&self, shape: &[usize]) -> Vec<usize> {
        self.columns.iter().map(|&c| shape[c]).collect()
    }
}

pub(crate) fn checked_size(shape: &[usize]) -> Result<usize> {
    shape
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .ok_or_else(|| Error::SizeOverflow { shape: shape.to_vec() })
}

fn check_extents(shape: &[usize]) -> Result<()> {
    match shape.iter().position(|&k| k == 0) {
        Some(axis) => Err(Error::ZeroExtent { axis }),
        None => Ok(()),
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Row-major strides for `shape`.
pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Sparse tensor in coordinate (COO) form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseTensor {
    shape: Vec<usize>,
    indices: IndexMatrix,
    data: Vec<f64>,
    canonical: bool,
}

impl SparseTensor {
    /// Validates and wraps raw parts. Input order is kept and the result is
    /// marked non-canonical; see [`crate::canonical::canonicalize`].
    pub fn new(shape: Vec<usize>, indices: IndexMatrix, data: Vec<f64>) -> Result<Self> {
        check_extents(&shape)?;
        checked_size(&shape)?;
        if indices.ncols() != shape.len() {
            return Err(Error::RankMismatch {
                expected: shape.len(),
                got: indices.ncols(),
            });
        }
        if data.len() != indices.nrows() {
            return Err(Error::DataLengthMismatch {
                rows: indices.nrows(),
                data: data.len(),
            });
        }
        for (row, r) in indices.rows().enumerate() {
            for (axis, (&index, &extent)) in r.iter().zip(&shape).enumerate() {
                if index >= extent {
                    return Err(Error::IndexOutOfBounds {
                        row,
                        axis,
                        index,
                        extent,
                    });
                }
            }
        }
        Ok(Self {
            shape,
            indices,
            data,
            canonical: false,
        })
    }

    /// Convenience constructor over explicit index rows.
    pub fn from_rows<R: AsRef<[usize]>>(shape: Vec<usize>, rows: &[R], data: Vec<f64>) -> Result<Self> {
        let indices = IndexMatrix::from_rows(shape.len(), rows)?;
        Self::new(shape, indices, data)
    }

    /// An entry-free tensor; trivially canonical.
    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let rank = shape.len();
        let mut t = Self::new(shape, IndexMatrix::empty(rank), Vec::new())?;
        t.canonical = true;
        Ok(t)
    }

    pub(crate) fn from_parts_unchecked(
        shape: Vec<usize>,
        indices: IndexMatrix,
        data: Vec<f64>,
        canonical: bool,
    ) -> Self {
        debug_assert_eq!(indices.ncols(), shape.len());
        debug_assert_eq!(indices.nrows(), data.len());
        Self {
            shape,
            indices,
            data,
            canonical,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn indices(&self) -> &IndexMatrix {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn into_parts(self) -> (Vec<usize>, IndexMatrix, Vec<f64>) {
        (self.shape, self.indices, self.data)
    }

    /// Number of elements of the equivalent dense tensor.
    pub fn dense_size(&self) -> usize {
        // validated at construction
        self.shape.iter().product()
    }

    /// Fraction of the dense coordinate space that is stored.
    pub fn sparsity(&self) -> Result<f64> {
        if !self.canonical {
            return Err(Error::NotCanonical);
        }
        Ok(self.nnz() as f64 / self.dense_size() as f64)
    }

    /// Scatters entries into a zero-filled row-major buffer. Duplicate rows
    /// (only possible before canonicalization) accumulate in storage order.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let strides = row_major_strides(&self.shape);
        let mut values = vec![0.0; self.dense_size()];
        for (r, &v) in self.indices.rows().zip(&self.data) {
            let off: usize = r.iter().zip(&strides).map(|(i, s)| i * s).sum();
            values[off] += v;
        }
        DenseTensor::new(self.shape.clone(), values)
    }

    /// Keeps entries with `|value| > tol`. Row-major enumeration is already
    /// lexicographic, so the result is canonical.
    pub fn from_dense(d: &DenseTensor, tol: f64) -> Self {
        let rank = d.shape().len();
        let mut indices = IndexMatrix::with_capacity(rank, 0);
        let mut data = Vec::new();
        let mut coord = vec![0usize; rank];
        for (off, &v) in d.values().iter().enumerate() {
            if v.abs() > tol {
                tuple_from_key(off, d.shape(), &mut coord);
                indices.push_row(&coord);
                data.push(v);
            }
        }
        Self::from_parts_unchecked(d.shape().to_vec(), indices, data, true)
    }

    /// Reorders axes: output axis `k` is input axis `perm[k]`. Any
    /// non-identity permutation clears the canonical flag.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rank())?;
        let identity = perm.iter().enumerate().all(|(k, &p)| k == p);
        if identity {
            return Ok(self.clone());
        }
        let shape = perm.iter().map(|&p| self.shape[p]).collect();
        let indices = self.indices.select_columns(perm);
        Ok(Self::from_parts_unchecked(shape, indices, self.data.clone(), false))
    }

    /// Replaces each axis group by a single axis whose index is the
    /// row-major linearization of the group's sub-tuple.
    pub fn flatten_groups(&self, groups: &[AxisGroup]) -> Result<Self> {
        let order: Vec<usize> = groups.iter().flat_map(|g| g.columns().iter().copied()).collect();
        if check_permutation(&order, self.rank()).is_err() {
            return Err(Error::InvalidGrouping(
                groups.iter().map(|g| g.columns().to_vec()).collect(),
            ));
        }
        let radices: Vec<Vec<usize>> = groups.iter().map(|g| g.extents(&self.shape)).collect();
        let shape = radices.iter().map(|r| checked_size(r)).collect::<Result<Vec<_>>>()?;
        let mut indices = IndexMatrix::with_capacity(groups.len(), self.nnz());
        let mut sub = Vec::new();
        let mut out = vec![0usize; groups.len()];
        for r in self.indices.rows() {
            for (slot, (g, rad)) in out.iter_mut().zip(groups.iter().zip(&radices)) {
                sub.clear();
                sub.extend(g.columns().iter().map(|&c| r[c]));
                *slot = tuple_key(&sub, rad)?;
            }
            indices.push_row(&out);
        }
        let in_order = order.iter().enumerate().all(|(k, &c)| k == c);
        Ok(Self::from_parts_unchecked(
            shape,
            indices,
            self.data.clone(),
            self.canonical && in_order,
        ))
    }
}

/// Row-major dense tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_extents(&shape)?;
        let expected = checked_size(&shape)?;
        if values.len() != expected {
            return Err(Error::DenseLengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        check_extents(&shape)?;
        let n = checked_size(&shape)?;
        Ok(Self {
            shape,
            values: vec![0.0; n],
        })
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: Vec::new(),
            values: vec![value],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn get(&self, coord: &[usize]) -> Option<f64> {
        if coord.len() != self.rank() || coord.iter().zip(&self.shape).any(|(i, k)| i >= k) {
            return None;
        }
        let off: usize = coord.iter().zip(self.strides()).map(|(i, s)| i * s).sum();
        Some(self.values[off])
    }

    /// Transposes axes: output axis `k` is input axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rank())?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let in_strides = self.strides();
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let mut values = Vec::with_capacity(self.values.len());
        let mut coord = vec![0usize; shape.len()];
        let mut src = 0usize;
        for _ in 0..self.values.len() {
            values.push(self.values[src]);
            // odometer increment, tracking the source offset
            for k in (0..shape.len()).rev() {
                coord[k] += 1;
                src += src_strides[k];
                if coord[k] < shape[k] {
                    break;
                }
                src -= src_strides[k] * shape[k];
                coord[k] = 0;
            }
        }
        Ok(Self { shape, values })
    }

    /// Reinterprets the buffer under a new shape of equal size.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        if checked_size(&shape)? != self.values.len() {
            return Err(Error::ShapeMismatch {
                left: self.shape,
                right: shape,
            });
        }
        Self::new(shape, self.values)
    }

    /// Multiplies every value by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            values: self.values.iter().map(|v| v * alpha).collect(),
        }
    }
}
