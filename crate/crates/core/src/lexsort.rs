//! Tuple comparison, mixed-radix keys and the domain-constrained
//! lexicographic argsort.
//!
//! `lex_argsort` orders an index matrix one column at a time. After a column
//! is sorted, the positions where its value changes become new domain
//! boundaries; every later column is sorted only *within* the current
//! domains, so earlier columns are never disturbed. Domains only ever gain
//! boundaries (each new set is unioned with the previous one).

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::tensor::IndexMatrix;

/// Blocks at or below this length are insertion sorted.
pub const INSERTION_SORT_CUTOFF: usize = 32;

/// Lexicographic comparison, left position most significant.
pub fn tuple_cmp(a: &[usize], b: &[usize]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::TupleLengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.cmp(b))
}

/// Mixed-radix number of `a`, leftmost entry most significant.
///
/// Order preserving: `a < b` lexicographically iff `key(a) < key(b)`.
/// Fails if an entry is outside its radix or the radix product overflows.
pub fn tuple_key(a: &[usize], radices: &[usize]) -> Result<usize> {
    if a.len() != radices.len() {
        return Err(Error::TupleLengthMismatch {
            left: a.len(),
            right: radices.len(),
        });
    }
    let mut span = 1usize;
    let mut key = 0usize;
    for (position, (&value, &radix)) in a.iter().zip(radices).enumerate() {
        if value >= radix {
            return Err(Error::DigitOutOfRange { position, value, radix });
        }
        span = span.checked_mul(radix).ok_or_else(|| Error::SizeOverflow {
            shape: radices.to_vec(),
        })?;
        key = key * radix + value;
    }
    Ok(key)
}

/// Inverse of [`tuple_key`]; writes the digits of `key` into `out`.
pub fn tuple_from_key(mut key: usize, radices: &[usize], out: &mut [usize]) {
    debug_assert_eq!(out.len(), radices.len());
    for (slot, &radix) in out.iter_mut().zip(radices).rev() {
        *slot = key % radix;
        key /= radix;
    }
}

/// Strictly increasing boundaries `0 = b[0] < b[1] < ... < b[m] = N`.
/// Block `j` is the half-open row range `b[j]..b[j+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domains {
    boundaries: Vec<usize>,
}

impl Domains {
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        let ok = boundaries.first() == Some(&0) && boundaries.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            let len = boundaries.last().copied().unwrap_or(0);
            return Err(Error::InvalidDomains { boundaries, len });
        }
        Ok(Self { boundaries })
    }

    /// A single unconstrained block over `n` rows (`[0]` when `n == 0`).
    pub fn whole(n: usize) -> Self {
        if n == 0 {
            Self { boundaries: vec![0] }
        } else {
            Self { boundaries: vec![0, n] }
        }
    }

    /// One block per row.
    pub fn singletons(n: usize) -> Self {
        Self {
            boundaries: (0..=n).collect(),
        }
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Total row count covered.
    pub fn len(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidDomains {
                boundaries: self.boundaries.clone(),
                len: n,
            });
        }
        Ok(())
    }
}

/// Gather permutation: position `k` of the sorted sequence holds element
/// `map[k]` of the original.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        crate::tensor::check_permutation(&map, map.len())?;
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(k, &m)| k == m)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &m) in self.map.iter().enumerate() {
            inv[m] = k;
        }
        Self { map: inv }
    }

    /// Permutation equivalent to gathering with `self` and then with `next`.
    pub fn then(&self, next: &Permutation) -> Self {
        Self {
            map: next.map.iter().map(|&k| self.map[k]).collect(),
        }
    }

    /// `out[k] = items[map[k]]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.map.iter().map(|&k| items[k].clone()).collect()
    }
}

fn insertion_argsort(column: &[usize], idx: &mut [usize]) {
    for i in 1..idx.len() {
        let cur = idx[i];
        let v = column[cur];
        let mut j = i;
        while j > 0 && column[idx[j - 1]] > v {
            idx[j] = idx[j - 1];
            j -= 1;
        }
        idx[j] = cur;
    }
}

/// Stable argsort of `column`, restricted to each block of `domains`.
///
/// Rows never move across a block boundary.
pub fn constrained_argsort(column: &[usize], domains: &Domains) -> Result<Permutation> {
    domains.check_len(column.len())?;
    let mut map: Vec<usize> = (0..column.len()).collect();
    for block in domains.blocks() {
        let idx = &mut map[block];
        if idx.len() <= INSERTION_SORT_CUTOFF {
            insertion_argsort(column, idx);
        } else {
            // std's stable sort is a merge sort
            idx.sort_by_key(|&i| column[i]);
        }
    }
    Ok(Permutation { map })
}

/// Refines `prior` with every position where `column` changes value inside
/// a block. `column` must already be sorted within each prior block.
pub fn domains_from_sorted(column: &[usize], prior: &Domains) -> Result<Domains> {
    prior.check_len(column.len())?;
    let mut boundaries = Vec::with_capacity(prior.boundaries.len());
    boundaries.push(0);
    for block in prior.blocks() {
        for p in block.start + 1..block.end {
            if column[p] != column[p - 1] {
                boundaries.push(p);
            }
        }
        boundaries.push(block.end);
    }
    Ok(Domains { boundaries })
}

/// Stable lexicographic argsort of the rows of `indices`.
///
/// Returns the permutation and the domains delimiting maximal runs of equal
/// rows in sorted order.
pub fn lex_argsort(indices: &IndexMatrix) -> (Permutation, Domains) {
    let n = indices.nrows();
    let mut perm = Permutation::identity(n);
    let mut domains = Domains::whole(n);
    let mut column = vec![0usize; n];
    for k in 0..indices.ncols() {
        if domains.num_blocks() == n {
            // every row already isolated: later columns cannot reorder anything
            break;
        }
        for (slot, &row) in column.iter_mut().zip(perm.as_slice()) {
            *slot = indices.row(row)[k];
        }
        let step = constrained_argsort(&column, &domains).expect("domains track row count");
        let sorted = step.apply(&column);
        perm = perm.then(&step);
        domains = domains_from_sorted(&sorted, &domains).expect("domains track row count");
    }
    (perm, domains)
}

/// First-occurrence positions of each distinct row of an ssorted matrix.
pub fn uniques(sorted: &IndexMatrix) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for p in 0..sorted.nrows() {
        if p == 0 {
            out.push(0);
            continue;
        }
        match sorted.row(p - 1).cmp(sorted.row(p)) {
            Ordering::Less => out.push(p),
            Ordering::Equal => {}
            Ordering::Greater => return Err(Error::NotSorted(p)),
        }
    }
    Ok(out)
}
