//! Direct intersection of sorted contraction keys, and the surjective map
//! from an operand's (key-sorted) rows onto its unique external rows.

use std::ops::Range;

use crate::lexsort::{lex_argsort, uniques, Permutation};
use crate::tensor::IndexMatrix;

/// A key present on both sides of a contraction edge, with the maximal
/// runs of positions holding it in each sorted key vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchedRange {
    pub range_a: Range<usize>,
    pub range_b: Range<usize>,
    pub key: usize,
}

impl MatchedRange {
    /// Number of products this match contributes.
    pub fn work(&self) -> usize {
        self.range_a.len() * self.range_b.len()
    }
}

/// Maximal run of `key` in ascending `sorted_keys`; empty at the insertion
/// point when absent.
pub fn search_range(sorted_keys: &[usize], key: usize) -> Range<usize> {
    let lo = sorted_keys.partition_point(|&k| k < key);
    let hi = lo + sorted_keys[lo..].partition_point(|&k| k <= key);
    lo..hi
}

/// First position `>= from` whose key is not below `key`, found by
/// exponential probing followed by a binary search of the last stride.
fn gallop_to(keys: &[usize], from: usize, key: usize, inclusive: bool) -> usize {
    let before = |k: usize| if inclusive { k <= key } else { k < key };
    if from >= keys.len() || !before(keys[from]) {
        return from;
    }
    let mut step = 1;
    let mut lo = from;
    while lo + step < keys.len() && before(keys[lo + step]) {
        lo += step;
        step *= 2;
    }
    let hi = (lo + step).min(keys.len());
    lo + 1 + keys[lo + 1..hi].partition_point(|&k| before(k))
}

/// All keys shared by two ascending sequences, in ascending key order.
pub fn direct_intersection(keys_a: &[usize], keys_b: &[usize]) -> Vec<MatchedRange> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < keys_a.len() && j < keys_b.len() {
        let (ka, kb) = (keys_a[i], keys_b[j]);
        if ka < kb {
            i = gallop_to(keys_a, i, kb, false);
        } else if kb < ka {
            j = gallop_to(keys_b, j, ka, false);
        } else {
            let end_a = gallop_to(keys_a, i, ka, true);
            let end_b = gallop_to(keys_b, j, ka, true);
            out.push(MatchedRange {
                range_a: i..end_a,
                range_b: j..end_b,
                key: ka,
            });
            i = end_a;
            j = end_b;
        }
    }
    out
}

/// Map from every row of an external-index matrix to its unique row.
///
/// `perm_i` sorts the rows (giving the partially ordered `F≤`), `uniques_u`
/// marks the first occurrence of each distinct sorted row, `unique_rows` is
/// the strictly ordered `F<`, and `f[j]` is the position in `unique_rows`
/// of input row `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurjectionMap {
    pub perm_i: Permutation,
    pub uniques_u: Vec<usize>,
    pub f: Vec<usize>,
    pub unique_rows: IndexMatrix,
}

impl SurjectionMap {
    pub fn num_unique(&self) -> usize {
        self.unique_rows.nrows()
    }
}

pub fn build_surjection(external_rows: &IndexMatrix) -> SurjectionMap {
    let (perm_i, _) = lex_argsort(external_rows);
    let sorted = external_rows.gather_rows(perm_i.as_slice());
    let uniques_u = uniques(&sorted).expect("lex_argsort output is sorted");
    let unique_rows = sorted.gather_rows(&uniques_u);

    // f≤[p]: index of the unique row that sorted position p belongs to
    let mut f_sorted = Vec::with_capacity(sorted.nrows());
    let mut seen = 0usize;
    for p in 0..sorted.nrows() {
        if seen < uniques_u.len() && uniques_u[seen] == p {
            seen += 1;
        }
        f_sorted.push(seen - 1);
    }

    // back to input order through i⁻¹
    let mut f = vec![0; sorted.nrows()];
    for (p, &src) in perm_i.as_slice().iter().enumerate() {
        f[src] = f_sorted[p];
    }
    SurjectionMap {
        perm_i,
        uniques_u,
        f,
        unique_rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::is_well_ordered;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    #[test]
    fn search_range_examples() {
        let keys = [1, 1, 2, 5];
        assert_eq!(search_range(&keys, 1), 0..2);
        assert_eq!(search_range(&keys, 3), 3..3);
        assert_eq!(search_range(&keys, 9), 4..4);
        assert_eq!(search_range(&[], 0), 0..0);
    }

    #[test]
    fn intersection_examples() {
        let m = direct_intersection(&[0, 1, 3], &[1, 2, 3]);
        assert_eq!(
            m,
            vec![
                MatchedRange {
                    range_a: 1..2,
                    range_b: 0..1,
                    key: 1
                },
                MatchedRange {
                    range_a: 2..3,
                    range_b: 2..3,
                    key: 3
                },
            ]
        );
        assert!(direct_intersection(&[0, 2, 4], &[1, 3, 5]).is_empty());
        assert!(direct_intersection(&[], &[1]).is_empty());
    }

    #[test]
    fn surjection_example() {
        let f = IndexMatrix::from_column(vec![2, 0, 2]);
        let s = build_surjection(&f);
        assert_eq!(s.perm_i.as_slice(), &[1, 0, 2]);
        assert_eq!(s.uniques_u, vec![0, 1]);
        assert_eq!(s.unique_rows, IndexMatrix::from_column(vec![0, 2]));
        assert_eq!(s.f, vec![1, 0, 1]);
    }

    #[test]
    fn surjection_degenerate_cases() {
        let same = IndexMatrix::from_rows(2, &[[3, 1], [3, 1], [3, 1]]).unwrap();
        let s = build_surjection(&same);
        assert_eq!(s.f, vec![0, 0, 0]);
        assert_eq!(s.num_unique(), 1);

        let distinct = IndexMatrix::from_rows(2, &[[0, 1], [1, 0], [2, 2]]).unwrap();
        let s = build_surjection(&distinct);
        assert_eq!(s.f, vec![0, 1, 2]);

        let empty = build_surjection(&IndexMatrix::empty(2));
        assert!(empty.f.is_empty());
        assert_eq!(empty.num_unique(), 0);

        let zero_width = IndexMatrix::from_flat(4, 0, vec![]).unwrap();
        let s = build_surjection(&zero_width);
        assert_eq!(s.f, vec![0; 4]);
        assert_eq!(s.num_unique(), 1);
    }

    fn sorted_keys() -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0usize..12, 0..40).prop_map(|mut v| {
            v.sort();
            v
        })
    }

    proptest! {
        #[test]
        fn search_range_tiles_positions(keys in sorted_keys()) {
            for key in 0..13 {
                let r = search_range(&keys, key);
                // linear-scan oracle
                let hits: Vec<usize> = (0..keys.len()).filter(|&p| keys[p] == key).collect();
                if hits.is_empty() {
                    prop_assert!(r.is_empty());
                    prop_assert_eq!(r.start, keys.iter().filter(|&&k| k < key).count());
                } else {
                    prop_assert_eq!(r, hits[0]..hits[hits.len() - 1] + 1);
                }
            }
        }

        #[test]
        fn intersection_matches_hash_join(a in sorted_keys(), b in sorted_keys()) {
            let count = |v: &[usize]| {
                let mut m = BTreeMap::new();
                for (p, &k) in v.iter().enumerate() {
                    m.entry(k).or_insert_with(Vec::new).push(p);
                }
                m
            };
            let (ca, cb) = (count(&a), count(&b));
            let expected: Vec<MatchedRange> = ca
                .iter()
                .filter_map(|(k, pa)| cb.get(k).map(|pb| MatchedRange {
                    range_a: pa[0]..pa[pa.len() - 1] + 1,
                    range_b: pb[0]..pb[pb.len() - 1] + 1,
                    key: *k,
                }))
                .collect();
            prop_assert_eq!(direct_intersection(&a, &b), expected);
        }

        #[test]
        fn surjection_contract(
            rows in (0usize..4).prop_flat_map(|w| proptest::collection::vec(proptest::collection::vec(0usize..3, w), 0..30))
        ) {
            let w = rows.first().map_or(0, |r| r.len());
            let x = IndexMatrix::from_rows(w, &rows).unwrap();
            let s = build_surjection(&x);
            let mut seen = vec![false; s.num_unique()];
            for (j, &fj) in s.f.iter().enumerate() {
                prop_assert_eq!(s.unique_rows.row(fj), x.row(j));
                seen[fj] = true;
            }
            prop_assert!(seen.iter().all(|&b| b));
            prop_assert!(is_well_ordered(&s.unique_rows));
            prop_assert!(s.perm_i.then(&s.perm_i.inverse()).is_identity());
        }
    }
}
