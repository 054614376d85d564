use ftt_core::randgen::{random_dense, random_sparse};
use ftt_core::{AxisGroup, DenseTensor, SparseTensor};
use proptest::prelude::*;

fn flat(coord: &[usize], shape: &[usize]) -> usize {
    coord.iter().zip(shape).fold(0, |acc, (&i, &k)| acc * k + i)
}

fn unflat(mut key: usize, shape: &[usize]) -> Vec<usize> {
    let mut coord = vec![0; shape.len()];
    for (slot, &k) in coord.iter_mut().zip(shape).rev() {
        *slot = key % k;
        key /= k;
    }
    coord
}

/// Transpose by visiting every source coordinate.
fn transpose(d: &DenseTensor, perm: &[usize]) -> Vec<f64> {
    let shape: Vec<usize> = perm.iter().map(|&p| d.shape()[p]).collect();
    let mut out = vec![0.0; d.len()];
    for (key, &v) in d.values().iter().enumerate() {
        let src = unflat(key, d.shape());
        let dst: Vec<usize> = perm.iter().map(|&p| src[p]).collect();
        out[flat(&dst, &shape)] = v;
    }
    out
}

fn tensor_strategy() -> impl Strategy<Value = (Vec<usize>, usize, u64)> {
    prop::collection::vec(1usize..5, 1..5).prop_flat_map(|shape| {
        let size: usize = shape.iter().product();
        (Just(shape), 0..=size, any::<u64>())
    })
}

fn perm_strategy(rank: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..rank).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn dense_round_trip_is_exact((shape, nnz, seed) in tensor_strategy()) {
        let t = random_sparse(&shape, nnz, seed).unwrap();
        let back = SparseTensor::from_dense(&t.to_dense().unwrap(), 0.0);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn permute_matches_dense_transpose(((shape, nnz, seed), perm) in tensor_strategy()
        .prop_flat_map(|s| { let r = s.0.len(); (Just(s), perm_strategy(r)) }))
    {
        let t = random_sparse(&shape, nnz, seed).unwrap();
        let p = t.permute_axes(&perm).unwrap();
        let expected = transpose(&t.to_dense().unwrap(), &perm);
        prop_assert_eq!(p.to_dense().unwrap().into_values(), expected.clone());
        let dense = t.to_dense().unwrap().permute_axes(&perm).unwrap();
        prop_assert_eq!(dense.values(), expected.as_slice());

        let mut inverse = vec![0; perm.len()];
        for (k, &q) in perm.iter().enumerate() {
            inverse[q] = k;
        }
        let back = p.permute_axes(&inverse).unwrap();
        prop_assert_eq!(back.shape(), t.shape());
        prop_assert_eq!(ftt_core::canonicalize(&back), t);
    }

    #[test]
    fn flatten_matches_transpose_then_reshape(((shape, nnz, seed), perm, cut) in tensor_strategy()
        .prop_flat_map(|s| { let r = s.0.len(); (Just(s), perm_strategy(r), 0..=r) }))
    {
        let t = random_sparse(&shape, nnz, seed).unwrap();
        let rank = shape.len();
        let groups: Vec<AxisGroup> = [&perm[..cut], &perm[cut..]]
            .iter()
            .filter(|g| !g.is_empty())
            .map(|g| AxisGroup::new(g.to_vec(), rank).unwrap())
            .collect();
        let f = t.flatten_groups(&groups).unwrap();
        for row in f.indices().rows() {
            for (i, k) in row.iter().zip(f.shape()) {
                prop_assert!(i < k);
            }
        }
        let expected = transpose(&t.to_dense().unwrap(), &perm);
        prop_assert_eq!(f.to_dense().unwrap().into_values(), expected);
        let in_order = perm.iter().enumerate().all(|(k, &p)| k == p);
        prop_assert_eq!(f.is_canonical(), in_order);
    }

    #[test]
    fn from_dense_threshold(shape in prop::collection::vec(1usize..4, 1..4), seed in any::<u64>(), tol in 0.0f64..1.0) {
        let d = random_dense(&shape, seed).unwrap();
        let s = SparseTensor::from_dense(&d, tol);
        prop_assert!(s.is_canonical());
        let kept = d.values().iter().filter(|v| v.abs() > tol).count();
        prop_assert_eq!(s.nnz(), kept);
        for (row, v) in s.indices().rows().zip(s.data()) {
            prop_assert_eq!(d.values()[flat(row, &shape)], *v);
        }
    }
}
