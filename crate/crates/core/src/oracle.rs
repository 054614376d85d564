//! Naive dense contraction: the ground truth the kernels are checked
//! against. It only reads the label lists of a plan and walks every label
//! assignment with nested odometers, so it shares no code path with the
//! sparse kernels.

use crate::error::{Error, Result};
use crate::plan::ContractionPlan;
use crate::tensor::DenseTensor;

/// Largest label space (product of all distinct label extents) the oracle
/// will walk.
pub const ORACLE_LIMIT: u128 = 10_000_000;

/// Size of the full label space the oracle would iterate.
pub fn label_space(plan: &ContractionPlan) -> u128 {
    plan.extents().values().map(|&k| k as u128).product()
}

fn strides_for(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Advances a row-major odometer; returns false after the last state.
fn advance(counter: &mut [usize], limits: &[usize]) -> bool {
    for k in (0..counter.len()).rev() {
        counter[k] += 1;
        if counter[k] < limits[k] {
            return true;
        }
        counter[k] = 0;
    }
    false
}

/// `O[out] = Σ A[..]·B[..]` over every assignment of the summed labels.
///
/// Output positions are visited row-major over the output labels; for each
/// one the summed labels (every label not in the output, in sorted label
/// order) are visited row-major and accumulated left to right.
pub fn dense_contract(a: &DenseTensor, b: &DenseTensor, plan: &ContractionPlan) -> Result<DenseTensor> {
    for (labels, t) in [(plan.labels_a(), a), (plan.labels_b(), b)] {
        let expected: Vec<usize> = labels.iter().map(|&c| plan.extent(c).unwrap()).collect();
        if expected != t.shape() {
            return Err(Error::ShapeMismatch {
                left: expected,
                right: t.shape().to_vec(),
            });
        }
    }
    let space = label_space(plan);
    if space > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            size: space,
            limit: ORACLE_LIMIT,
        });
    }

    let out_labels = plan.output_labels().to_vec();
    let sum_labels: Vec<char> = plan
        .extents()
        .keys()
        .copied()
        .filter(|c| !out_labels.contains(c))
        .collect();
    let out_ext: Vec<usize> = out_labels.iter().map(|&c| plan.extent(c).unwrap()).collect();
    let sum_ext: Vec<usize> = sum_labels.iter().map(|&c| plan.extent(c).unwrap()).collect();

    // stride that each output / summed label contributes to an operand offset
    let contribution = |labels: &[char], shape: &[usize], of: &[char]| -> Vec<usize> {
        let strides = strides_for(shape);
        of.iter()
            .map(|c| labels.iter().position(|x| x == c).map_or(0, |p| strides[p]))
            .collect()
    };
    let a_out = contribution(plan.labels_a(), a.shape(), &out_labels);
    let a_sum = contribution(plan.labels_a(), a.shape(), &sum_labels);
    let b_out = contribution(plan.labels_b(), b.shape(), &out_labels);
    let b_sum = contribution(plan.labels_b(), b.shape(), &sum_labels);

    let out_size: usize = out_ext.iter().product();
    let mut values = Vec::with_capacity(out_size);
    let mut oc = vec![0usize; out_ext.len()];
    loop {
        let base_a: usize = oc.iter().zip(&a_out).map(|(i, s)| i * s).sum();
        let base_b: usize = oc.iter().zip(&b_out).map(|(i, s)| i * s).sum();
        let mut acc = 0.0;
        let mut sc = vec![0usize; sum_ext.len()];
        loop {
            let ia = base_a + sc.iter().zip(&a_sum).map(|(i, s)| i * s).sum::<usize>();
            let ib = base_b + sc.iter().zip(&b_sum).map(|(i, s)| i * s).sum::<usize>();
            acc += a.values()[ia] * b.values()[ib];
            if !advance(&mut sc, &sum_ext) {
                break;
            }
        }
        values.push(acc);
        if !advance(&mut oc, &out_ext) {
            break;
        }
    }
    DenseTensor::new(out_ext, values)
}

/// Largest elementwise absolute difference.
pub fn max_abs_diff(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Agreement test used throughout the suites:
/// `max |a - b| <= rel · max(1, max |reference|)`.
pub fn within_tolerance(result: &DenseTensor, reference: &DenseTensor, rel: f64) -> Result<bool> {
    let scale = reference.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(max_abs_diff(result, reference)? <= rel * scale)
}
