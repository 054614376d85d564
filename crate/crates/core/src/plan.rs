//! Einstein-summation subscripts and the per-operand column partition.
//!
//! Each operand's axes fall into exactly one of three groups:
//!
//! * **external**: the label survives into the output;
//! * **overlap**: the label is shared with the other operand and summed
//!   (one contraction edge per such label);
//! * **reduced**: the label appears only in this operand and not in the
//!   output, so it is summed away without pairing.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::AxisGroup;

/// Parsed `lhs,rhs->out` subscripts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subscripts {
    pub a: Vec<char>,
    pub b: Vec<char>,
    pub output: Vec<char>,
}

impl fmt::Display for Subscripts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: &[char]| v.iter().collect::<String>();
        write!(f, "{},{}->{}", s(&self.a), s(&self.b), s(&self.output))
    }
}

impl Subscripts {
    /// Same contraction with the operands exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            output: self.output.clone(),
        }
    }
}

fn labels(part: &str, whole: &str) -> Result<Vec<char>> {
    if !part.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(Error::MalformedSubscripts(whole.to_string()));
    }
    Ok(part.chars().collect())
}

fn reject_repeats(labels: &[char], err: fn(char) -> Error) -> Result<()> {
    for (k, &c) in labels.iter().enumerate() {
        if labels[..k].contains(&c) {
            return Err(err(c));
        }
    }
    Ok(())
}

/// Parses `[A-Za-z]+,[A-Za-z]+->[A-Za-z]*`. An empty output is a full trace.
pub fn parse_subscripts(spec: &str) -> Result<Subscripts> {
    let malformed = || Error::MalformedSubscripts(spec.to_string());
    let (inputs, output) = spec.split_once("->").ok_or_else(malformed)?;
    let (a, b) = inputs.split_once(',').ok_or_else(malformed)?;
    if a.is_empty() || b.is_empty() {
        return Err(malformed());
    }
    let (a, b, output) = (labels(a, spec)?, labels(b, spec)?, labels(output, spec)?);
    reject_repeats(&a, Error::RepeatedLabel)?;
    reject_repeats(&b, Error::RepeatedLabel)?;
    reject_repeats(&output, Error::RepeatedOutputLabel)?;
    if let Some(&c) = output.iter().find(|c| !a.contains(c) && !b.contains(c)) {
        return Err(Error::OrphanOutputLabel(c));
    }
    Ok(Subscripts { a, b, output })
}

/// Column partition of both operands for one pairwise contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPlan {
    subscripts: Subscripts,
    external_a: AxisGroup,
    external_b: AxisGroup,
    reduced_a: AxisGroup,
    reduced_b: AxisGroup,
    overlaps: Vec<(usize, usize)>,
    extents: BTreeMap<char, usize>,
    output_perm: Vec<usize>,
}

impl ContractionPlan {
    /// Parses `spec` and plans it against the operand shapes.
    pub fn new(spec: &str, shape_a: &[usize], shape_b: &[usize]) -> Result<Self> {
        build_plan(&parse_subscripts(spec)?, shape_a, shape_b)
    }

    pub fn subscripts(&self) -> &Subscripts {
        &self.subscripts
    }

    pub fn labels_a(&self) -> &[char] {
        &self.subscripts.a
    }

    pub fn labels_b(&self) -> &[char] {
        &self.subscripts.b
    }

    pub fn output_labels(&self) -> &[char] {
        &self.subscripts.output
    }

    pub fn external_a(&self) -> &AxisGroup {
        &self.external_a
    }

    pub fn external_b(&self) -> &AxisGroup {
        &self.external_b
    }

    pub fn reduced_a(&self) -> &AxisGroup {
        &self.reduced_a
    }

    pub fn reduced_b(&self) -> &AxisGroup {
        &self.reduced_b
    }

    /// `(column in a, column in b)` for each contracted label, ordered by
    /// first appearance in operand a.
    pub fn overlaps(&self) -> &[(usize, usize)] {
        &self.overlaps
    }

    pub fn overlap_columns_a(&self) -> Vec<usize> {
        self.overlaps.iter().map(|o| o.0).collect()
    }

    pub fn overlap_columns_b(&self) -> Vec<usize> {
        self.overlaps.iter().map(|o| o.1).collect()
    }

    pub fn overlap_labels(&self) -> Vec<char> {
        self.overlaps.iter().map(|o| self.subscripts.a[o.0]).collect()
    }

    pub fn overlap_extents(&self) -> Vec<usize> {
        self.overlap_labels().iter().map(|c| self.extents[c]).collect()
    }

    pub fn extents(&self) -> &BTreeMap<char, usize> {
        &self.extents
    }

    pub fn extent(&self, label: char) -> Option<usize> {
        self.extents.get(&label).copied()
    }

    pub fn shape_a(&self) -> Vec<usize> {
        self.subscripts.a.iter().map(|c| self.extents[c]).collect()
    }

    pub fn shape_b(&self) -> Vec<usize> {
        self.subscripts.b.iter().map(|c| self.extents[c]).collect()
    }

    /// Result shape in output label order.
    pub fn output_shape(&self) -> Vec<usize> {
        self.subscripts.output.iter().map(|c| self.extents[c]).collect()
    }

    /// Labels of `external_a ‖ external_b`, the order kernels produce.
    pub fn concat_labels(&self) -> Vec<char> {
        let a = self.external_a.columns().iter().map(|&c| self.subscripts.a[c]);
        let b = self.external_b.columns().iter().map(|&c| self.subscripts.b[c]);
        a.chain(b).collect()
    }

    /// Axis permutation taking the concatenated external order to the
    /// output order (output axis `k` = concatenated axis `perm[k]`).
    pub fn output_perm(&self) -> &[usize] {
        &self.output_perm
    }

    /// Upper bound on result entries: product of all output extents.
    pub fn external_space(&self) -> u128 {
        self.output_shape().iter().map(|&k| k as u128).product()
    }

    /// Same contraction with the operands exchanged.
    pub fn swapped(&self) -> Self {
        build_plan(&self.subscripts.swapped(), &self.shape_b(), &self.shape_a())
            .expect("swapping a valid plan keeps it valid")
    }

    /// Checks operand shapes against the planned extents.
    pub fn check_shapes(&self, shape_a: &[usize], shape_b: &[usize]) -> Result<()> {
        for (labels, shape) in [(&self.subscripts.a, shape_a), (&self.subscripts.b, shape_b)] {
            if labels.len() != shape.len() {
                return Err(Error::OperandRankMismatch {
                    expected: labels.len(),
                    got: shape.len(),
                });
            }
            for (&c, &k) in labels.iter().zip(shape) {
                let planned = self.extents[&c];
                if planned != k {
                    return Err(Error::ExtentMismatch {
                        label: c,
                        left: planned,
                        right: k,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Intersects labels and partitions each operand's columns.
pub fn build_plan(subscripts: &Subscripts, shape_a: &[usize], shape_b: &[usize]) -> Result<ContractionPlan> {
    let Subscripts { a, b, output } = subscripts;
    let mut extents = BTreeMap::new();
    for (labels, shape) in [(a, shape_a), (b, shape_b)] {
        if labels.len() != shape.len() {
            return Err(Error::OperandRankMismatch {
                expected: labels.len(),
                got: shape.len(),
            });
        }
        for (axis, (&c, &k)) in labels.iter().zip(shape).enumerate() {
            if k == 0 {
                return Err(Error::ZeroExtent { axis });
            }
            if let Some(&prev) = extents.get(&c) {
                if prev != k {
                    return Err(Error::ExtentMismatch {
                        label: c,
                        left: prev,
                        right: k,
                    });
                }
            }
            extents.insert(c, k);
        }
    }

    let mut overlaps = Vec::new();
    let (mut ext_a, mut red_a) = (Vec::new(), Vec::new());
    for (i, c) in a.iter().enumerate() {
        let in_out = output.contains(c);
        match b.iter().position(|x| x == c) {
            Some(_) if in_out => return Err(Error::BatchLabel(*c)),
            Some(j) => overlaps.push((i, j)),
            None if in_out => ext_a.push(i),
            None => red_a.push(i),
        }
    }
    let (mut ext_b, mut red_b) = (Vec::new(), Vec::new());
    for (j, c) in b.iter().enumerate() {
        if a.contains(c) {
            continue;
        }
        if output.contains(c) {
            ext_b.push(j);
        } else {
            red_b.push(j);
        }
    }

    let concat: Vec<char> = ext_a.iter().map(|&i| a[i]).chain(ext_b.iter().map(|&j| b[j])).collect();
    let output_perm = output
        .iter()
        .map(|c| concat.iter().position(|x| x == c).expect("output labels are external"))
        .collect();

    Ok(ContractionPlan {
        subscripts: subscripts.clone(),
        external_a: AxisGroup::new(ext_a, a.len())?,
        external_b: AxisGroup::new(ext_b, b.len())?,
        reduced_a: AxisGroup::new(red_a, a.len())?,
        reduced_b: AxisGroup::new(red_b, b.len())?,
        overlaps,
        extents,
        output_perm,
    })
}
