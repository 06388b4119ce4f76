use std::ops::Range;

use crate::error::{Result, SpmmError};
use crate::matrix::{DenseMatrix, Layout};
use crate::merge::partition::BlockLimits;
use crate::scalar::Scalar;

/// Maximal runs of equal ids in a non-decreasing id sequence, as
/// `(row, index range)`.
pub(crate) fn row_segments(row_ids: &[usize]) -> impl Iterator<Item = (usize, Range<usize>)> + '_ {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= row_ids.len() {
            return None;
        }
        let row = row_ids[start];
        let len = row_ids[start..].iter().take_while(|&&r| r == row).count();
        let seg = (row, start..start + len);
        start += len;
        Some(seg)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedReduction<S> {
    /// Rows whose partial is final within this group, ascending.
    pub completed: Vec<(usize, S)>,
    /// The last row's partial, which may continue in the next group.
    /// `None` only for empty input.
    pub carry: Option<(usize, S)>,
}

/// Sums `values` per run of equal `row_ids`. Every run but the last is
/// completed; the last becomes the carry-out.
pub fn segmented_reduce<S: Scalar>(values: &[S], row_ids: &[usize]) -> Result<SegmentedReduction<S>> {
    if values.len() != row_ids.len() {
        return Err(SpmmError::Contract(format!(
            "{} values but {} row ids",
            values.len(),
            row_ids.len()
        )));
    }
    if let Some(i) = row_ids.windows(2).position(|w| w[0] > w[1]) {
        return Err(SpmmError::Contract(format!(
            "row ids decrease between lanes {i} and {}",
            i + 1
        )));
    }
    let mut completed: Vec<(usize, S)> = row_segments(row_ids)
        .map(|(row, range)| (row, values[range].iter().fold(S::zero(), |acc, &v| acc + v)))
        .collect();
    let carry = completed.pop();
    Ok(SegmentedReduction { completed, carry })
}

/// Carry-out partials: for every block, the row it left open and one
/// partial per dense column.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryOut<S> {
    pub(crate) num_cols: usize,
    pub(crate) rows: Vec<Option<usize>>,
    pub(crate) partials: Vec<S>,
}

impl<S: Scalar> CarryOut<S> {
    pub fn new(num_blocks: usize, num_cols: usize) -> Self {
        CarryOut {
            num_cols,
            rows: vec![None; num_blocks],
            partials: vec![S::zero(); num_blocks * num_cols],
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, block: usize) -> Option<usize> {
        self.rows[block]
    }

    pub fn partial(&self, block: usize) -> &[S] {
        &self.partials[block * self.num_cols..(block + 1) * self.num_cols]
    }

    pub fn set(&mut self, block: usize, row: usize, partial: &[S]) {
        assert_eq!(partial.len(), self.num_cols);
        self.rows[block] = Some(row);
        self.partials[block * self.num_cols..(block + 1) * self.num_cols].copy_from_slice(partial);
    }
}

/// Adds every block's carry-out into `c`, in ascending block order.
pub fn fix_carryout<S: Scalar>(c: &mut DenseMatrix<S>, limits: &BlockLimits, carry: &CarryOut<S>) -> Result<()> {
    if c.layout() != Layout::RowMajor {
        return Err(SpmmError::Layout("carry-out fix-up needs a row-major C".into()));
    }
    if carry.num_blocks() != limits.num_blocks() {
        return Err(SpmmError::Contract(format!(
            "{} carry-outs for {} blocks",
            carry.num_blocks(),
            limits.num_blocks()
        )));
    }
    let (m, n) = (c.num_rows(), c.num_cols());
    if carry.num_cols != n {
        return Err(SpmmError::DimensionMismatch(format!(
            "carry-outs hold {} columns, C has {n}",
            carry.num_cols
        )));
    }
    for block in 0..carry.num_blocks() {
        let Some(row) = carry.row(block) else { continue };
        let (first, last) = limits.rows(block);
        if row >= m || row < first || row > last {
            return Err(SpmmError::Contract(format!(
                "block {block} carries into row {row}, outside its rows {first}..={last} of {m}"
            )));
        }
        let target = &mut c.data_mut()[row * n..(row + 1) * n];
        for (x, &p) in target.iter_mut().zip(carry.partial(block)) {
            *x = *x + p;
        }
    }
    Ok(())
}
