//! Synthetic matrices for the aspect-ratio and fixed-density experiments.

use std::ops::Range;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpmmError};
use crate::matrix::csr::CsrMatrix;
use crate::matrix::dense::{DenseMatrix, Layout};
use crate::scalar::Scalar;

/// Seed for the deterministic generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn aspect_value<S: Scalar>(row: usize) -> S {
    S::cast(1.0 + (row % 8) as f64 / 8.0)
}

/// Fully dense `num_rows x (total_nnz / num_rows)` matrix stored as CSR.
///
/// Every entry of row `r` holds the same value `1 + (r mod 8) / 8`, so the
/// output does not depend on any seed.
pub fn gen_aspect_matrix<S: Scalar>(total_nnz: usize, num_rows: usize) -> Result<CsrMatrix<S>> {
    if num_rows == 0 || !total_nnz.is_multiple_of(num_rows) {
        return Err(SpmmError::InvalidArgument(format!(
            "{total_nnz} nonzeros cannot be split evenly over {num_rows} rows"
        )));
    }
    let row_len = total_nnz / num_rows;
    let row_offsets = (0..=num_rows).map(|r| r * row_len).collect();
    let col_indices = (0..num_rows).flat_map(|_| 0..row_len).collect();
    let values = (0..num_rows)
        .flat_map(|r| std::iter::repeat_n(aspect_value::<S>(r), row_len))
        .collect();
    CsrMatrix::from_parts(num_rows, row_len, row_offsets, col_indices, values)
}

/// `rows x cols` matrix where each row holds exactly
/// `round(fill_fraction * cols)` nonzeros at distinct, uniformly sampled
/// columns. Values are uniform in (0, 1].
pub fn gen_uniform_random<S: Scalar>(
    rows: usize,
    cols: usize,
    fill_fraction: f64,
    seed: RngSeed,
) -> Result<CsrMatrix<S>> {
    if !(0.0..=1.0).contains(&fill_fraction) {
        return Err(SpmmError::InvalidArgument(format!(
            "fill fraction {fill_fraction} outside [0, 1]"
        )));
    }
    let per_row = ((fill_fraction * cols as f64).round() as usize).min(cols);
    let mut rng = seed.rng();
    let mut row_offsets = Vec::with_capacity(rows + 1);
    let mut col_indices = Vec::with_capacity(rows * per_row);
    let mut values = Vec::with_capacity(rows * per_row);
    row_offsets.push(0);
    for _ in 0..rows {
        let mut picked = index::sample(&mut rng, cols, per_row).into_vec();
        picked.sort_unstable();
        col_indices.extend_from_slice(&picked);
        for _ in 0..per_row {
            // gen() is in [0, 1); flip it into (0, 1].
            values.push(S::cast(1.0 - rng.gen::<f64>()));
        }
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::from_parts(rows, cols, row_offsets, col_indices, values)
}

/// Dense operand with entries uniform in `[-1, 1)`.
pub fn random_dense<S: Scalar>(rows: usize, cols: usize, layout: Layout, seed: RngSeed) -> DenseMatrix<S> {
    random_dense_in(rows, cols, layout, -1.0..1.0, seed)
}

/// Dense operand with entries uniform in `range`.
pub fn random_dense_in<S: Scalar>(
    rows: usize,
    cols: usize,
    layout: Layout,
    range: Range<f64>,
    seed: RngSeed,
) -> DenseMatrix<S> {
    let mut rng = seed.rng();
    let data = (0..rows * cols)
        .map(|_| S::cast(rng.gen_range(range.clone())))
        .collect();
    DenseMatrix::from_vec(rows, cols, layout, data).expect("length matches shape")
}
