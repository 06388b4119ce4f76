use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Result, SpmmError};
use crate::matrix::csr::validate_offsets;

/// Starting row of every block of an equal-nonzeros split.
///
/// Block `i` owns nonzeros `i*G .. min((i+1)*G, nnz)` and starts at row
/// `limits[i]`; `limits[num_blocks] = num_rows`. An empty matrix still has
/// one (empty) block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLimits {
    limits: Vec<usize>,
    items_per_block: usize,
    nnz: usize,
}

impl BlockLimits {
    pub fn limits(&self) -> &[usize] {
        &self.limits
    }

    pub fn num_blocks(&self) -> usize {
        self.limits.len() - 1
    }

    pub fn items_per_block(&self) -> usize {
        self.items_per_block
    }

    /// Nonzero index range owned by `block`.
    pub fn nonzeros(&self, block: usize) -> Range<usize> {
        let start = (block * self.items_per_block).min(self.nnz);
        start..((block + 1) * self.items_per_block).min(self.nnz)
    }

    /// First and one-past-the-staged rows of `block`: `limits[block]` and
    /// `limits[block + 1]`.
    pub fn rows(&self, block: usize) -> (usize, usize) {
        (self.limits[block], self.limits[block + 1])
    }
}

/// Splits the nonzeros into blocks of `items_per_block` and binary-searches
/// the row offsets for each block's starting row: the largest `r` with
/// `row_offsets[r] <= i * items_per_block`, so runs of empty rows at a
/// boundary are skipped. `limits[0]` is always 0.
pub fn partition_spmm(row_offsets: &[usize], nnz: usize, items_per_block: usize) -> Result<BlockLimits> {
    if items_per_block == 0 {
        return Err(SpmmError::InvalidArgument("items per block must be at least 1".into()));
    }
    if row_offsets.is_empty() {
        return Err(SpmmError::InvalidCsr("row_offsets is empty".into()));
    }
    let num_rows = row_offsets.len() - 1;
    validate_offsets(row_offsets, num_rows, nnz)?;

    let num_blocks = nnz.div_ceil(items_per_block).max(1);
    let mut limits = Vec::with_capacity(num_blocks + 1);
    limits.push(0);
    let interior: Vec<usize> = (1..num_blocks)
        .into_par_iter()
        .map(|i| {
            let target = i * items_per_block;
            row_offsets.partition_point(|&o| o <= target) - 1
        })
        .collect();
    limits.extend(interior);
    limits.push(num_rows);

    Ok(BlockLimits {
        limits,
        items_per_block,
        nnz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Walks the rows once; independent of the binary search.
    fn linear_scan(row_offsets: &[usize], nnz: usize, g: usize) -> Vec<usize> {
        let m = row_offsets.len() - 1;
        let blocks = nnz.div_ceil(g).max(1);
        let mut limits = vec![0];
        let mut r = 0;
        for i in 1..blocks {
            let target = i * g;
            while r < m && row_offsets[r + 1] <= target {
                r += 1;
            }
            limits.push(r);
        }
        limits.push(m);
        limits
    }

    #[test]
    fn small_example() {
        let p = partition_spmm(&[0, 2, 2, 5, 6], 6, 3).unwrap();
        assert_eq!(p.limits(), &[0, 2, 4]);
        assert_eq!(linear_scan(&[0, 2, 2, 5, 6], 6, 3), vec![0, 2, 4]);
        assert_eq!(p.nonzeros(1), 3..6);
    }

    #[test]
    fn one_block_when_g_covers_everything() {
        let p = partition_spmm(&[0, 2, 2, 5, 6], 6, 6).unwrap();
        assert_eq!(p.limits(), &[0, 4]);
        let p = partition_spmm(&[0, 0, 0], 0, 128).unwrap();
        assert_eq!(p.limits(), &[0, 2]);
        assert_eq!(p.nonzeros(0), 0..0);
    }

    #[test]
    fn many_empty_rows_before_last() {
        let m = 1000;
        let mut offsets = vec![0; m];
        offsets.push(300);
        let p = partition_spmm(&offsets, 300, 32).unwrap();
        assert_eq!(p.num_blocks(), 10);
        assert!(p.limits()[1..10].iter().all(|&r| r == m - 1));
        assert_eq!(p.limits()[10], m);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(partition_spmm(&[0, 1], 1, 0).is_err());
        assert!(partition_spmm(&[0, 2, 1], 1, 4).is_err());
        assert!(partition_spmm(&[], 0, 4).is_err());
    }

    fn offsets_strategy() -> impl Strategy<Value = Vec<usize>> {
        // Row lengths with a heavy share of empty rows.
        prop::collection::vec(prop_oneof![3 => Just(0usize), 2 => 1usize..5, 1 => 5usize..200], 0..300).prop_map(
            |lens| {
                let mut offs = vec![0];
                for l in lens {
                    offs.push(offs.last().unwrap() + l);
                }
                offs
            },
        )
    }

    proptest! {
        #[test]
        fn matches_linear_scan(offsets in offsets_strategy(), g in 1usize..300) {
            let nnz = *offsets.last().unwrap();
            let p = partition_spmm(&offsets, nnz, g).unwrap();
            prop_assert_eq!(p.limits(), &linear_scan(&offsets, nnz, g)[..]);
        }
    }
}
