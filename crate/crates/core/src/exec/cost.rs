use std::ops::AddAssign;

use crate::error::{Result, SpmmError};
use crate::exec::config::ExecConfig;
use crate::matrix::CsrMatrix;
use crate::report::Algorithm;

/// Memory-traffic and collective counters for one kernel invocation.
///
/// Measured counters come from [`crate::exec::run_lane_groups`]; predicted
/// ones from [`predict_overhead`], which fills only the two overhead fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostCounters {
    /// `(col_ind, value)` pairs loaded from A.
    pub reads_a: u64,
    /// Words of B loaded, padding rounds included.
    pub reads_b: u64,
    pub writes_c: u64,
    pub broadcast_rounds: u64,
    /// Extra accesses spent locating each block's starting row.
    pub partition_overhead_accesses: u64,
    /// Carry-out words written by blocks and read back by the fix-up.
    pub carryout_accesses: u64,
    /// Row offsets read from A directly because a block spanned more rows
    /// than its staging scratch holds.
    pub scratch_fallback_reads: u64,
}

impl AddAssign for CostCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.reads_a += rhs.reads_a;
        self.reads_b += rhs.reads_b;
        self.writes_c += rhs.writes_c;
        self.broadcast_rounds += rhs.broadcast_rounds;
        self.partition_overhead_accesses += rhs.partition_overhead_accesses;
        self.carryout_accesses += rhs.carryout_accesses;
        self.scratch_fallback_reads += rhs.scratch_fallback_reads;
    }
}

/// Extra memory accesses of an algorithm relative to row split, for a
/// product with `n` dense columns.
///
/// Merge-based SpMM pays `ceil(nnz / (B*T))` accesses for the partition
/// (one per block) and `n` carry-out words per block. `n = 1` with `T = 7`
/// gives the SpMV figure.
pub fn predict_overhead<S>(a: &CsrMatrix<S>, n: usize, cfg: &ExecConfig, algo: Algorithm) -> Result<CostCounters> {
    match algo {
        Algorithm::RowSplit => Ok(CostCounters::default()),
        Algorithm::MergeBased => {
            let blocks = a.nnz().div_ceil(cfg.items_per_block()) as u64;
            Ok(CostCounters {
                partition_overhead_accesses: blocks,
                carryout_accesses: n as u64 * blocks,
                ..CostCounters::default()
            })
        }
        other => Err(SpmmError::InvalidArgument(format!(
            "no cost model for algorithm '{other}'"
        ))),
    }
}

/// Static per-lane register estimate: one accumulator and one gathered B
/// value per column lane, times `T` for merge.
pub fn register_usage(algo: Algorithm, cfg: &ExecConfig) -> Result<usize> {
    match algo {
        Algorithm::RowSplit => Ok(2 * cfg.lane_width()),
        Algorithm::MergeBased => Ok(2 * cfg.lane_width() * cfg.work_per_thread()),
        other => Err(SpmmError::InvalidArgument(format!(
            "no register model for algorithm '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::gen_aspect_matrix;

    fn with_nnz(nnz: usize) -> CsrMatrix<f32> {
        gen_aspect_matrix(nnz, 1).unwrap()
    }

    #[test]
    fn row_split_has_no_overhead() {
        let cfg = ExecConfig::default();
        for nnz in [1, 1000, 4096] {
            let c = predict_overhead(&with_nnz(nnz), 64, &cfg, Algorithm::RowSplit).unwrap();
            assert_eq!(c, CostCounters::default());
        }
    }

    #[test]
    fn spmv_partition_overhead() {
        let cfg = ExecConfig::new(32, 4, 7).unwrap();
        let c = predict_overhead(&with_nnz(896), 1, &cfg, Algorithm::MergeBased).unwrap();
        assert_eq!(c.partition_overhead_accesses, 1);
    }

    #[test]
    fn spmm_carryout_overhead() {
        let c = predict_overhead(&with_nnz(1280), 32, &ExecConfig::default(), Algorithm::MergeBased).unwrap();
        assert_eq!(c.carryout_accesses, 320);
        assert_eq!(c.partition_overhead_accesses, 10);
    }

    #[test]
    fn merge_overhead_is_linear() {
        let cfg = ExecConfig::default();
        let a = with_nnz(128 * 6);
        let base = predict_overhead(&a, 8, &cfg, Algorithm::MergeBased).unwrap().carryout_accesses;
        for scale in [2u64, 3, 5] {
            let c = predict_overhead(&a, 8 * scale as usize, &cfg, Algorithm::MergeBased).unwrap();
            assert_eq!(c.carryout_accesses, base * scale);
            let c = predict_overhead(&with_nnz(128 * 6 * scale as usize), 8, &cfg, Algorithm::MergeBased).unwrap();
            assert_eq!(c.carryout_accesses, base * scale);
        }
    }

    #[test]
    fn reference_has_no_model() {
        assert!(predict_overhead(&with_nnz(4), 4, &ExecConfig::default(), Algorithm::Reference).is_err());
        assert_eq!(register_usage(Algorithm::RowSplit, &ExecConfig::default()).unwrap(), 64);
        assert_eq!(register_usage(Algorithm::MergeBased, &ExecConfig::default()).unwrap(), 64);
    }
}
