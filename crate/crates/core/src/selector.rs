//! Constant-time choice between the two kernels from the mean row length.

use crate::error::{Result, SpmmError};
use crate::exec::{ExecConfig, Instrument};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::merge::spmm_merge;
use crate::report::{Algorithm, KernelOutput};
use crate::rowsplit::{spmm_rowsplit, RowSplitParams};
use crate::scalar::Scalar;

/// Mean row length below which the merge-based kernel is chosen.
pub const DEFAULT_THRESHOLD: f64 = 9.35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicConfig {
    threshold: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl HeuristicConfig {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(SpmmError::InvalidArgument(format!(
                "threshold {threshold} must be positive and finite"
            )));
        }
        Ok(HeuristicConfig { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// `d = nnz / num_rows`.
pub fn mean_row_length<S>(a: &CsrMatrix<S>) -> Result<f64> {
    if a.num_rows() == 0 {
        return Err(SpmmError::InvalidArgument(
            "mean row length of a matrix without rows".into(),
        ));
    }
    Ok(a.nnz() as f64 / a.num_rows() as f64)
}

/// Merge-based for `d < threshold`, row split otherwise.
pub fn choose_algorithm(d: f64, cfg: &HeuristicConfig) -> Algorithm {
    if d < cfg.threshold {
        Algorithm::MergeBased
    } else {
        Algorithm::RowSplit
    }
}

/// Runs whichever kernel [`choose_algorithm`] names; the report's
/// `algorithm` field records the choice. A matrix without rows counts as
/// `d = 0`.
pub fn spmm_auto<S: Scalar>(
    a: &CsrMatrix<S>,
    b: &DenseMatrix<S>,
    heuristic: &HeuristicConfig,
    cfg: &ExecConfig,
    instrument: Instrument,
) -> Result<KernelOutput<S>> {
    let d = if a.num_rows() == 0 { 0.0 } else { mean_row_length(a)? };
    match choose_algorithm(d, heuristic) {
        Algorithm::MergeBased => spmm_merge(a, b, cfg, instrument),
        _ => spmm_rowsplit(a, b, &RowSplitParams::from_config(*cfg), instrument),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_aspect_matrix, random_dense, Layout, RngSeed};
    use proptest::prelude::*;

    #[test]
    fn mean_row_lengths() {
        assert_eq!(mean_row_length(&CsrMatrix::<f32>::identity(100)).unwrap(), 1.0);
        // 625 nonzeros over 10 rows, 792 over 100
        let with_lengths = |lens: &[usize]| {
            let mut triples = Vec::new();
            for (r, &len) in lens.iter().enumerate() {
                triples.extend((0..len).map(|c| crate::matrix::CooTriple::new(r, c, 1.0f32)));
            }
            CsrMatrix::from_triples(lens.len(), 100, &triples).unwrap()
        };
        let long: Vec<usize> = (0..10).map(|r| if r % 2 == 0 { 62 } else { 63 }).collect();
        assert_eq!(mean_row_length(&with_lengths(&long)).unwrap(), 62.5);
        let short: Vec<usize> = (0..100).map(|r| if r < 92 { 8 } else { 7 }).collect();
        assert!((mean_row_length(&with_lengths(&short)).unwrap() - 7.92).abs() < 1e-12);
        assert!(mean_row_length(&CsrMatrix::<f32>::identity(0)).is_err());
    }

    #[test]
    fn threshold_boundary() {
        let cfg = HeuristicConfig::default();
        assert_eq!(choose_algorithm(7.92, &cfg), Algorithm::MergeBased);
        assert_eq!(choose_algorithm(62.5, &cfg), Algorithm::RowSplit);
        assert_eq!(choose_algorithm(9.35, &cfg), Algorithm::RowSplit);
        assert_eq!(choose_algorithm(9.349, &cfg), Algorithm::MergeBased);
        assert_eq!(choose_algorithm(0.0, &cfg), Algorithm::MergeBased);
        assert!(HeuristicConfig::new(0.0).is_err());
        assert!(HeuristicConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn auto_dispatch() {
        let cfg = ExecConfig::default();
        let h = HeuristicConfig::default();
        let b = random_dense::<f32>(4, 8, Layout::RowMajor, RngSeed(1));
        let out = spmm_auto(&CsrMatrix::identity(4), &b, &h, &cfg, Instrument::Off).unwrap();
        assert_eq!(out.report.algorithm, Algorithm::MergeBased);
        assert_eq!(out.c, b);

        let a = gen_aspect_matrix::<f32>(1 << 16, 64).unwrap();
        let b = random_dense::<f32>(1024, 4, Layout::RowMajor, RngSeed(2));
        let out = spmm_auto(&a, &b, &h, &cfg, Instrument::Off).unwrap();
        assert_eq!(out.report.algorithm, Algorithm::RowSplit);

        let empty = CsrMatrix::<f32>::from_triples(3, 4, &[]).unwrap();
        let b = random_dense::<f32>(4, 2, Layout::RowMajor, RngSeed(3));
        let out = spmm_auto(&empty, &b, &h, &cfg, Instrument::Off).unwrap();
        assert_eq!(out.report.algorithm, Algorithm::MergeBased);
        assert!(out.c.data().iter().all(|&x| x == 0.0));
    }

    proptest! {
        #[test]
        fn choice_is_monotone(d1 in 0.0f64..100.0, d2 in 0.0f64..100.0, t in 0.1f64..50.0) {
            let cfg = HeuristicConfig::new(t).unwrap();
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(!(choose_algorithm(lo, &cfg) == Algorithm::RowSplit
                && choose_algorithm(hi, &cfg) == Algorithm::MergeBased));
        }
    }
}
