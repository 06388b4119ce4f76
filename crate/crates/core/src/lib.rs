//! Sparse (CSR) times dense matrix multiplication.
//!
//! Two parallel kernels over a portable lane-group execution model:
//!
//! * [`spmm_rowsplit`]: one lane group per sparse row, with broadcast-driven
//!   coalesced loads of a row-major `B`. Fast when rows are long.
//! * [`spmm_merge`]: equal nonzeros per block, segmented reduction with
//!   carry-outs and a fix-up pass. Immune to skewed row lengths.
//!
//! [`spmm_auto`] picks between them from the mean row length. Instrumented
//! runs record per-group memory transactions so coalescing and both kinds
//! of load imbalance can be measured (see [`exec`]).

pub mod error;
pub mod exec;
pub mod matrix;
pub mod merge;
pub mod report;
pub mod rowsplit;
pub mod scalar;
pub mod selector;

pub use error::{Result, SpmmError};
pub use exec::{CostCounters, ExecConfig, ExecTrace, Instrument};
pub use matrix::{
    gemm_reference, spmm_reference, CooTriple, CsrMatrix, DenseMatrix, Layout, RngSeed,
};
pub use merge::{partition_spmm, spmm_merge, BlockLimits};
pub use report::{Algorithm, KernelMetrics, KernelOutput, KernelReport};
pub use rowsplit::{spmm_rowsplit, RowSplitParams};
pub use scalar::Scalar;
pub use selector::{choose_algorithm, mean_row_length, spmm_auto, HeuristicConfig};
