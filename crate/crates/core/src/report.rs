use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::SpmmError;
use crate::exec::{
    coalescing_efficiency_of, type1_imbalance, type2_utilization, type2_utilization_of, AccessKind, CostCounters,
    ExecTrace,
};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    RowSplit,
    MergeBased,
    /// Sequential oracle.
    Reference,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::RowSplit => "rowsplit",
            Algorithm::MergeBased => "merge",
            Algorithm::Reference => "reference",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = SpmmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rowsplit" | "row-split" | "row_split" => Ok(Algorithm::RowSplit),
            "merge" | "merge-based" | "mergebased" => Ok(Algorithm::MergeBased),
            "reference" | "ref" => Ok(Algorithm::Reference),
            _ => Err(SpmmError::InvalidArgument(format!("unknown algorithm '{s}'"))),
        }
    }
}

/// Metrics derived from an instrumented run. Per-kind values are `None`
/// when the run issued no access of that kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMetrics {
    pub type1: f64,
    pub type2: f64,
    pub type2_read_a: Option<f64>,
    pub type2_read_b: Option<f64>,
    pub coalescing: Option<f64>,
    pub coalescing_read_a: Option<f64>,
    pub coalescing_read_b: Option<f64>,
    pub coalescing_write_c: Option<f64>,
}

impl KernelMetrics {
    pub fn from_trace(trace: &ExecTrace) -> Self {
        let total = trace.total_stats();
        KernelMetrics {
            type1: type1_imbalance(trace).unwrap_or(1.0),
            type2: type2_utilization(trace).unwrap_or(1.0),
            type2_read_a: type2_utilization_of(trace, AccessKind::ReadA).ok(),
            type2_read_b: type2_utilization_of(trace, AccessKind::ReadB).ok(),
            coalescing: (total.segments > 0).then(|| total.ideal_transactions as f64 / total.segments as f64),
            coalescing_read_a: coalescing_efficiency_of(trace, AccessKind::ReadA).ok(),
            coalescing_read_b: coalescing_efficiency_of(trace, AccessKind::ReadB).ok(),
            coalescing_write_c: coalescing_efficiency_of(trace, AccessKind::WriteC).ok(),
        }
    }
}

/// Outcome of one SpMM invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub algorithm: Algorithm,
    /// Seconds.
    pub wall_time: f64,
    pub nnz: usize,
    pub n: usize,
    /// `2 * nnz * n / wall_time / 1e9`; padding work is not counted.
    pub effective_gflops: f64,
    pub metrics: Option<KernelMetrics>,
    pub counters: CostCounters,
}

/// Useful GFlop/s for a product with `nnz` nonzeros and `n` dense columns.
pub fn effective_gflops(nnz: usize, n: usize, seconds: f64) -> f64 {
    if seconds > 0.0 {
        2.0 * nnz as f64 * n as f64 / seconds / 1e9
    } else {
        0.0
    }
}

impl KernelReport {
    pub fn new(algorithm: Algorithm, elapsed: Duration, nnz: usize, n: usize) -> Self {
        let wall_time = elapsed.as_secs_f64();
        KernelReport {
            algorithm,
            wall_time,
            nnz,
            n,
            effective_gflops: effective_gflops(nnz, n, wall_time),
            metrics: None,
            counters: CostCounters::default(),
        }
    }

    /// Replaces the timing (e.g. with a median over repetitions) and keeps
    /// the throughput consistent with it.
    pub fn set_wall_time(&mut self, seconds: f64) {
        self.wall_time = seconds;
        self.effective_gflops = effective_gflops(self.nnz, self.n, seconds);
    }
}

/// Product, optional trace and report of one kernel call.
#[derive(Debug, Clone)]
pub struct KernelOutput<S> {
    pub c: DenseMatrix<S>,
    pub trace: Option<ExecTrace>,
    pub report: KernelReport,
}
