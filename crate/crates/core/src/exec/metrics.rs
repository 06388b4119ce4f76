//! Load-balance and coalescing metrics over an [`ExecTrace`].

use crate::error::{Result, SpmmError};
use crate::exec::trace::{AccessKind, AccessStats, ExecTrace};

fn efficiency(stats: AccessStats) -> Result<f64> {
    if stats.segments == 0 {
        return Err(SpmmError::EmptyTrace);
    }
    Ok(stats.ideal_transactions as f64 / stats.segments as f64)
}

fn restat(trace: &ExecTrace, segment_words: usize, kind: Option<AccessKind>) -> Result<AccessStats> {
    if segment_words == trace.segment_words() {
        return Ok(match kind {
            Some(k) => trace.stats(k),
            None => trace.total_stats(),
        });
    }
    if segment_words == 0 {
        return Err(SpmmError::InvalidArgument("segment size must be positive".into()));
    }
    if !trace.has_accesses() {
        return Err(SpmmError::InvalidArgument(format!(
            "a {segment_words}-word segment needs a trace recorded with per-access detail"
        )));
    }
    let mut stats = AccessStats::default();
    for a in trace.accesses().iter().filter(|a| kind.is_none_or(|k| a.kind == k)) {
        stats.accesses += 1;
        stats.active_lanes += a.active_lanes() as u64;
        stats.ideal_transactions += a.ideal_transactions(segment_words) as u64;
        stats.segments += a.distinct_segments(segment_words) as u64;
    }
    Ok(stats)
}

/// Ideal over actual segment transactions across every access, in (0, 1].
pub fn coalescing_efficiency(trace: &ExecTrace, segment_words: usize) -> Result<f64> {
    efficiency(restat(trace, segment_words, None)?)
}

/// [`coalescing_efficiency`] restricted to one access kind, at the trace's
/// native segment size.
pub fn coalescing_efficiency_of(trace: &ExecTrace, kind: AccessKind) -> Result<f64> {
    efficiency(trace.stats(kind))
}

/// Max over mean of a work distribution; 1.0 when perfectly balanced or
/// when there is no work at all.
pub fn imbalance(work: &[usize]) -> Result<f64> {
    if work.is_empty() {
        return Err(SpmmError::InvalidArgument("no lane groups to compare".into()));
    }
    let max = *work.iter().max().expect("non-empty") as f64;
    if max == 0.0 {
        return Ok(1.0);
    }
    let mean = work.iter().sum::<usize>() as f64 / work.len() as f64;
    Ok(max / mean)
}

/// Imbalance across lane groups ("Type 1").
pub fn type1_imbalance(trace: &ExecTrace) -> Result<f64> {
    imbalance(trace.work_per_group())
}

fn utilization(stats: AccessStats, lane_width: usize) -> Result<f64> {
    if stats.accesses == 0 {
        return Err(SpmmError::EmptyTrace);
    }
    Ok(stats.active_lanes as f64 / (stats.accesses as f64 * lane_width as f64))
}

/// Fraction of lane-steps doing useful work ("Type 2" balance, the inverse
/// of divergence).
pub fn type2_utilization(trace: &ExecTrace) -> Result<f64> {
    utilization(trace.total_stats(), trace.lane_width())
}

pub fn type2_utilization_of(trace: &ExecTrace, kind: AccessKind) -> Result<f64> {
    utilization(trace.stats(kind), trace.lane_width())
}
