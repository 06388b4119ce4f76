//! Row-split SpMM: one lane group per sparse row.
//!
//! For each row the group walks the nonzeros in chunks of `lane_width`.
//! Lane `l` loads the chunk's `l`-th `(col, value)` pair; lanes past the end
//! of the row hold the dummy pair `(0, 0)`. The group then runs one
//! broadcast round per lane: in round `j` every lane learns pair `j` and
//! lane `l` multiplies column `l` of the current tile of `B[col]`, so the
//! group reads one contiguous stretch of a row-major `B`. After the row the
//! lanes write their accumulators to `C`. A row of length 33 therefore
//! costs two chunks and 64 rounds, of which 33 do useful work.

use std::time::Instant;

use crate::error::{Result, SpmmError};
use crate::exec::{run_lane_groups, split_regions, AccessKind, ExecConfig, Instrument, MAX_LANES};
use crate::matrix::{CsrMatrix, DenseMatrix, Layout};
use crate::report::{Algorithm, KernelMetrics, KernelOutput, KernelReport};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSplitParams {
    cfg: ExecConfig,
    column_tile: usize,
}

impl Default for RowSplitParams {
    fn default() -> Self {
        RowSplitParams::from_config(ExecConfig::default())
    }
}

impl RowSplitParams {
    /// `column_tile` dense columns per pass, one lane each.
    pub fn new(cfg: ExecConfig, column_tile: usize) -> Result<Self> {
        if column_tile == 0 || column_tile > cfg.lane_width() {
            return Err(SpmmError::InvalidArgument(format!(
                "column tile {column_tile} must be in 1..={}",
                cfg.lane_width()
            )));
        }
        Ok(RowSplitParams { cfg, column_tile })
    }

    /// Tile width equal to the lane width.
    pub fn from_config(cfg: ExecConfig) -> Self {
        RowSplitParams {
            cfg,
            column_tile: cfg.lane_width(),
        }
    }

    pub fn config(&self) -> &ExecConfig {
        &self.cfg
    }

    pub fn column_tile(&self) -> usize {
        self.column_tile
    }
}

/// `C = A * B` with the row-split kernel.
///
/// `B` must be row-major; a column-major `B` is accepted only when
/// instrumented, to measure the uncoalesced access pattern it produces.
/// Padding rounds read `B[0]` with a zero multiplier; they are counted and
/// traced but their zero contribution is not added, so non-finite entries
/// in `B[0]` cannot leak into unrelated rows.
pub fn spmm_rowsplit<S: Scalar>(
    a: &CsrMatrix<S>,
    b: &DenseMatrix<S>,
    params: &RowSplitParams,
    instrument: Instrument,
) -> Result<KernelOutput<S>> {
    if a.num_cols() != b.num_rows() {
        return Err(SpmmError::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.num_rows(),
            a.num_cols(),
            b.num_rows()
        )));
    }
    if b.layout() == Layout::ColMajor && !instrument.enabled() {
        return Err(SpmmError::Layout(
            "row split needs a row-major B outside instrumented runs".into(),
        ));
    }

    let started = Instant::now();
    let (m, k, n) = (a.num_rows(), b.num_rows(), b.num_cols());
    let w = params.cfg.lane_width();
    let tile = params.column_tile;
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    let bdata = b.data();
    let row_major = b.layout() == Layout::RowMajor;

    let mut c = DenseMatrix::zeros(m, n, Layout::RowMajor);
    let regions = split_regions(c.data_mut(), std::iter::repeat_n(n, m));

    let run = run_lane_groups(&params.cfg, instrument, regions, |g, mut out| {
        let row = g.id();
        let (start, end) = (offsets[row], offsets[row + 1]);
        g.add_work(end - start);

        let mut lanes = [(0usize, S::zero()); MAX_LANES];
        let mut acc = [S::zero(); MAX_LANES];
        for t0 in (0..n).step_by(tile) {
            let tw = tile.min(n - t0);
            acc[..tw].fill(S::zero());

            for chunk in (start..end).step_by(w) {
                let active = w.min(end - chunk);
                for (l, lane) in lanes[..w].iter_mut().enumerate() {
                    *lane = if l < active {
                        (cols[chunk + l], vals[chunk + l])
                    } else {
                        (0, S::zero())
                    };
                }
                g.record_contiguous(AccessKind::ReadA, chunk, active);
                g.counters_mut().reads_a += active as u64;

                for j in 0..w {
                    let (col, v) = g.broadcast(&lanes[..w], j)?;
                    g.counters_mut().reads_b += tw as u64;
                    if j >= active {
                        g.record_idle(AccessKind::ReadB);
                        continue;
                    }
                    if row_major {
                        let base = col * n + t0;
                        g.record_contiguous(AccessKind::ReadB, base, tw);
                        for (x, &bv) in acc[..tw].iter_mut().zip(&bdata[base..base + tw]) {
                            *x = *x + v * bv;
                        }
                    } else {
                        g.record_strided(AccessKind::ReadB, t0 * k + col, k, tw);
                        for (l, x) in acc[..tw].iter_mut().enumerate() {
                            *x = *x + v * bdata[(t0 + l) * k + col];
                        }
                    }
                }
            }

            out.slice_mut(row * n + t0, tw)?.copy_from_slice(&acc[..tw]);
            g.record_contiguous(AccessKind::WriteC, row * n + t0, tw);
            g.counters_mut().writes_c += tw as u64;
        }
        Ok(())
    })?;

    let mut report = KernelReport::new(Algorithm::RowSplit, started.elapsed(), a.nnz(), n);
    report.counters = run.counters;
    report.metrics = run.trace.as_ref().map(KernelMetrics::from_trace);
    Ok(KernelOutput {
        c,
        trace: run.trace,
        report,
    })
}
