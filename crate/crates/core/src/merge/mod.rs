//! Merge-based SpMM.
//!
//! Two phases. The partition assigns exactly `G = block_size * T` nonzeros
//! to every block (the last may hold fewer) and binary-searches the row
//! offsets for each block's first row. Each block then, per tile of
//! `lane_width` dense columns:
//!
//! 1. stages its slice of the row offsets in block-local scratch,
//! 2. loads one `(col, value)` pair per lane, `lane_width` nonzeros at a
//!    time, zero-filling lanes past the block's end,
//! 3. runs `lane_width` broadcast rounds so that the group reads whole
//!    tiles of `B` rows and forms the products `B[col][tile] * value`,
//! 4. flattens the staged offsets into one row id per nonzero,
//! 5. segment-reduces the products by row id, writing rows that end inside
//!    the block straight to `C` and keeping the last row as a carry-out.
//!
//! After all blocks finish, [`fix_carryout`] adds the carry-outs into `C` in
//! block order.

mod partition;
mod reduce;

use std::time::Instant;

pub use partition::{partition_spmm, BlockLimits};
pub use reduce::{fix_carryout, segmented_reduce, CarryOut, SegmentedReduction};

use crate::error::{Result, SpmmError};
use crate::exec::{run_lane_groups, split_regions, AccessKind, ExecConfig, Instrument, MAX_LANES};
use crate::matrix::{CsrMatrix, DenseMatrix, Layout};
use crate::report::{Algorithm, KernelMetrics, KernelOutput, KernelReport};
use crate::scalar::Scalar;
use reduce::row_segments;

/// `C = A * B` with the merge-based kernel. `B` must be row-major.
pub fn spmm_merge<S: Scalar>(
    a: &CsrMatrix<S>,
    b: &DenseMatrix<S>,
    cfg: &ExecConfig,
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
    if b.layout() != Layout::RowMajor {
        return Err(SpmmError::Layout("merge-based SpMM needs a row-major B".into()));
    }

    let started = Instant::now();
    let (m, n) = (a.num_rows(), b.num_cols());
    let w = cfg.lane_width();
    let tile = w;
    let g_items = cfg.items_per_block();
    let scratch_capacity = g_items + 1;
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    let bdata = b.data();

    let limits = partition_spmm(offsets, a.nnz(), g_items)?;
    let num_blocks = limits.num_blocks();

    let mut c = DenseMatrix::zeros(m, n, Layout::RowMajor);
    let mut carry = CarryOut::new(num_blocks, n);
    {
        // Block i may only complete rows in [limits[i], limits[i+1]).
        let row_spans = limits.limits().windows(2).map(|lr| (lr[1] - lr[0]) * n);
        let regions = split_regions(c.data_mut(), row_spans);
        let carry_slots = split_regions(&mut carry.partials, std::iter::repeat_n(n, num_blocks));
        let outputs: Vec<_> = regions
            .into_iter()
            .zip(carry_slots)
            .zip(carry.rows.iter_mut())
            .collect();

        let run = run_lane_groups(cfg, instrument, outputs, |g, ((mut out, mut carry_slot), carry_row)| {
            let block = g.id();
            let span = limits.nonzeros(block);
            let (first_row, last_row) = limits.rows(block);
            g.add_work(span.len());
            g.counters_mut().partition_overhead_accesses += 1;
            if span.is_empty() {
                return Ok(());
            }

            // Stage row offsets; blocks spanning too many (empty) rows read
            // them from A instead.
            let staged_len = last_row - first_row + 1;
            let staged = staged_len <= scratch_capacity;
            let scratch: Vec<usize> = if staged {
                offsets[first_row..=last_row].to_vec()
            } else {
                Vec::new()
            };

            let mut row_ids = Vec::with_capacity(span.len());
            let mut r = first_row;
            let mut direct_reads = 0u64;
            for p in span.clone() {
                while r < last_row {
                    let next = if staged {
                        scratch[r + 1 - first_row]
                    } else {
                        direct_reads += 1;
                        offsets[r + 1]
                    };
                    if next > p {
                        break;
                    }
                    r += 1;
                }
                row_ids.push(r);
            }
            g.counters_mut().scratch_fallback_reads += direct_reads;

            let mut lanes = [(0usize, S::zero()); MAX_LANES];
            let mut products = vec![S::zero(); span.len() * tile.min(n)];
            let mut partial = [S::zero(); MAX_LANES];
            for t0 in (0..n).step_by(tile) {
                let tw = tile.min(n - t0);

                for chunk in span.clone().step_by(w) {
                    let active = w.min(span.end - chunk);
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
                        let base = col * n + t0;
                        g.record_contiguous(AccessKind::ReadB, base, tw);
                        let slot = (chunk - span.start + j) * tw;
                        for (dst, &bv) in products[slot..slot + tw].iter_mut().zip(&bdata[base..base + tw]) {
                            *dst = bv * v;
                        }
                    }
                }

                let mut segments = row_segments(&row_ids).peekable();
                while let Some((row, range)) = segments.next() {
                    partial[..tw].fill(S::zero());
                    for p in range {
                        for (acc, &x) in partial[..tw].iter_mut().zip(&products[p * tw..(p + 1) * tw]) {
                            *acc = *acc + x;
                        }
                    }
                    if segments.peek().is_some() {
                        out.slice_mut(row * n + t0, tw)?.copy_from_slice(&partial[..tw]);
                        g.record_contiguous(AccessKind::WriteC, row * n + t0, tw);
                        g.counters_mut().writes_c += tw as u64;
                    } else {
                        carry_slot.slice_mut(block * n + t0, tw)?.copy_from_slice(&partial[..tw]);
                        *carry_row = Some(row);
                        g.counters_mut().carryout_accesses += tw as u64;
                    }
                }
            }
            if n == 0 {
                *carry_row = row_ids.last().copied();
            }
            Ok(())
        })?;

        fix_carryout(&mut c, &limits, &carry)?;

        let mut report = KernelReport::new(Algorithm::MergeBased, started.elapsed(), a.nnz(), n);
        report.counters = run.counters;
        report.metrics = run.trace.as_ref().map(KernelMetrics::from_trace);
        Ok(KernelOutput {
            c,
            trace: run.trace,
            report,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::type1_imbalance;
    use crate::matrix::{gen_aspect_matrix, random_dense, spmm_reference, CooTriple, RngSeed};

    fn check<S: Scalar>(a: &CsrMatrix<S>, n: usize, cfg: &ExecConfig) -> KernelOutput<S> {
        let b = random_dense(a.num_cols(), n, Layout::RowMajor, RngSeed(11));
        let out = spmm_merge(a, &b, cfg, Instrument::Summary).unwrap();
        let expect = spmm_reference(a, &b).unwrap();
        let err = crate::matrix::max_relative_error(&out.c, &expect).unwrap();
        assert!(err <= S::ORACLE_TOLERANCE, "max relative error {err}");
        out
    }

    #[test]
    fn identity() {
        let a = CsrMatrix::<f32>::identity(4);
        let b = random_dense(4, 32, Layout::RowMajor, RngSeed(1));
        let out = spmm_merge(&a, &b, &ExecConfig::default(), Instrument::Off).unwrap();
        assert_eq!(out.c, b);
    }

    #[test]
    fn giant_row_spans_many_blocks() {
        // f64 keeps the sequential oracle's own rounding out of the comparison
        let a = gen_aspect_matrix::<f64>(10_000, 1).unwrap();
        let out = check(&a, 32, &ExecConfig::default());
        let limits = partition_spmm(a.row_offsets(), a.nnz(), 128).unwrap();
        assert_eq!(limits.num_blocks(), 79);
        // every block ends inside row 0, so every block carries
        assert_eq!(out.report.counters.carryout_accesses, 79 * 32);
        assert_eq!(out.report.counters.writes_c, 0);
    }

    #[test]
    fn carry_outs_target_the_open_row() {
        let a = gen_aspect_matrix::<f32>(1000, 1).unwrap();
        let b = random_dense(1000, 4, Layout::RowMajor, RngSeed(2));
        let limits = partition_spmm(a.row_offsets(), a.nnz(), 128).unwrap();
        let mut carry_rows = Vec::new();
        for block in 0..limits.num_blocks() {
            carry_rows.push(limits.rows(block).0);
        }
        assert!(carry_rows.iter().all(|&r| r == 0));
        let out = spmm_merge(&a, &b, &ExecConfig::default(), Instrument::Off).unwrap();
        let expect = spmm_reference(&a, &b).unwrap();
        assert!(crate::matrix::max_relative_error(&out.c, &expect).unwrap() <= 1e-5);
    }

    #[test]
    fn equal_work_per_block() {
        let a = crate::matrix::gen_uniform_random::<f32>(300, 200, 0.07, RngSeed(5)).unwrap();
        let out = check(&a, 8, &ExecConfig::default());
        let t = out.trace.unwrap();
        let work = t.work_per_group();
        assert!(work[..work.len() - 1].iter().all(|&x| x == 128));
        assert!(*work.last().unwrap() <= 128);
        assert_eq!(work.iter().sum::<usize>(), a.nnz());
        if a.nnz().is_multiple_of(128) {
            assert_eq!(type1_imbalance(&t).unwrap(), 1.0);
        }
    }

    #[test]
    fn many_empty_rows_fall_back_to_direct_offsets() {
        let m = 5000;
        let triples: Vec<_> = (0..300).map(|i| CooTriple::new(m - 1 - (i % 3) * 2000, i, 1.0 + i as f32)).collect();
        let a = CsrMatrix::from_triples(m, 300, &triples).unwrap();
        let out = check(&a, 33, &ExecConfig::default());
        assert!(out.report.counters.scratch_fallback_reads > 0);
    }

    #[test]
    fn empty_matrix() {
        let a = CsrMatrix::<f32>::from_triples(5, 3, &[]).unwrap();
        let b = random_dense(3, 4, Layout::RowMajor, RngSeed(3));
        let out = spmm_merge(&a, &b, &ExecConfig::default(), Instrument::Summary).unwrap();
        assert!(out.c.data().iter().all(|&x| x == 0.0));
        assert_eq!(out.trace.unwrap().work_per_group(), &[0]);
        let none = CsrMatrix::<f32>::from_triples(0, 3, &[]).unwrap();
        let out = spmm_merge(&none, &b, &ExecConfig::default(), Instrument::Off).unwrap();
        assert_eq!(out.c.num_rows(), 0);
    }

    #[test]
    fn odd_configurations() {
        let a = crate::matrix::gen_uniform_random::<f32>(97, 150, 0.11, RngSeed(8)).unwrap();
        for (w, groups, t) in [(1, 1, 1), (4, 2, 3), (32, 4, 1), (64, 1, 2), (8, 3, 5)] {
            let cfg = ExecConfig::new(w, groups, t).unwrap();
            for n in [1, 5, 33] {
                check(&a, n, &cfg);
            }
        }
    }

    #[test]
    fn rejects_column_major_b() {
        let b = DenseMatrix::<f32>::zeros(2, 2, Layout::ColMajor);
        assert!(matches!(
            spmm_merge(&CsrMatrix::identity(2), &b, &ExecConfig::default(), Instrument::Summary),
            Err(SpmmError::Layout(_))
        ));
        let b = DenseMatrix::<f32>::zeros(3, 2, Layout::RowMajor);
        assert!(spmm_merge(&CsrMatrix::identity(2), &b, &ExecConfig::default(), Instrument::Off).is_err());
    }

    #[test]
    fn measured_overhead_matches_prediction() {
        let a = crate::matrix::gen_uniform_random::<f32>(200, 300, 0.05, RngSeed(4)).unwrap();
        let cfg = ExecConfig::default();
        let out = check(&a, 64, &cfg);
        let predicted = crate::exec::predict_overhead(&a, 64, &cfg, Algorithm::MergeBased).unwrap();
        assert_eq!(out.report.counters.partition_overhead_accesses, predicted.partition_overhead_accesses);
        assert_eq!(out.report.counters.carryout_accesses, predicted.carryout_accesses);
    }
}
