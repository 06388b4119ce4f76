//! Sequential oracles. Accumulation always runs in ascending column order
//! starting from zero, so results are fully deterministic.

use crate::error::{Result, SpmmError};
use crate::matrix::csr::CsrMatrix;
use crate::matrix::dense::{DenseMatrix, Layout};
use crate::scalar::Scalar;

/// `C = A * B` with a row-major result, one row at a time.
pub fn spmm_reference<S: Scalar>(a: &CsrMatrix<S>, b: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
    if a.num_cols() != b.num_rows() {
        return Err(SpmmError::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.num_rows(),
            a.num_cols(),
            b.num_rows()
        )));
    }
    let n = b.num_cols();
    let mut c = DenseMatrix::zeros(a.num_rows(), n, Layout::RowMajor);
    let mut acc = vec![S::zero(); n];
    for r in 0..a.num_rows() {
        acc.iter_mut().for_each(|x| *x = S::zero());
        let (cols, vals) = a.row(r);
        for (&col, &v) in cols.iter().zip(vals) {
            match b.row(col) {
                Some(brow) => {
                    for (x, &bv) in acc.iter_mut().zip(brow) {
                        *x = *x + v * bv;
                    }
                }
                None => {
                    for (j, x) in acc.iter_mut().enumerate() {
                        *x = *x + v * b.get(col, j);
                    }
                }
            }
        }
        c.data_mut()[r * n..(r + 1) * n].copy_from_slice(&acc);
    }
    Ok(c)
}

/// Plain triple-loop dense product, row-major result.
pub fn gemm_reference<S: Scalar>(a: &DenseMatrix<S>, b: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
    if a.num_cols() != b.num_rows() {
        return Err(SpmmError::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.num_rows(),
            a.num_cols(),
            b.num_rows()
        )));
    }
    let (m, k, n) = (a.num_rows(), a.num_cols(), b.num_cols());
    let b = b.to_layout(Layout::RowMajor);
    let mut c = DenseMatrix::zeros(m, n, Layout::RowMajor);
    let mut acc = vec![S::zero(); n];
    for i in 0..m {
        acc.iter_mut().for_each(|x| *x = S::zero());
        for p in 0..k {
            let v = a.get(i, p);
            let brow = &b.data()[p * n..(p + 1) * n];
            for (x, &bv) in acc.iter_mut().zip(brow) {
                *x = *x + v * bv;
            }
        }
        c.data_mut()[i * n..(i + 1) * n].copy_from_slice(&acc);
    }
    Ok(c)
}
