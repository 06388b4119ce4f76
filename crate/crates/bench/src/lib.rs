//! Fixtures shared by the criterion benchmarks.

use spmm::matrix::{gen_aspect_matrix, gen_uniform_random, random_dense};
use spmm::{CsrMatrix, DenseMatrix, Layout, RngSeed};

/// Operands for one benchmark case.
pub struct Case {
    pub name: String,
    pub a: CsrMatrix<f32>,
    pub b: DenseMatrix<f32>,
}

/// Dense-as-CSR matrices with `total_nnz` nonzeros and varying row counts.
pub fn aspect_cases(total_nnz: usize, row_counts: &[usize], n: usize) -> Vec<Case> {
    row_counts
        .iter()
        .map(|&rows| {
            let a = gen_aspect_matrix(total_nnz, rows).expect("row count divides total_nnz");
            let b = random_dense(a.num_cols(), n, Layout::RowMajor, RngSeed(rows as u64));
            Case {
                name: format!("{rows}x{}", a.num_cols()),
                a,
                b,
            }
        })
        .collect()
}

/// Square random matrices at several fill fractions.
pub fn density_cases(size: usize, fractions: &[f64], n: usize) -> Vec<Case> {
    fractions
        .iter()
        .map(|&f| {
            let a = gen_uniform_random(size, size, f, RngSeed(7)).expect("fraction in [0, 1]");
            let b = random_dense(size, n, Layout::RowMajor, RngSeed(8));
            Case {
                name: format!("fill{:.2}", f),
                a,
                b,
            }
        })
        .collect()
}
