//! Sparse and dense matrix types, Matrix Market I/O, generators and the
//! sequential reference products.

pub mod csr;
pub mod dense;
pub mod generate;
pub mod mtx;
pub mod reference;

pub use csr::{CooTriple, CsrMatrix};
pub use dense::{max_relative_error, DenseMatrix, Layout};
pub use generate::{gen_aspect_matrix, gen_uniform_random, random_dense, random_dense_in, RngSeed};
pub use mtx::{load_matrix_market, read_matrix_market, write_matrix_market, MatrixMarket};
pub use reference::{gemm_reference, spmm_reference};
