use crate::error::{Result, SpmmError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Successive elements of a row are contiguous.
    RowMajor,
    /// Successive elements of a column are contiguous.
    ColMajor,
}

/// Dense matrix backed by one contiguous buffer with an explicit layout tag.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S = f32> {
    num_rows: usize,
    num_cols: usize,
    layout: Layout,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(num_rows: usize, num_cols: usize, layout: Layout) -> Self {
        DenseMatrix {
            num_rows,
            num_cols,
            layout,
            data: vec![S::zero(); num_rows * num_cols],
        }
    }

    pub fn from_vec(num_rows: usize, num_cols: usize, layout: Layout, data: Vec<S>) -> Result<Self> {
        if data.len() != num_rows * num_cols {
            return Err(SpmmError::DimensionMismatch(format!(
                "{} elements supplied for a {num_rows}x{num_cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix {
            num_rows,
            num_cols,
            layout,
            data,
        })
    }

    /// Row-major matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let num_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == num_cols), "ragged rows");
        DenseMatrix {
            num_rows: rows.len(),
            num_cols,
            layout: Layout::RowMajor,
            data: rows.concat(),
        }
    }

    pub fn from_fn(
        num_rows: usize,
        num_cols: usize,
        layout: Layout,
        mut f: impl FnMut(usize, usize) -> S,
    ) -> Self {
        let mut out = Self::zeros(num_rows, num_cols, layout);
        for i in 0..num_rows {
            for j in 0..num_cols {
                out.set(i, j, f(i, j));
            }
        }
        out
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, Layout::RowMajor, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        let idx = self.index(i, j);
        self.data[idx] = v;
    }

    /// Same elements stored in `layout`.
    pub fn to_layout(&self, layout: Layout) -> Self {
        if layout == self.layout {
            return self.clone();
        }
        Self::from_fn(self.num_rows, self.num_cols, layout, |i, j| self.get(i, j))
    }

    pub fn cast<T: Scalar>(&self) -> DenseMatrix<T> {
        DenseMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            layout: self.layout,
            data: self.data.iter().map(|v| T::cast(v.as_f64())).collect(),
        }
    }
}

impl<S: Copy> DenseMatrix<S> {
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    /// Position of element `(i, j)` in the backing buffer. Doubles as the
    /// abstract word address used by the execution-model instrumentation.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        match self.layout {
            Layout::RowMajor => i * self.num_cols + j,
            Layout::ColMajor => j * self.num_rows + i,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[self.index(i, j)]
    }

    /// Contiguous slice of row `i`; `None` unless the layout is row-major.
    pub fn row(&self, i: usize) -> Option<&[S]> {
        match self.layout {
            Layout::RowMajor => Some(&self.data[i * self.num_cols..(i + 1) * self.num_cols]),
            Layout::ColMajor => None,
        }
    }
}

/// Largest elementwise relative error `|x - y| / max(|y|, 1)` of `got`
/// against `reference`, computed in f64. Shapes must agree.
pub fn max_relative_error<S: Scalar, T: Scalar>(got: &DenseMatrix<S>, reference: &DenseMatrix<T>) -> Result<f64> {
    if got.num_rows() != reference.num_rows() || got.num_cols() != reference.num_cols() {
        return Err(SpmmError::DimensionMismatch(format!(
            "comparing {}x{} against {}x{}",
            got.num_rows(),
            got.num_cols(),
            reference.num_rows(),
            reference.num_cols()
        )));
    }
    let mut worst = 0.0f64;
    for i in 0..got.num_rows() {
        for j in 0..got.num_cols() {
            let x = got.get(i, j).as_f64();
            let y = reference.get(i, j).as_f64();
            let err = (x - y).abs() / y.abs().max(1.0);
            if err.is_nan() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
