use crate::error::{Result, SpmmError};
use crate::matrix::dense::{DenseMatrix, Layout};
use crate::scalar::Scalar;

/// One `(row, col, value)` entry of a coordinate list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooTriple<S = f32> {
    pub row: usize,
    pub col: usize,
    pub value: S,
}

impl<S> CooTriple<S> {
    pub fn new(row: usize, col: usize, value: S) -> Self {
        CooTriple { row, col, value }
    }
}

/// Compressed sparse row matrix in canonical form: column indices strictly
/// increase within each row and there are no duplicate entries.
///
/// Explicit zeros are kept; only structural entries count toward `nnz`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<S = f32> {
    num_rows: usize,
    num_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> CsrMatrix<S> {
    /// Builds a canonical matrix from an unordered triple list. Entries that
    /// share a `(row, col)` position are summed in input order.
    pub fn from_triples(num_rows: usize, num_cols: usize, triples: &[CooTriple<S>]) -> Result<Self> {
        for (index, t) in triples.iter().enumerate() {
            if t.row >= num_rows || t.col >= num_cols {
                return Err(SpmmError::TripleOutOfRange {
                    index,
                    row: t.row,
                    col: t.col,
                    num_rows,
                    num_cols,
                });
            }
        }

        // Counting sort by row keeps duplicates in input order, then a stable
        // sort by column inside each row.
        let mut counts = vec![0usize; num_rows + 1];
        for t in triples {
            counts[t.row + 1] += 1;
        }
        for r in 0..num_rows {
            counts[r + 1] += counts[r];
        }
        let mut cursor = counts.clone();
        let mut order = vec![0usize; triples.len()];
        for (i, t) in triples.iter().enumerate() {
            order[cursor[t.row]] = i;
            cursor[t.row] += 1;
        }

        let mut row_offsets = Vec::with_capacity(num_rows + 1);
        let mut col_indices = Vec::with_capacity(triples.len());
        let mut values = Vec::with_capacity(triples.len());
        row_offsets.push(0);
        for r in 0..num_rows {
            let slot = &mut order[counts[r]..counts[r + 1]];
            slot.sort_by_key(|&i| triples[i].col);
            for &i in slot.iter() {
                let t = &triples[i];
                let row_start = row_offsets[r];
                match col_indices.last() {
                    Some(&last) if col_indices.len() > row_start && last == t.col => {
                        let v: &mut S = values.last_mut().expect("values tracks col_indices");
                        *v = *v + t.value;
                    }
                    _ => {
                        col_indices.push(t.col);
                        values.push(t.value);
                    }
                }
            }
            row_offsets.push(col_indices.len());
        }

        Ok(CsrMatrix {
            num_rows,
            num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Wraps raw CSR arrays after checking every canonical-form invariant.
    pub fn from_parts(
        num_rows: usize,
        num_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<S>,
    ) -> Result<Self> {
        validate_offsets(&row_offsets, num_rows, col_indices.len())?;
        if values.len() != col_indices.len() {
            return Err(SpmmError::InvalidCsr(format!(
                "{} values for {} column indices",
                values.len(),
                col_indices.len()
            )));
        }
        for r in 0..num_rows {
            let cols = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            for (i, &c) in cols.iter().enumerate() {
                if c >= num_cols {
                    return Err(SpmmError::InvalidCsr(format!(
                        "row {r} references column {c} of a matrix with {num_cols} columns"
                    )));
                }
                if i > 0 && cols[i - 1] >= c {
                    return Err(SpmmError::InvalidCsr(format!(
                        "row {r} column indices are not strictly increasing"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            num_rows,
            num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            num_rows: n,
            num_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![S::one(); n],
        }
    }

    /// Stores every nonzero element of `dense` (zeros are dropped).
    pub fn from_dense(dense: &DenseMatrix<S>) -> Self {
        let mut row_offsets = Vec::with_capacity(dense.num_rows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..dense.num_rows() {
            for j in 0..dense.num_cols() {
                let v = dense.get(i, j);
                if v != S::zero() {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            num_rows: dense.num_rows(),
            num_cols: dense.num_cols(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_triples(&self) -> Vec<CooTriple<S>> {
        (0..self.num_rows)
            .flat_map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter()
                    .zip(vals)
                    .map(move |(&c, &v)| CooTriple::new(r, c, v))
            })
            .collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> DenseMatrix<S> {
        let mut out = DenseMatrix::zeros(self.num_rows, self.num_cols, Layout::RowMajor);
        for r in 0..self.num_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out.set(r, c, v);
            }
        }
        out
    }

    /// Converts the element type, e.g. to tighten an oracle comparison in f64.
    pub fn cast<T: Scalar>(&self) -> CsrMatrix<T> {
        CsrMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|v| T::cast(v.as_f64())).collect(),
        }
    }
}

impl<S> CsrMatrix<S> {
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn row_len(&self, r: usize) -> usize {
        self.row_offsets[r + 1] - self.row_offsets[r]
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[S]) {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }
}

/// Checks the offset-array invariants shared by every CSR consumer.
pub(crate) fn validate_offsets(row_offsets: &[usize], num_rows: usize, nnz: usize) -> Result<()> {
    if row_offsets.len() != num_rows + 1 {
        return Err(SpmmError::InvalidCsr(format!(
            "row_offsets has length {}, expected {}",
            row_offsets.len(),
            num_rows + 1
        )));
    }
    if row_offsets[0] != 0 {
        return Err(SpmmError::InvalidCsr("row_offsets[0] must be 0".into()));
    }
    if row_offsets[num_rows] != nnz {
        return Err(SpmmError::InvalidCsr(format!(
            "row_offsets ends at {}, but there are {nnz} nonzeros",
            row_offsets[num_rows]
        )));
    }
    if let Some(r) = row_offsets.windows(2).position(|w| w[0] > w[1]) {
        return Err(SpmmError::InvalidCsr(format!("row_offsets decreases at row {r}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(row: usize, col: usize, value: f64) -> CooTriple<f64> {
        CooTriple::new(row, col, value)
    }

    #[test]
    fn diagonal() {
        let a = CsrMatrix::from_triples(2, 2, &[t(0, 0, 1.0), t(1, 1, 2.0)]).unwrap();
        assert_eq!(a.row_offsets(), &[0, 1, 2]);
        assert_eq!(a.col_indices(), &[0, 1]);
        assert_eq!(a.values(), &[1.0, 2.0]);
    }

    #[test]
    fn empty_matrix() {
        let a = CsrMatrix::<f64>::from_triples(3, 3, &[]).unwrap();
        assert_eq!(a.row_offsets(), &[0, 0, 0, 0]);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triples(2, 2, &[t(0, 1, 1.0), t(0, 1, 2.0)]).unwrap();
        assert_eq!(a.to_triples(), vec![t(0, 1, 3.0)]);
    }

    #[test]
    fn out_of_range_triple_is_named() {
        let err = CsrMatrix::from_triples(2, 2, &[t(0, 0, 1.0), t(1, 2, 1.0)]).unwrap_err();
        match err {
            SpmmError::TripleOutOfRange { index, row, col, .. } => {
                assert_eq!((index, row, col), (1, 1, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn from_parts_rejects_unsorted_rows() {
        let err = CsrMatrix::from_parts(1, 3, vec![0, 2], vec![2, 1], vec![1.0f32, 1.0]);
        assert!(matches!(err, Err(SpmmError::InvalidCsr(_))));
        let err = CsrMatrix::from_parts(2, 3, vec![0, 2, 1], vec![0, 1], vec![1.0f32, 1.0]);
        assert!(matches!(err, Err(SpmmError::InvalidCsr(_))));
        let err = CsrMatrix::from_parts(1, 3, vec![0, 1], vec![3], vec![1.0f32]);
        assert!(matches!(err, Err(SpmmError::InvalidCsr(_))));
    }

    fn triples_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, i32)>)> {
        (1usize..12, 1usize..12).prop_flat_map(|(m, k)| {
            let entries = prop::collection::vec((0..m, 0..k, -8i32..8), 0..60);
            (Just(m), Just(k), entries)
        })
    }

    proptest! {
        #[test]
        fn densify_matches_direct_accumulation((m, k, entries) in triples_strategy()) {
            let triples: Vec<_> = entries.iter().map(|&(r, c, v)| t(r, c, v as f64)).collect();
            let a = CsrMatrix::from_triples(m, k, &triples).unwrap();
            let mut dense = vec![0.0; m * k];
            for tr in &triples {
                dense[tr.row * k + tr.col] += tr.value;
            }
            let got = a.to_dense();
            for i in 0..m {
                for j in 0..k {
                    prop_assert_eq!(got.get(i, j), dense[i * k + j]);
                }
            }
        }

        #[test]
        fn canonical_round_trip((m, k, entries) in triples_strategy()) {
            let triples: Vec<_> = entries.iter().map(|&(r, c, v)| t(r, c, v as f64)).collect();
            let a = CsrMatrix::from_triples(m, k, &triples).unwrap();
            let again = CsrMatrix::from_triples(m, k, &a.to_triples()).unwrap();
            prop_assert_eq!(&again, &a);
            let parts = CsrMatrix::from_parts(
                m, k, a.row_offsets().to_vec(), a.col_indices().to_vec(), a.values().to_vec(),
            ).unwrap();
            prop_assert_eq!(parts, a);
        }
    }
}
