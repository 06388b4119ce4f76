//! Matrix Market coordinate format.
//!
//! Reads `matrix coordinate` files with `real`, `double`, `integer` or
//! `pattern` fields and `general`, `symmetric` or `skew-symmetric` storage.
//! Indices in the file are 1-based; everything returned here is 0-based.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Result, SpmmError};
use crate::matrix::csr::{CooTriple, CsrMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Contents of a coordinate file with symmetric storage already expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMarket<S = f32> {
    pub num_rows: usize,
    pub num_cols: usize,
    pub triples: Vec<CooTriple<S>>,
}

impl<S: Scalar> MatrixMarket<S> {
    pub fn into_csr(self) -> Result<CsrMatrix<S>> {
        CsrMatrix::from_triples(self.num_rows, self.num_cols, &self.triples)
    }
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(SpmmError::parse(1, "missing '%%MatrixMarket' banner"));
    }
    if tokens[1] != "matrix" {
        return Err(SpmmError::parse(1, format!("unsupported object '{}'", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(SpmmError::parse(1, format!("unsupported format '{}'", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(SpmmError::parse(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(SpmmError::parse(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

fn parse_index(token: Option<&str>, bound: usize, what: &str, line: usize) -> Result<usize> {
    let token = token.ok_or_else(|| SpmmError::parse(line, format!("missing {what} index")))?;
    let idx: usize = token
        .parse()
        .map_err(|_| SpmmError::parse(line, format!("invalid {what} index '{token}'")))?;
    if idx == 0 || idx > bound {
        return Err(SpmmError::parse(
            line,
            format!("{what} index {idx} outside 1..={bound}"),
        ));
    }
    Ok(idx - 1)
}

/// Parses a Matrix Market coordinate stream.
pub fn read_matrix_market<S: Scalar, R: BufRead>(reader: R) -> Result<MatrixMarket<S>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, banner) = lines
        .next()
        .ok_or_else(|| SpmmError::parse(1, "empty input"))?;
    let (field, symmetry) = parse_header(&banner?)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triples = Vec::new();
    let mut seen = 0usize;

    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let Some((m, k, nnz)) = size else {
            let mut dim = |what: &str| -> Result<usize> {
                let tok = tokens
                    .next()
                    .ok_or_else(|| SpmmError::parse(lineno, format!("size line is missing {what}")))?;
                tok.parse()
                    .map_err(|_| SpmmError::parse(lineno, format!("invalid {what} '{tok}'")))
            };
            let dims = (dim("rows")?, dim("columns")?, dim("entry count")?);
            if tokens.next().is_some() {
                return Err(SpmmError::parse(lineno, "size line has extra fields"));
            }
            triples.reserve(if symmetry == Symmetry::General { dims.2 } else { 2 * dims.2 });
            size = Some(dims);
            continue;
        };

        if seen == nnz {
            return Err(SpmmError::parse(
                lineno,
                format!("more entries than the {nnz} declared"),
            ));
        }
        let row = parse_index(tokens.next(), m, "row", lineno)?;
        let col = parse_index(tokens.next(), k, "column", lineno)?;
        let value = match field {
            Field::Pattern => S::one(),
            Field::Real | Field::Integer => {
                let tok = tokens
                    .next()
                    .ok_or_else(|| SpmmError::parse(lineno, "missing value"))?;
                let v: f64 = if field == Field::Integer {
                    tok.parse::<i64>()
                        .map_err(|_| SpmmError::parse(lineno, format!("invalid integer '{tok}'")))?
                        as f64
                } else {
                    tok.parse()
                        .map_err(|_| SpmmError::parse(lineno, format!("invalid value '{tok}'")))?
                };
                S::cast(v)
            }
        };
        if tokens.next().is_some() {
            return Err(SpmmError::parse(lineno, "entry has extra fields"));
        }
        seen += 1;

        triples.push(CooTriple::new(row, col, value));
        if row != col {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triples.push(CooTriple::new(col, row, value)),
                Symmetry::SkewSymmetric => triples.push(CooTriple::new(col, row, -value)),
            }
        }
    }

    let Some((num_rows, num_cols, nnz)) = size else {
        return Err(SpmmError::parse(1, "missing size line"));
    };
    if seen != nnz {
        return Err(SpmmError::parse(
            0,
            format!("expected {nnz} entries, found {seen}"),
        ));
    }
    if symmetry != Symmetry::General && num_rows != num_cols {
        return Err(SpmmError::parse(1, "symmetric storage requires a square matrix"));
    }
    Ok(MatrixMarket {
        num_rows,
        num_cols,
        triples,
    })
}

/// Reads a Matrix Market file straight into canonical CSR.
pub fn load_matrix_market<S: Scalar>(path: impl AsRef<Path>) -> Result<CsrMatrix<S>> {
    let file = File::open(path)?;
    read_matrix_market(BufReader::new(file))?.into_csr()
}

/// Writes `a` as a `real general` coordinate file.
pub fn write_matrix_market<S: Scalar, W: Write>(a: &CsrMatrix<S>, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.num_rows(), a.num_cols(), a.nnz())?;
    for t in a.to_triples() {
        writeln!(out, "{} {} {}", t.row + 1, t.col + 1, t.value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<MatrixMarket<f64>> {
        read_matrix_market(text.as_bytes())
    }

    #[test]
    fn minimal_file() {
        let mm = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 5.0\n").unwrap();
        assert_eq!((mm.num_rows, mm.num_cols), (2, 2));
        assert_eq!(mm.triples, vec![CooTriple::new(0, 0, 5.0)]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let mm = parse(
            "%%MatrixMarket matrix coordinate real general\n% a comment\n\n3 4 2\n% mid\n1 4 1.5\n3 2 -2e0\n",
        )
        .unwrap();
        assert_eq!(
            mm.triples,
            vec![CooTriple::new(0, 3, 1.5), CooTriple::new(2, 1, -2.0)]
        );
    }

    #[test]
    fn symmetric_expansion() {
        let mm = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 3.5\n").unwrap();
        assert_eq!(
            mm.triples,
            vec![
                CooTriple::new(0, 0, 4.0),
                CooTriple::new(1, 0, 3.5),
                CooTriple::new(0, 1, 3.5)
            ]
        );
    }

    #[test]
    fn skew_symmetric_negates_mirror() {
        let mm = parse("%%MatrixMarket matrix coordinate real skew-symmetric\n3 3 1\n3 1 2\n").unwrap();
        assert_eq!(
            mm.triples,
            vec![CooTriple::new(2, 0, 2.0), CooTriple::new(0, 2, -2.0)]
        );
    }

    #[test]
    fn pattern_entries_get_unit_value() {
        let mm = parse("%%MatrixMarket matrix coordinate pattern general\n3 3 1\n3 1\n").unwrap();
        assert_eq!(mm.triples, vec![CooTriple::new(2, 0, 1.0)]);
    }

    #[test]
    fn integer_field_is_widened() {
        let mm: MatrixMarket<f32> =
            read_matrix_market("%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 -7\n".as_bytes())
                .unwrap();
        assert_eq!(mm.triples, vec![CooTriple::new(0, 0, -7.0f32)]);
    }

    #[test]
    fn complex_is_rejected() {
        let err = parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 x 1\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 4, .. }), "{err}");

        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n% c\n3 1 1\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 4, .. }), "{err}");

        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 3, .. }), "{err}");

        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 3, .. }), "{err}");

        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 2\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 4, .. }), "{err}");

        let err = parse("%%MatrixMarket matrix coordinate real general\n2 2 99999999999999999999999\n").unwrap_err();
        assert!(matches!(err, SpmmError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn array_format_is_rejected() {
        assert!(parse("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse("not a banner\n").is_err());
    }

    #[test]
    fn write_then_read() {
        let a = CsrMatrix::from_triples(
            3,
            2,
            &[CooTriple::new(0, 1, 0.1f64), CooTriple::new(2, 0, -3.25)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let back = read_matrix_market::<f64, _>(&buf[..]).unwrap().into_csr().unwrap();
        assert_eq!(back, a);
    }

    proptest! {
        #[test]
        fn symmetric_expansion_is_its_own_transpose(
            n in 1usize..9,
            entries in prop::collection::vec((0usize..9, 0usize..9, -4i32..5), 0..20),
        ) {
            // Lower-triangle entries only, as symmetric files store them.
            let lower: Vec<_> = entries
                .into_iter()
                .filter(|&(r, c, _)| r < n && c < n)
                .map(|(r, c, v)| if r >= c { (r, c, v) } else { (c, r, v) })
                .collect();
            let mut text = format!("%%MatrixMarket matrix coordinate real symmetric\n{n} {n} {}\n", lower.len());
            for (r, c, v) in &lower {
                text.push_str(&format!("{} {} {}\n", r + 1, c + 1, v));
            }
            let dense = parse(&text).unwrap().into_csr().unwrap().to_dense();

            // Oracle: symmetrize the stored triangle directly.
            let mut expect = vec![0.0; n * n];
            for &(r, c, v) in &lower {
                expect[r * n + c] += v as f64;
                if r != c {
                    expect[c * n + r] += v as f64;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(dense.get(i, j), dense.get(j, i));
                    prop_assert_eq!(dense.get(i, j), expect[i * n + j]);
                }
            }
        }
    }
}
