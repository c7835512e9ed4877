//! Plain-text matrix files: one row per line, entries separated by a single
//! space, each printed with 17 significant digits. Blank lines and lines
//! starting with `#` are ignored when reading.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}", m[(i, j)]))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    out.write_all(format_matrix(m).as_bytes())?;
    Ok(())
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    Error::MatrixFormat(format!("line {}: bad number {tok:?}", lineno + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::MatrixFormat(format!(
                    "line {}: {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::MatrixFormat(format!(
                "line {}: non-finite entry",
                lineno + 1
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::MatrixFormat("no rows".into()));
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.into_iter().flatten(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.0009765625, 3.0]);
        let text = format_matrix(&m);
        assert_eq!(
            text,
            "1.0000000000000000e0 -5.0000000000000000e-1\n9.7656250000000000e-4 3.0000000000000000e0\n"
        );
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(read_matrix("1 2\n3\n".as_bytes()).is_err());
        assert!(read_matrix("# only a comment\n".as_bytes()).is_err());
        assert!(read_matrix("1 x\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in prop::collection::vec(-1e6f64..1e6, 12)) {
            let m = DMatrix::from_row_slice(3, 4, &vals);
            let back = read_matrix(format_matrix(&m).as_bytes()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
