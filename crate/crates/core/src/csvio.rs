//! Small CSV helpers shared by the file formats in this crate. Floats are
//! written with 17 significant digits so every finite double round-trips
//! bit-exactly.

use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix<P: AsRef<Path>>(path: P, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix<P: AsRef<Path>>(path: P) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = parse_row(line, lineno + 1)?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "empty matrix".into(),
        });
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn parse_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|cell| {
            cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad numeric cell {:?}", cell.trim()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 0.0] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.5, -0.25, 1.0 / 3.0, 0.0, -7.0]);
        let path = std::env::temp_dir().join("prodgraph_csvio_test.csv");
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(m, back);
    }
}
