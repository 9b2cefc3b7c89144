//! Dataset CSV reading and writing.
//!
//! Comma-separated, optional header row. A first row containing any
//! non-numeric token is a header; the response is then the column named `y`,
//! otherwise column 0. All remaining columns form the design, in file order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Dataset;

pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::data(line.or(Some(k + 1)), None, format!("malformed CSV: {e}"))
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec));
    }
    let Some((first_line, first)) = rows.first() else {
        return Err(Error::data(None, None, "file contains no rows"));
    };
    let width = first.len();
    let header = first.iter().any(|t| t.parse::<f64>().is_err());
    let y_col = if header {
        first.iter().position(|t| t == "y").ok_or_else(|| {
            Error::data(Some(*first_line), None, "header has no column named 'y'")
        })?
    } else {
        0
    };
    if width < 2 {
        return Err(Error::data(
            Some(*first_line),
            None,
            "need a response column and at least one covariate",
        ));
    }

    let body = if header { &rows[1..] } else { &rows[..] };
    let mut y = Vec::with_capacity(body.len());
    let mut x = Vec::with_capacity(body.len() * (width - 1));
    for (line, rec) in body {
        if rec.len() != width {
            return Err(Error::data(
                Some(*line),
                None,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (c, tok) in rec.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| {
                Error::data(Some(*line), Some(c + 1), format!("cannot parse '{tok}' as a number"))
            })?;
            if !v.is_finite() {
                return Err(Error::data(
                    Some(*line),
                    Some(c + 1),
                    format!("non-finite value '{tok}'"),
                ));
            }
            if c == y_col {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    if y.len() < 2 {
        return Err(Error::data(None, None, format!("need at least 2 data rows, found {}", y.len())));
    }
    Dataset::new(y, x, width - 1)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv_to<W: Write>(ds: &Dataset, mut w: W) -> Result<()> {
    let mut header = vec!["y".to_string()];
    header.extend((1..=ds.d()).map(|j| format!("x{j}")));
    writeln!(w, "{}", header.join(","))?;
    for i in 0..ds.n() {
        let mut line = fmt_num(ds.y()[i]);
        for &v in ds.row(i) {
            line.push(',');
            line.push_str(&fmt_num(v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let f = fs::File::create(path.as_ref())?;
    write_csv_to(ds, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_headerless_agree() {
        let a = parse_csv("y,x1\n1.0,2.0\n-1.0,0.5\n").unwrap();
        let b = parse_csv("1.0,2.0\n-1.0,0.5\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 2);
        assert_eq!(a.d(), 1);
        assert_eq!(a.y(), &[1.0, -1.0]);
    }

    #[test]
    fn response_found_by_name() {
        let ds = parse_csv("x1,y,x2\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(ds.y(), &[2.0, 5.0]);
        assert_eq!(ds.row(1), &[4.0, 6.0]);
    }

    #[test]
    fn nan_cell_is_located() {
        let err = parse_csv("y,x1\nNaN,2.0\n1.0,0.5\n").unwrap_err();
        match err {
            Error::Data { row, column, .. } => {
                assert_eq!(row, Some(2));
                assert_eq!(column, Some(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_failures() {
        assert!(parse_csv("y,x1\n1,2\n").is_err());
        assert!(parse_csv("a,b\n1,2\n3,4\n").is_err());
        assert!(parse_csv("1\n2\n").is_err());
        let e = parse_csv("y,x1\n1,2\n3\n").unwrap_err();
        assert!(matches!(e, Error::Data { row: Some(3), .. }));
        let e = parse_csv("y,x1\n1,2\n3,abc\n").unwrap_err();
        assert!(matches!(e, Error::Data { row: Some(3), column: Some(2), .. }));
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn writes_round_trip_text() {
        let ds = Dataset::from_rows(vec![0.1, 1.0 / 3.0], &[vec![1e-300], vec![-2.5e17]]).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, ds);
    }
}
