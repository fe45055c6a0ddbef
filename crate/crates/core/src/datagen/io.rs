//! Plain-text matrix files.
//!
//! Line 1 holds `n`; lines 2..=n+1 hold the rows, `n` entries each separated
//! by one space, LF line endings, no trailing whitespace. Entries carry 17
//! significant digits: positional notation when the decimal exponent lies in
//! `[-5, 16]`, otherwise Rust's `{:.16e}` form (`1.2345678901234567e-7`).
//! Seventeen digits make every `f64` round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// One matrix entry with 17 significant digits.
pub fn format_entry(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..=16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, v)
    } else {
        sci
    }
}

pub fn write_matrix_to<W: Write>(a: &SymMatrix, mut out: W) -> Result<()> {
    let n = a.n();
    let mut line = String::new();
    writeln!(out, "{n}")?;
    for i in 0..n {
        line.clear();
        for (j, &v) in a.row(i).iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format_entry(v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_matrix(a: &SymMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_matrix_to(a, std::io::BufWriter::new(file))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SymMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

/// Parses the matrix format; asymmetry above `1e-12` is rejected.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let malformed = |msg: String| Error::MalformedMatrix(msg);
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines.next().ok_or_else(|| malformed("empty file".into()))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| malformed(format!("bad dimension line {header:?}")))?;
    if n == 0 {
        return Err(malformed("dimension must be at least 1".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| malformed(format!("expected {n} rows, found {i}")))?;
        let start = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| malformed(format!("row {}: non-numeric token {tok:?}", i + 1)))?;
            data.push(v);
        }
        if data.len() - start != n {
            return Err(malformed(format!(
                "row {}: expected {n} entries, found {}",
                i + 1,
                data.len() - start
            )));
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(malformed(format!("trailing content after {n} rows")));
    }
    SymMatrix::from_row_major(n, data).map_err(|e| malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_text_is_exact() {
        let mut buf = Vec::new();
        write_matrix_to(&SymMatrix::identity(2), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "2\n1.0000000000000000 0\n0 1.0000000000000000\n");
        assert_eq!(parse_matrix(&text).unwrap(), SymMatrix::identity(2));
    }

    #[test]
    fn entries_have_seventeen_digits() {
        assert_eq!(format_entry(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_entry(-2.5), "-2.5000000000000000");
        assert_eq!(format_entry(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_entry(1.5e20), "1.5000000000000000e20");
        for v in [0.1, 123456.789, 9.999999999999999e-1, 1e-5, 5e16, f64::MAX, f64::MIN_POSITIVE] {
            let s = format_entry(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit())
                .collect::<String>();
            assert_eq!(digits.trim_start_matches('0').len(), 17, "{s}");
        }
    }

    #[test]
    fn malformed_inputs() {
        for text in [
            "",
            "x\n",
            "2\n1 0\n",
            "2\n1 0\n0\n",
            "2\n1 0\n0 a\n",
            "2\n1 0.5\n0.4 1\n",
            "1\n1\n2\n",
            "0\n",
        ] {
            assert!(
                matches!(parse_matrix(text), Err(Error::MalformedMatrix(_))),
                "{text:?}"
            );
        }
    }
}
