//! Plain-text matrix fixtures: a `rows cols` header line followed by one
//! line per row of whitespace-separated floats.

use std::fmt::Write as _;
use std::path::Path;

use orthoflow::Matrix;

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&x| format_float(x)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let err = |line: usize, msg: String| CliError::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(hline + 1, format!("bad dimension {t:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(err(hline + 1, "header must be \"rows cols\"".into()));
    };
    if rows == 0 || cols == 0 {
        return Err(err(hline + 1, "dimensions must be positive".into()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (n, line) in lines {
        seen += 1;
        if seen > rows {
            return Err(err(n + 1, format!("more than {rows} rows")));
        }
        let before = data.len();
        for t in line.split_whitespace() {
            data.push(t.parse::<f64>().map_err(|_| err(n + 1, format!("bad number {t:?}")))?);
        }
        if data.len() - before != cols {
            return Err(err(n + 1, format!("expected {cols} values, found {}", data.len() - before)));
        }
    }
    if seen != rows {
        return Err(err(hline + 1, format!("expected {rows} rows, found {seen}")));
    }
    Ok(Matrix::from_vec(rows, cols, data)?)
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    parse_matrix(&text, path)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    std::fs::write(path, format_matrix(m)).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}
