//! `.cmat` text format: a `rows cols` header line followed by one `re im`
//! line per entry in row-major order.

use std::fmt::Write as _;
use std::path::Path;

use super::{ComplexMatrix, MatrixError, C64};

pub fn to_string(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for z in m.row_major() {
        // Display for f64 is decimal and round-trips.
        let _ = writeln!(out, "{} {}", z.re, z.im);
    }
    out
}

pub fn parse(text: &str) -> Result<ComplexMatrix, MatrixError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or(MatrixError::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(MatrixError::Parse {
            line,
            message: format!("expected `rows cols`, got {header:?}"),
        });
    }
    let rows = parse_usize(dims[0], line)?;
    let cols = parse_usize(dims[1], line)?;

    let mut entries = Vec::with_capacity(rows * cols);
    for (line, body) in lines {
        let parts: Vec<&str> = body.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(MatrixError::Parse {
                line,
                message: format!("expected `re im`, got {body:?}"),
            });
        }
        entries.push(C64::new(parse_f64(parts[0], line)?, parse_f64(parts[1], line)?));
    }
    ComplexMatrix::from_row_major(rows, cols, &entries)
}

pub fn read(path: &Path) -> Result<ComplexMatrix, MatrixError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MatrixError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn write(path: &Path, m: &ComplexMatrix) -> Result<(), MatrixError> {
    std::fs::write(path, to_string(m)).map_err(|e| MatrixError::Io(format!("{}: {e}", path.display())))
}

fn parse_usize(s: &str, line: usize) -> Result<usize, MatrixError> {
    s.parse().map_err(|_| MatrixError::Parse {
        line,
        message: format!("invalid dimension {s:?}"),
    })
}

fn parse_f64(s: &str, line: usize) -> Result<f64, MatrixError> {
    s.parse().map_err(|_| MatrixError::Parse {
        line,
        message: format!("invalid number {s:?}"),
    })
}
