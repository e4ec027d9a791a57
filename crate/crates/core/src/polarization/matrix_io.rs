//! Plain-text matrix format for states and density matrices.
//!
//! One matrix row per line; entries are comma-separated complex numbers
//! written as `<re><sign><|im|>j`, e.g. `0.5+0j,-0.25-0.125j`. Real and
//! imaginary parts use Rust's shortest round-trip decimal form, so parsing a
//! written matrix reproduces it bit for bit. A state vector is written as a
//! 4×1 column (one amplitude per line). Blank lines and lines starting with
//! `#` are ignored on input.

use num_complex::Complex64;

use super::state::{DensityMatrix, Matrix4c, StateVector};
use crate::error::{Error, Result};

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let body = s
        .strip_suffix('j')
        .ok_or_else(|| Error::parse("complex entry", format!("`{s}` does not end in `j`")))?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(|| Error::parse("complex entry", format!("`{s}` has no imaginary part")))?;
    let bad = |_| Error::parse("complex entry", format!("`{s}` is not `re+imj`"));
    let re: f64 = body[..split].parse().map_err(bad)?;
    let im: f64 = body[split..].parse().map_err(bad)?;
    Ok(Complex64::new(re, im))
}

pub fn write_matrix(m: &Matrix4c) -> String {
    let mut out = String::new();
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format_complex(m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_matrix(text: &str) -> Result<Matrix4c> {
    let rows: Vec<&str> = data_lines(text).collect();
    if rows.len() != 4 {
        return Err(Error::parse("matrix", format!("expected 4 rows, found {}", rows.len())));
    }
    let mut m = Matrix4c::zeros();
    for (r, line) in rows.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::parse(
                "matrix",
                format!("row {r} has {} entries, expected 4", cells.len()),
            ));
        }
        for (c, cell) in cells.iter().enumerate() {
            m[(r, c)] = parse_complex(cell)?;
        }
    }
    Ok(m)
}

pub fn write_state(psi: &StateVector) -> String {
    psi.amplitudes()
        .iter()
        .map(|&a| format_complex(a) + "\n")
        .collect()
}

pub fn parse_state(text: &str) -> Result<StateVector> {
    let rows: Vec<&str> = data_lines(text).collect();
    if rows.len() != 4 {
        return Err(Error::parse("state", format!("expected 4 amplitudes, found {}", rows.len())));
    }
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    for (a, row) in amps.iter_mut().zip(rows) {
        *a = parse_complex(row)?;
    }
    Ok(StateVector::new(amps))
}

impl DensityMatrix {
    pub fn to_text(&self) -> String {
        write_matrix(self.matrix())
    }

    /// Parses and validates a density matrix.
    pub fn from_text(text: &str) -> Result<Self> {
        DensityMatrix::new(parse_matrix(text)?)
    }
}
