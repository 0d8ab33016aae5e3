//! Plain-text complex vectors: one `re im` pair per line, whitespace
//! separated. Blank lines and lines starting with `#` are ignored.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn parse_complex_lines(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Config(format!("line {}: expected `re im`, got {line:?}", i + 1));
        if fields.len() != 2 {
            return Err(bad());
        }
        let re: f64 = fields[0].parse().map_err(|_| bad())?;
        let im: f64 = fields[1].parse().map_err(|_| bad())?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

/// Writes `values` after `#`-prefixed `comment` lines. Seventeen significant
/// digits, so parsing returns the exact same doubles.
pub fn format_complex_lines(values: &[Complex64], comment: &str) -> String {
    let mut s = String::new();
    for c in comment.lines() {
        s.push_str("# ");
        s.push_str(c);
        s.push('\n');
    }
    for v in values {
        s.push_str(&format!("{:.16e} {:.16e}\n", v.re, v.im));
    }
    s
}
